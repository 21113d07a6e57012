//! Gauss–Legendre rules, composite grids and an adaptive Gauss–Kronrod integrator.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi initial guess.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Variable mapping applied on a panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mapping {
    /// Affine map of `[-1, 1]` onto `[lo, hi]`.
    Linear,
    /// Affine in `ln k` between `lo` and `hi` (both positive).
    Logarithmic,
    /// `k = lo + scale · t/(1-t)`, `t ∈ [0, 1)`, covering `[lo, ∞)`.
    Rational { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
    pub mapping: Mapping,
}

/// Composite quadrature over `[0, ∞)` built from panels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub panels: Vec<Panel>,
    pub nodes: Vec<(f64, f64)>,
}

impl QuadratureGrid {
    pub fn from_panels(panels: Vec<Panel>) -> Result<Self> {
        if panels.is_empty() {
            return Err(Error::Quadrature("grid has no panels".into()));
        }
        let mut nodes = Vec::new();
        for p in &panels {
            if p.nodes == 0 {
                return Err(Error::Quadrature(format!("empty panel [{}, {}]", p.lo, p.hi)));
            }
            let (x, w) = gauss_legendre(p.nodes);
            match p.mapping {
                Mapping::Linear => {
                    if !(p.hi > p.lo) {
                        return Err(Error::Quadrature(format!("degenerate panel [{}, {}]", p.lo, p.hi)));
                    }
                    let h = 0.5 * (p.hi - p.lo);
                    let c = 0.5 * (p.hi + p.lo);
                    nodes.extend(x.iter().zip(&w).map(|(&t, &wt)| (c + h * t, h * wt)));
                }
                Mapping::Logarithmic => {
                    if !(p.lo > 0.0 && p.hi > p.lo) {
                        return Err(Error::Quadrature(format!("invalid log panel [{}, {}]", p.lo, p.hi)));
                    }
                    let (a, b) = (p.lo.ln(), p.hi.ln());
                    let h = 0.5 * (b - a);
                    let c = 0.5 * (b + a);
                    nodes.extend(x.iter().zip(&w).map(|(&t, &wt)| {
                        let k = (c + h * t).exp();
                        (k, h * wt * k)
                    }));
                }
                Mapping::Rational { scale } => {
                    if !(scale > 0.0) {
                        return Err(Error::Quadrature("rational tail needs a positive scale".into()));
                    }
                    nodes.extend(x.iter().zip(&w).map(|(&t, &wt)| {
                        let u = 0.5 * (t + 1.0);
                        let k = p.lo + scale * u / (1.0 - u);
                        (k, 0.5 * wt * scale / ((1.0 - u) * (1.0 - u)))
                    }));
                }
            }
        }
        Ok(Self { panels, nodes })
    }

    /// Same panels with every node count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let panels = self
            .panels
            .iter()
            .map(|p| Panel { nodes: p.nodes * factor, ..*p })
            .collect();
        Self::from_panels(panels)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = KahanSum::default();
        for &(k, w) in &self.nodes {
            acc.add(w * f(k));
        }
        acc.value()
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_904_656_117_117,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[10];
    let mut rg = 0.0;
    for j in 0..10 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (10/21) integration on a finite interval.
pub fn adaptive_integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk21(&f, a, b);
    intervals.push((a, b, v, e));
    for _ in 0..20_000 {
        let total: f64 = intervals.iter().map(|t| t.2).sum();
        let err: f64 = intervals.iter().map(|t| t.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(sum_values(&intervals));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(sum_values(&intervals));
        }
        let (v1, e1) = gk21(&f, lo, mid);
        let (v2, e2) = gk21(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    Err(Error::Quadrature("adaptive subdivision limit reached".into()))
}

fn sum_values(iv: &[(f64, f64, f64, f64)]) -> f64 {
    let mut s = KahanSum::default();
    for t in iv {
        s.add(t.2);
    }
    s.value()
}

/// Adaptive integration over `[a, ∞)` through `x = a + s·t/(1-t)`.
pub fn adaptive_integrate_semi_infinite(
    f: impl Fn(f64) -> f64,
    a: f64,
    scale: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    adaptive_integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let x = a + scale * t / (1.0 - t);
            let j = scale / ((1.0 - t) * (1.0 - t));
            let v = f(x) * j;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}

/// Adaptive integration over `(lo, hi)` split at logarithmically spaced breakpoints.
pub fn adaptive_integrate_log_split(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    per_decade: usize,
    rel_tol: f64,
) -> Result<f64> {
    assert!(lo > 0.0 && hi > lo);
    let decades = (hi / lo).log10();
    let pieces = ((decades * per_decade as f64).ceil() as usize).max(1);
    let mut acc = KahanSum::default();
    let ratio = (hi / lo).powf(1.0 / pieces as f64);
    let mut a = lo;
    for i in 0..pieces {
        let b = if i + 1 == pieces { hi } else { a * ratio };
        acc.add(adaptive_integrate(&f, a, b, rel_tol, 1e-300)?);
        a = b;
    }
    Ok(acc.value())
}
