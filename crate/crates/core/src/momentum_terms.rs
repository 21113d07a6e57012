//! Renormalized zero- and one-potential terms evaluated in momentum space.
//!
//! Conventions: `ψ(p) = (−i)^l p⁻¹ (P̃(p) χ_κ(p̂), Q̃(p) χ_{−κ}(p̂))` with a
//! common phase, so that kinetic balance reads `Q̃ = −(p/2) P̃` per basis
//! function. Form factors are given in units of `α/4π`.

use crate::angular::KappaChannel;
use crate::basis::momentum_transform;
use crate::dirac::RadialSpectrum;
use crate::error::{Error, Result};
use crate::photon_pw::ReferenceState;
use crate::quadrature::{adaptive_integrate_log_split, gauss_legendre, KahanSum};
use crate::special::legendre_p;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Momentum-space radial functions of a bound state.
#[derive(Debug, Clone)]
pub struct MomentumWave {
    pub channel: KappaChannel,
    pub energy: f64,
    pub alpha: f64,
    pub z: f64,
    power: u32,
    /// `(c^P, c^Q, ζ̃, ln N)` per basis function.
    terms: Vec<(f64, f64, f64, f64)>,
    min_exponent: f64,
}

impl MomentumWave {
    pub fn from_reference(r: &ReferenceState) -> Self {
        let power = r.basis.large[0].power;
        let terms: Vec<_> = r
            .basis
            .large
            .iter()
            .zip(r.large.iter().zip(&r.small))
            .map(|(g, (&cp, &cq))| {
                let t = momentum_transform(g);
                (cp, cq, t.exponent, t.ln_norm)
            })
            .collect();
        let min_exponent = terms.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
        Self {
            channel: r.channel,
            energy: r.energy,
            alpha: r.basis.spec.alpha(),
            z: r.basis.spec.z,
            power,
            terms,
            min_exponent,
        }
    }

    pub fn from_spectrum(spectrum: &RadialSpectrum, index: usize) -> Result<Self> {
        Ok(Self::from_reference(&ReferenceState::from_spectrum(spectrum, index)?))
    }

    /// `(P̃(p), Q̃(p))`.
    pub fn eval(&self, p: f64) -> (f64, f64) {
        if p == 0.0 {
            return (0.0, 0.0);
        }
        let lp = p.ln() * self.power as f64;
        let p2 = p * p;
        let (mut a, mut b) = (0.0, 0.0);
        for &(cp, cq, z, ln_n) in &self.terms {
            let e = ln_n + lp - z * p2;
            if e < -745.0 {
                continue;
            }
            let g = e.exp();
            a += cp * g;
            b += cq * g;
        }
        (a, -0.5 * p * b)
    }

    /// Momentum beyond which every basis function is negligible.
    pub fn p_max(&self) -> f64 {
        (80.0 / self.min_exponent).sqrt()
    }

    /// `∫ (P̃² + Q̃²) dp`, analytic.
    pub fn norm(&self) -> f64 {
        let n = self.power as f64;
        let mut acc = KahanSum::default();
        for &(cpi, cqi, zi, li) in &self.terms {
            for &(cpj, cqj, zj, lj) in &self.terms {
                let a = zi + zj;
                let pp = (li + lj + crate::special::ln_gaussian_moment(2.0 * n, a)).exp();
                let qq = 0.25 * (li + lj + crate::special::ln_gaussian_moment(2.0 * n + 2.0, a)).exp();
                acc.add(cpi * cpj * pp + cqi * cqj * qq);
            }
        }
        acc.value()
    }
}

/// `Σ_R = mass·m + slash·p̸`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaFormFactors {
    pub mass: f64,
    pub slash: f64,
}

/// `γ⁰Γ⁰_R = scalar + beta·β + α·(c1 p₁ + c2 p₂) + spin·iΣ·(p₁×p₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexFormFactors {
    pub scalar: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub spin: f64,
}

/// Finite part convention shared by the self-energy and the vertex.
///
/// A nonzero `shift` adds `shift·(α/4π)(p̸ − m)` to `Σ_R` and
/// `−shift·(α/4π)γ⁰` to `Γ⁰_R`; physical sums are independent of it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Renormalization {
    pub shift: f64,
}

/// Point-nucleus Coulomb potential in momentum space, `−Zα/(2π²q²)`.
pub fn coulomb_momentum(q: f64, z: f64, alpha: f64) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Kinematics(format!("coulomb potential needs |q| > 0, got {q}")));
    }
    Ok(-z * alpha / (2.0 * PI * PI * q * q))
}

/// `ln ρ / (1 − ρ)` and `(1 + ρ ln ρ/(1 − ρ))/(1 − ρ)`, stable near `ρ = 1`.
fn rho_functions(rho: f64) -> (f64, f64) {
    let u = 1.0 - rho;
    if u.abs() < 0.05 {
        let mut l = 0.0;
        let mut h = 0.0;
        let mut un = 1.0;
        for n in 1..40 {
            let nf = n as f64;
            l -= un / nf;
            h += un / (nf * (nf + 1.0));
            un *= u;
        }
        (l, h)
    } else {
        let l = rho.ln() / u;
        (l, (1.0 + rho * l) / u)
    }
}

/// Renormalized free self-energy at four-momentum `(E, |p|)`, `m = 1`.
pub fn sigma_r(e: f64, p: f64, scheme: Renormalization) -> Result<SigmaFormFactors> {
    let rho = 1.0 - e * e + p * p;
    if !(rho > 0.0) || !e.is_finite() || !p.is_finite() {
        return Err(Error::Kinematics(format!("self-energy needs p² < m² (E = {e}, |p| = {p})")));
    }
    let (l, h) = rho_functions(rho);
    Ok(SigmaFormFactors { mass: 2.0 * (1.0 + 2.0 * rho * l) - scheme.shift, slash: -(2.0 - rho) * h + scheme.shift })
}

/// `∫₀¹ sⁿ/(1 + r s) ds` for `n = 0, 1, 2`, `r > −1`.
fn j_moments(r: f64) -> [f64; 3] {
    if r.abs() < 0.5 {
        let mut out = [0.0; 3];
        let mut rk = 1.0;
        for k in 0..80 {
            for (n, o) in out.iter_mut().enumerate() {
                *o += rk / (n + k + 1) as f64;
            }
            rk *= -r;
            if rk.abs() < 1e-18 {
                break;
            }
        }
        out
    } else {
        let j0 = r.ln_1p() / r;
        let j1 = (1.0 - j0) / r;
        let j2 = (0.5 - j1) / r;
        [j0, j1, j2]
    }
}

/// Nodes and weights of a graded rule on `[0, 1]`, refined geometrically
/// toward both ends down to relative scales `1/r0` and `1/r1`.
fn graded_unit_rule(r0: f64, r1: f64, gl: &(Vec<f64>, Vec<f64>), out: &mut Vec<(f64, f64)>) {
    out.clear();
    let levels = |r: f64| (r.max(1.0).log2().ceil() as usize + 2).min(60);
    let mut push_panel = |a: f64, b: f64| {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        for (x, w) in gl.0.iter().zip(&gl.1) {
            out.push((c + h * x, h * w));
        }
    };
    let m0 = levels(r0);
    let mut hi = 0.5;
    for _ in 0..m0 {
        let lo = 0.5 * hi;
        push_panel(lo, hi);
        hi = lo;
    }
    push_panel(0.0, hi);
    let m1 = levels(r1);
    let mut lo = 0.5;
    for _ in 0..m1 {
        let hi = 1.0 - 0.5 * (1.0 - lo);
        push_panel(lo, hi);
        lo = hi;
    }
    push_panel(lo, 1.0);
}

thread_local! {
    static U_RULE: std::cell::RefCell<Vec<(f64, f64)>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// Feynman-parameter integrals of the one-loop vertex, without the `α/4π` factor.
fn vertex_raw(e: f64, n1: f64, n2: f64, p12: f64, gl: &(Vec<f64>, Vec<f64>)) -> VertexFormFactors {
    let e2 = e * e;
    let q2 = (n1 + n2 - 2.0 * p12).max(0.0);
    // 1 − p_i² with four-vector squares p_i² = E² − |p_i|².
    let a0 = 1.0 - e2 + n2;
    let a1 = 1.0 - e2 + n1;
    let r0 = ((a1 - a0).abs() / a0).max(q2);
    let r1 = ((a0 - a1).abs() / a1).max(q2);
    U_RULE.with(|rule| {
        let mut rule = rule.borrow_mut();
        graded_unit_rule(r0, r1, gl, &mut rule);
        let (mut lsum, mut gs, mut x, mut c1, mut c2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(u, w) in rule.iter() {
            let v = 1.0 - u;
            let alpha = a0 + (a1 - a0) * u;
            let end = 1.0 + u * v * q2;
            let r = end / alpha - 1.0;
            let [j0, j1, j2] = j_moments(r);
            let k = 0.5 * r.ln_1p() - 0.5 * r * j2;
            lsum += w * (-0.25 + 0.5 * alpha.ln() + k);
            // 2E²(1−s)² + 2 A·B + 2, as a polynomial in s.
            let g0 = 2.0 * e2 + 2.0 * p12 + 2.0;
            let g1 = -4.0 * e2 - 2.0 * (p12 + u * n1 + v * n2);
            let g2 = 2.0 * e2 + 2.0 * (2.0 * u * v * p12 + u * u * n1 + v * v * n2);
            let ia = 1.0 / alpha;
            gs += w * ia * (g0 * j0 + g1 * j1 + g2 * j2);
            x += w * ia * (j0 - j1);
            c1 += w * ia * (j0 - (1.0 + 2.0 * u) * j1 + 2.0 * u * j2);
            c2 += w * ia * (j0 - (1.0 + 2.0 * v) * j1 + 2.0 * v * j2);
        }
        VertexFormFactors {
            scalar: -2.0 - 2.0 * lsum + gs,
            beta: -8.0 * e * x,
            c1: -2.0 * e * c1,
            c2: -2.0 * e * c2,
            spin: 2.0 * x,
        }
    })
}

const U_NODES: usize = 8;

/// Temporal component of the renormalized vertex for equal energies `E` on both legs.
pub fn gamma_r0(e: f64, p1: f64, p2: f64, cos12: f64, scheme: Renormalization) -> Result<VertexFormFactors> {
    if !(e.abs() < 1.0) || !(p1 >= 0.0) || !(p2 >= 0.0) || !(cos12.abs() <= 1.0) {
        return Err(Error::Kinematics(format!(
            "vertex needs |E| < m and real momenta (E = {e}, p1 = {p1}, p2 = {p2}, cos = {cos12})"
        )));
    }
    let gl = gauss_legendre(U_NODES);
    let mut v = vertex_raw(e, p1 * p1, p2 * p2, p1 * p2 * cos12, &gl);
    v.scalar -= scheme.shift;
    Ok(v)
}

/// Zero-potential term `∫ d³p ψ̄ Σ_R ψ`, in units of mc².
pub fn zero_potential_term(wave: &MomentumWave, scheme: Renormalization) -> Result<f64> {
    let e = wave.energy;
    let c = wave.alpha / (4.0 * PI);
    let f = |p: f64| {
        let (a, b) = wave.eval(p);
        match sigma_r(e, p, scheme) {
            Ok(s) => s.mass * (a * a - b * b) + s.slash * (e * (a * a + b * b) + 2.0 * p * a * b),
            Err(_) => f64::NAN,
        }
    };
    let v = adaptive_integrate_log_split(f, 1e-9, wave.p_max(), 2, 1e-12)?;
    if !v.is_finite() {
        return Err(Error::Quadrature("zero-potential integrand is not finite".into()));
    }
    Ok(c * v)
}

/// Outer quadrature layout of the one-potential term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnePotentialGrid {
    /// Gauss–Legendre nodes per decade in `|p₁|` and in `|q|`.
    pub nodes_per_decade: usize,
    /// Lowest momentum resolved by the logarithmic panels.
    pub p_min: f64,
    pub cos_nodes: usize,
}

impl Default for OnePotentialGrid {
    fn default() -> Self {
        Self { nodes_per_decade: 16, p_min: 1e-5, cos_nodes: 16 }
    }
}

impl OnePotentialGrid {
    pub fn refined(&self) -> Self {
        Self { nodes_per_decade: 2 * self.nodes_per_decade, p_min: self.p_min, cos_nodes: 2 * self.cos_nodes }
    }
}

fn radial_nodes(p_min: f64, p_max: f64, per_decade: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (x, w) = gauss_legendre(4);
    for (t, wt) in x.iter().zip(&w) {
        out.push((0.5 * p_min * (t + 1.0), 0.5 * p_min * wt));
    }
    out.extend(log_nodes(p_min, p_max, per_decade));
    out
}

/// Gauss–Legendre in `ln k`, one panel per decade from `lo` until `hi` is covered.
fn log_nodes(lo: f64, hi: f64, per_decade: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = lo;
    let (x, w) = gauss_legendre(per_decade);
    while lo < hi {
        let top = lo * 10.0;
        let (a, b) = (lo.ln(), top.ln());
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        for (t, wt) in x.iter().zip(&w) {
            let k = (c + h * t).exp();
            out.push((k, h * wt * k));
        }
        lo = top;
    }
    out
}

/// Which operator is sandwiched in the one-potential integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnePotentialOperator {
    /// The renormalized vertex.
    Vertex,
    /// `γ⁰`, giving the plain Coulomb expectation value.
    Coulomb,
}

/// One-potential term `∫∫ ψ̄(p₂) Γ⁰_R V(|p₂ − p₁|) ψ(p₁)`, in units of mc².
pub fn one_potential_term(wave: &MomentumWave, z: f64, scheme: Renormalization, grid: &OnePotentialGrid) -> Result<f64> {
    one_potential_integral(wave, z, scheme, grid, OnePotentialOperator::Vertex)
}

pub fn one_potential_integral(
    wave: &MomentumWave,
    z: f64,
    scheme: Renormalization,
    grid: &OnePotentialGrid,
    op: OnePotentialOperator,
) -> Result<f64> {
    let e = wave.energy;
    if !(e.abs() < 1.0) {
        return Err(Error::Kinematics(format!("reference energy {e} is not bound")));
    }
    let l = wave.channel.ell;
    let lb = wave.channel.ell_bar;
    let p_max = wave.p_max();
    let pn = radial_nodes(grid.p_min, p_max, grid.nodes_per_decade);
    let (cx, cw) = gauss_legendre(grid.cos_nodes);
    let inner = gauss_legendre(grid.nodes_per_decade);
    let gl = gauss_legendre(U_NODES);
    let wave_at: Vec<(f64, f64)> = pn.iter().map(|&(p, _)| wave.eval(p)).collect();
    let scale = wave_at
        .iter()
        .zip(&pn)
        .map(|(&(a, b), &(p, _))| (a.abs() + b.abs()) * p)
        .fold(0.0, f64::max);
    let cutoff = 1e-18 * scale;
    let pref = wave.alpha / (4.0 * PI);

    let rows: Vec<f64> = pn
        .par_iter()
        .zip(&wave_at)
        .map(|(&(p1, w1), &(pa1, qa1))| {
            if (pa1.abs() + qa1.abs()) * p1 < cutoff {
                return 0.0;
            }
            // Only |p₂| ≥ |p₁| is sampled; the integrand is symmetric under
            // p₁ ↔ p₂. For q < 2|p₁| this bounds cos χ from below.
            let mut qn: Vec<(f64, f64)> = inner
                .0
                .iter()
                .zip(&inner.1)
                .map(|(t, w)| (p1 * (t + 1.0), p1 * w))
                .collect();
            qn.extend(log_nodes(2.0 * p1, 2.0 * p_max, grid.nodes_per_decade));
            let mut acc = KahanSum::default();
            for &(q, wq) in &qn {
                let c_lo = if q < 2.0 * p1 { -q / (2.0 * p1) } else { -1.0 };
                let hc = 0.5 * (1.0 - c_lo);
                for (xc, wc0) in cx.iter().zip(&cw) {
                    let c = c_lo + hc * (xc + 1.0);
                    let wc = hc * wc0;
                    let n2 = (p1 * p1 + q * q + 2.0 * p1 * q * c).max(0.0);
                    let p2 = n2.sqrt();
                    if p2 == 0.0 {
                        continue;
                    }
                    let (pa2, qa2) = wave.eval(p2);
                    if (pa2.abs() + qa2.abs()) * p2 < cutoff {
                        continue;
                    }
                    let p12 = p1 * p1 + p1 * q * c;
                    let t = (p12 / (p1 * p2)).clamp(-1.0, 1.0);
                    let (pl, plb) = (legendre_p(l, t), legendre_p(lb, t));
                    let phi = match op {
                        OnePotentialOperator::Coulomb => pa2 * pa1 * pl + qa2 * qa1 * plb,
                        OnePotentialOperator::Vertex => {
                            let raw = vertex_raw(e, p1 * p1, n2, p12, &gl);
                            let s = pref * (raw.scalar - scheme.shift);
                            let b = pref * raw.beta;
                            let c1 = pref * raw.c1;
                            let c2 = pref * raw.c2;
                            let sp = pref * raw.spin;
                            (s + b) * pa2 * pa1 * pl + (s - b) * qa2 * qa1 * plb
                                - (pa2 * qa1 * (c1 * p1 * pl + c2 * p2 * plb) + qa2 * pa1 * (c1 * p1 * plb + c2 * p2 * pl))
                                + sp * p1 * p2 * (pa2 * pa1 * (t * pl - plb) + qa2 * qa1 * (t * plb - pl))
                        }
                    };
                    acc.add(wq * wc * phi / p2);
                }
            }
            w1 * p1 * acc.value()
        })
        .collect();
    let mut total = KahanSum::default();
    for r in rows {
        total.add(r);
    }
    let v = -2.0 * (z * wave.alpha / PI) * total.value();
    if !v.is_finite() {
        return Err(Error::Quadrature("one-potential integrand is not finite".into()));
    }
    Ok(v)
}
