//! Per-κ many-potential differences, partial-wave tail and F(Zα) units.

use crate::error::{Error, Result};
use crate::greens::SpectralFamily;
use crate::photon_pw::{PartialWaveEngine, ReferenceState};
use crate::quadrature::QuadratureGrid;
use crate::special::hurwitz_zeta;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// `F = ΔE·π·n³ / (α (Zα)⁴)` with `ΔE` in units of mc².
pub fn to_f_units(de: f64, z: f64, n: u32, alpha_inv: f64) -> f64 {
    de / f_unit(z, n, alpha_inv)
}

pub fn from_f_units(f: f64, z: f64, n: u32, alpha_inv: f64) -> f64 {
    f * f_unit(z, n, alpha_inv)
}

/// Energy in mc² corresponding to `F = 1`.
pub fn f_unit(z: f64, n: u32, alpha_inv: f64) -> f64 {
    let alpha = 1.0 / alpha_inv;
    alpha / std::f64::consts::PI * (z * alpha).powi(4) / (n as f64).powi(3)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub grid_nodes: usize,
    /// Largest relative change of a family term under node doubling, if checked.
    pub refinement_change: Option<f64>,
    /// Relative change of the one-potential value under step halving.
    pub derivative_change: f64,
}

/// The three family terms of one κ and their difference, in F units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialWaveResult {
    pub kappa: i32,
    pub e_bound: f64,
    pub e_zero: f64,
    pub e_one: f64,
    pub e_mp: f64,
    pub diagnostics: Diagnostics,
}

impl PartialWaveResult {
    pub fn new(kappa: i32, e_bound: f64, e_zero: f64, e_one: f64) -> Self {
        Self { kappa, e_bound, e_zero, e_one, e_mp: e_bound - e_zero - e_one, diagnostics: Diagnostics::default() }
    }
}

pub struct Families<'a> {
    pub bound: &'a SpectralFamily,
    pub free: &'a SpectralFamily,
    pub one: &'a SpectralFamily,
}

/// Bound, zero- and one-potential terms for one κ evaluated on a shared
/// kernel table. With `refine_tol` set the grid is doubled once and the
/// largest relative change must stay below it.
pub fn many_potential_kappa(
    reference: &ReferenceState,
    kappa: i32,
    families: &Families<'_>,
    grid: &QuadratureGrid,
    refine_tol: Option<f64>,
) -> Result<PartialWaveResult> {
    let b = families.bound.get(kappa)?;
    let f = families.free.get(kappa)?;
    let o = families.one.get(kappa)?;
    let engine = PartialWaveEngine::new(reference.clone(), &b.members[0].spec)?;
    let eval = |g: &QuadratureGrid| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut all = vec![&b.members[0], &f.members[0]];
        all.extend(o.members.iter());
        let v = engine.terms(g, &all)?;
        Ok((v[..2].to_vec(), v[2..].to_vec()))
    };
    let (bf, ov) = eval(grid)?;
    let spec = &reference.basis.spec;
    let fu = |x: f64| to_f_units(x, spec.z, 1, spec.alpha_inv);
    let one = o.combine(&ov)?;
    let (r, rh) = o.richardson(&ov);
    let mut res = PartialWaveResult::new(kappa, fu(bf[0]), fu(bf[1]), fu(one));
    res.diagnostics.grid_nodes = grid.len();
    res.diagnostics.derivative_change = (r - rh).abs() / r.abs().max(f64::MIN_POSITIVE);
    if let Some(tol) = refine_tol {
        let fine = grid.refined(2)?;
        let (bf2, ov2) = eval(&fine)?;
        let one2 = o.combine(&ov2)?;
        let rel = |a: f64, c: f64| (a - c).abs() / c.abs().max(f64::MIN_POSITIVE);
        let change = rel(bf[0], bf2[0]).max(rel(bf[1], bf2[1])).max(rel(one, one2));
        res.diagnostics.refinement_change = Some(change);
        if change > tol {
            return Err(Error::Quadrature(format!(
                "kappa {kappa}: node doubling changed a term by {change:.3e} (tolerance {tol:.1e})"
            )));
        }
    }
    Ok(res)
}

/// One extrapolation scheme: inverse powers of |κ| and the number of trailing points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailScheme {
    pub powers: Vec<i32>,
    pub points: usize,
}

impl TailScheme {
    pub fn new(powers: &[i32], points: usize) -> Self {
        Self { powers: powers.to_vec(), points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    pub primary: TailScheme,
    pub variants: Vec<TailScheme>,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            primary: TailScheme::new(&[3, 4], 6),
            variants: vec![TailScheme::new(&[3], 6), TailScheme::new(&[3, 4, 5], 6), TailScheme::new(&[3, 4], 5)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub tail: f64,
    pub uncertainty: f64,
}

/// `s(|κ|) = e_mp(−|κ|) + e_mp(+|κ|)` for `|κ| = 1..=kappa_max`.
pub fn kappa_pair_sums(results: &[PartialWaveResult], kappa_max: u32) -> Result<Vec<f64>> {
    (1..=kappa_max as i32)
        .map(|k| {
            let find = |kk: i32| {
                results
                    .iter()
                    .find(|r| r.kappa == kk)
                    .map(|r| r.e_mp)
                    .ok_or_else(|| Error::Extrapolation(format!("missing result for kappa {kk}")))
            };
            Ok(find(-k)? + find(k)?)
        })
        .collect()
}

/// Least-squares coefficients of `Σ c_p |κ|^{-p}` over the last `points` values of `s`.
fn fit(s: &[f64], scheme: &TailScheme) -> Result<Vec<f64>> {
    let n = s.len();
    let pts = scheme.points.min(n);
    if pts < 4 || pts < scheme.powers.len() {
        return Err(Error::Extrapolation(format!(
            "{pts} points cannot support a {}-term fit",
            scheme.powers.len()
        )));
    }
    let first = n - pts;
    let a = DMatrix::from_fn(pts, scheme.powers.len(), |i, j| ((first + i + 1) as f64).powi(-scheme.powers[j]));
    let b = DVector::from_column_slice(&s[first..]);
    let svd = a.svd(true, true);
    let x = svd.solve(&b, 1e-14).map_err(|e| Error::Extrapolation(e.to_string()))?;
    Ok(x.iter().copied().collect())
}

fn tail_of(s: &[f64], kappa_max: u32, scheme: &TailScheme) -> Result<f64> {
    let c = fit(s, scheme)?;
    Ok(c.iter()
        .zip(&scheme.powers)
        .map(|(ci, &p)| ci * hurwitz_zeta(p as f64, kappa_max as f64 + 1.0))
        .sum())
}

/// Remainder `Σ_{|κ| > kappa_max} s(|κ|)` from the fitted model, with the
/// largest deviation among the variant schemes as uncertainty.
pub fn extrapolate_tail(results: &[PartialWaveResult], kappa_max: u32, cfg: &TailConfig) -> Result<TailEstimate> {
    let s = kappa_pair_sums(results, kappa_max)?;
    extrapolate_pair_sums(&s, cfg)
}

pub fn extrapolate_pair_sums(s: &[f64], cfg: &TailConfig) -> Result<TailEstimate> {
    let kappa_max = s.len() as u32;
    let tail = tail_of(s, kappa_max, &cfg.primary)?;
    let mut uncertainty = 0.0_f64;
    for v in &cfg.variants {
        uncertainty = uncertainty.max((tail_of(s, kappa_max, v)? - tail).abs());
    }
    Ok(TailEstimate { tail, uncertainty })
}

/// Value with a one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uncertain {
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyReport {
    pub per_kappa: Vec<PartialWaveResult>,
    pub kappa_max: u32,
    pub tail: Uncertain,
    pub e_mp_total: Uncertain,
    pub e0_r: f64,
    pub e1_r: f64,
    pub f_total: Uncertain,
    pub fingerprint: String,
}

/// `x` rounded to `digits` significant digits, positional unless very large or small.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-6..=15).contains(&exp) {
        format!("{:.*}", (digits as i32 - 1 - exp).max(0) as usize, x)
    } else {
        sci
    }
}

impl SelfEnergyReport {
    /// `basis_sigma` is added in quadrature to the extrapolation spread.
    pub fn assemble(
        mut per_kappa: Vec<PartialWaveResult>,
        kappa_max: u32,
        e0_r: f64,
        e1_r: f64,
        basis_sigma: f64,
        cfg: &TailConfig,
        fingerprint: String,
    ) -> Result<Self> {
        per_kappa.sort_by_key(|r| (r.kappa.unsigned_abs(), r.kappa > 0));
        let t = extrapolate_tail(&per_kappa, kappa_max, cfg)?;
        let partial: f64 = per_kappa
            .iter()
            .filter(|r| r.kappa.unsigned_abs() <= kappa_max)
            .map(|r| r.e_mp)
            .sum();
        let sigma = t.uncertainty.hypot(basis_sigma);
        let e_mp_total = Uncertain { value: partial + t.tail, sigma };
        Ok(Self {
            per_kappa,
            kappa_max,
            tail: Uncertain { value: t.tail, sigma: t.uncertainty },
            e_mp_total,
            e0_r,
            e1_r,
            f_total: Uncertain { value: e0_r + e1_r + e_mp_total.value, sigma },
            fingerprint,
        })
    }

    /// `x` rounded to `digits` significant digits, positional unless very large or small.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-6..=15).contains(&exp) {
        format!("{:.*}", (digits as i32 - 1 - exp).max(0) as usize, x)
    } else {
        sci
    }
}

/// Fixed-column CSV: `kappa,e_bound,e_zero,e_one,e_mp`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kappa,e_bound,e_zero,e_one,e_mp\n");
        for r in &self.per_kappa {
            let f = |x: f64| format_significant(x, 10);
            out.push_str(&format!("{},{},{},{},{}\n", r.kappa, f(r.e_bound), f(r.e_zero), f(r.e_one), f(r.e_mp)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64, kmax: i32) -> Vec<PartialWaveResult> {
        (1..=kmax)
            .flat_map(|k| [-k, k])
            .map(|k| PartialWaveResult::new(k, 0.5 * f(k.abs() as f64), 0.0, 0.0))
            .collect()
    }

    #[test]
    fn zero_input_gives_zero_tail() {
        let r = synthetic(|_| 0.0, 15);
        let t = extrapolate_tail(&r, 15, &TailConfig::default()).unwrap();
        assert_eq!(t.tail, 0.0);
        assert_eq!(t.uncertainty, 0.0);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let r = synthetic(|k| k.powi(-3), 3);
        assert!(matches!(extrapolate_tail(&r, 3, &TailConfig::default()), Err(Error::Extrapolation(_))));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(1.5113165812, 10), "1.511316581");
        assert_eq!(format_significant(-0.000032421234567, 10), "-0.00003242123457");
        assert_eq!(format_significant(9.99999999996, 10), "10.00000000");
        assert_eq!(format_significant(123456.0, 3), "123456");
        assert_eq!(format_significant(2.5e-9, 4), "2.500e-9");
        assert_eq!(format_significant(0.0, 10), "0");
    }

    #[test]
    fn f_unit_round_trip() {
        assert_eq!(to_f_units(0.0, 92.0, 1, 137.0359895), 0.0);
        let x = 1.4908;
        let y = to_f_units(from_f_units(x, 92.0, 1, 137.0359895), 92.0, 1, 137.0359895);
        assert!((x - y).abs() < 1e-14);
    }
}
