//! Even-tempered Gaussian radial basis with restricted kinetic balance.
//!
//! All quantities are in natural relativistic units (ħ = c = m = 1):
//! lengths in reduced Compton wavelengths, exponents in inverse squared lengths.

use crate::angular::kappa_to_channel;
use crate::error::{Error, Result};
use crate::special::{
    hyp1f1_neg_asymptotic, hyp1f1_neg_kummer, ln_gamma, ln_gaussian_moment, terminating_hyp1f1_coeffs,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Parameters of one radial basis (one `κ`, one nuclear charge).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub kappa: i32,
    /// Smallest exponent in natural units.
    pub zeta1: f64,
    pub beta_ratio: f64,
    pub n_b: usize,
    pub z: f64,
    pub alpha_inv: f64,
}

impl BasisSpec {
    /// Build a spec from a smallest exponent given in Bohr⁻².
    pub fn from_bohr(kappa: i32, zeta1_bohr: f64, beta_ratio: f64, n_b: usize, z: f64, alpha_inv: f64) -> Self {
        let alpha = 1.0 / alpha_inv;
        Self { kappa, zeta1: zeta1_bohr * alpha * alpha, beta_ratio, n_b, z, alpha_inv }
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.alpha_inv
    }

    pub fn with_kappa(&self, kappa: i32) -> Self {
        Self { kappa, ..*self }
    }

    pub fn with_charge(&self, z: f64) -> Self {
        Self { z, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        kappa_to_channel(self.kappa)?;
        if !(self.zeta1 > 0.0) || !self.zeta1.is_finite() {
            return Err(Error::InvalidBasis(format!("zeta1 must be positive, got {}", self.zeta1)));
        }
        if !(self.beta_ratio > 1.0) || !self.beta_ratio.is_finite() {
            return Err(Error::InvalidBasis(format!("beta must exceed 1, got {}", self.beta_ratio)));
        }
        if self.n_b < 2 {
            return Err(Error::InvalidBasis(format!("n_b must be at least 2, got {}", self.n_b)));
        }
        if !(self.alpha_inv > 0.0) {
            return Err(Error::InvalidBasis("alpha_inv must be positive".into()));
        }
        if !self.z.is_finite() {
            return Err(Error::InvalidBasis("nuclear charge must be finite".into()));
        }
        Ok(())
    }

    pub fn exponents(&self) -> Vec<f64> {
        (0..self.n_b).map(|i| self.zeta1 * self.beta_ratio.powi(i as i32)).collect()
    }
}

/// Power of `r` multiplying the large-component Gaussian, `|κ+1/2| + 1/2`.
pub fn large_power(kappa: i32) -> u32 {
    if kappa < 0 {
        kappa.unsigned_abs()
    } else {
        kappa as u32 + 1
    }
}

/// `e^{ln_scale} Σ_t c_t r^{n_t} e^{-ζ r²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianExpansion {
    pub exponent: f64,
    pub ln_scale: f64,
    pub terms: Vec<(f64, u32)>,
}

impl GaussianExpansion {
    pub fn eval(&self, r: f64) -> f64 {
        let s: f64 = self.terms.iter().map(|&(c, n)| c * r.powi(n as i32)).sum();
        s * (self.ln_scale - self.exponent * r * r).exp()
    }

    /// `∫₀^∞ f g r^shift dr`.
    pub fn integral_with(&self, other: &GaussianExpansion, shift: i32) -> Result<f64> {
        let a = self.exponent + other.exponent;
        let mut acc = 0.0;
        for &(c1, n1) in &self.terms {
            for &(c2, n2) in &other.terms {
                let n = n1 as i32 + n2 as i32 + shift;
                if n <= -1 {
                    return Err(Error::DivergentIntegral { power: n1 as i32 + n2 as i32, shift });
                }
                let c = c1 * c2;
                if c == 0.0 {
                    continue;
                }
                let l = self.ln_scale + other.ln_scale + c.abs().ln() + ln_gaussian_moment(n as f64, a);
                acc += c.signum() * l.exp();
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        self.integral_with(self, 0).expect("finite for r-powers >= 0")
    }
}

/// Normalised large-component function `𝒩 r^p e^{-ζ r²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBasisFunction {
    pub exponent: f64,
    pub power: u32,
    pub ln_norm: f64,
}

impl RadialBasisFunction {
    pub fn new(exponent: f64, power: u32) -> Self {
        Self { exponent, power, ln_norm: ln_normalization(power, exponent) }
    }

    pub fn norm(&self) -> f64 {
        self.ln_norm.exp()
    }

    pub fn expansion(&self) -> GaussianExpansion {
        GaussianExpansion { exponent: self.exponent, ln_scale: self.ln_norm, terms: vec![(1.0, self.power)] }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.expansion().eval(r)
    }
}

/// `ln 𝒩` with `𝒩⁻² = ∫ r^{2p} e^{-2ζ r²} dr`.
pub fn ln_normalization(power: u32, exponent: f64) -> f64 {
    -0.5 * ln_gaussian_moment(2.0 * power as f64, 2.0 * exponent)
}

pub fn build_basis(spec: &BasisSpec) -> Result<Vec<RadialBasisFunction>> {
    spec.validate()?;
    let p = large_power(spec.kappa);
    Ok(spec.exponents().into_iter().map(|z| RadialBasisFunction::new(z, p)).collect())
}

/// `g^Q = (1/2)(d/dr + κ/r) g^P` in natural units (not renormalised).
pub fn rkb_small_component(g: &RadialBasisFunction, kappa: i32) -> GaussianExpansion {
    let p = g.power as i32;
    let mut terms = Vec::with_capacity(2);
    let lead = 0.5 * (p + kappa) as f64;
    if lead != 0.0 {
        terms.push((lead, (p - 1) as u32));
    }
    terms.push((-g.exponent, (p + 1) as u32));
    GaussianExpansion { exponent: g.exponent, ln_scale: g.ln_norm, terms }
}

/// Analytic momentum-space image of a large-component function:
/// the same power of `p` with exponent `1/(4ζ)`, unit normalised.
pub fn momentum_transform(g: &RadialBasisFunction) -> RadialBasisFunction {
    RadialBasisFunction::new(1.0 / (4.0 * g.exponent), g.power)
}

/// Momentum-space small component `Q̃ = -(p/2) g̃^P` obtained from kinetic balance.
pub fn momentum_small_component(g: &RadialBasisFunction) -> GaussianExpansion {
    let t = momentum_transform(g);
    GaussianExpansion { exponent: t.exponent, ln_scale: t.ln_norm, terms: vec![(-0.5, t.power + 1)] }
}

/// Analytic `⟨g_i | r^{-1} | g_j⟩` between two Gaussian expansions.
pub fn coulomb_matrix_element(f: &GaussianExpansion, g: &GaussianExpansion) -> Result<f64> {
    f.integral_with(g, -1)
}

/// Logarithmic prefactor of the closed form of `∫ r^n e^{-a r²} j_L(k r) dr`, without `k^L`.
fn ln_bessel_prefactor(n: f64, l: u32, a: f64) -> f64 {
    let lf = l as f64;
    let h = 0.5 * (n + lf + 1.0);
    0.5 * PI.ln() - (lf + 2.0) * LN_2 + ln_gamma(h) - ln_gamma(lf + 1.5) - h * a.ln()
}

fn check_bessel_args(n: f64, l: u32, a: f64, k: f64) -> Result<()> {
    if !(a > 0.0) || !(k >= 0.0) {
        return Err(Error::InvalidInput(format!("bessel moment needs a > 0, k >= 0 (a={a}, k={k})")));
    }
    if !(n + 1.0 > l as f64) {
        return Err(Error::DivergentIntegral { power: n as i32, shift: -(l as i32) });
    }
    Ok(())
}

/// Terminating order `m` when `M((n+L+1)/2; L+3/2; ·)` reduces to `e^{-x}` times a polynomial.
fn terminating_order(n: f64, l: u32) -> Option<u32> {
    let d = n - l as f64 - 2.0;
    if d >= 0.0 && d.fract() == 0.0 && (d as u64) % 2 == 0 {
        Some((d as u32) / 2)
    } else {
        None
    }
}

/// Closed form of `∫₀^∞ r^n e^{-a r²} j_L(k r) dr` through the confluent
/// hypergeometric representation. Fails with [`Error::PrecisionLoss`] for
/// non-terminating cases with `k²/(4a)` beyond the stable range.
pub fn bessel_moment_closed_form(n: f64, l: u32, a: f64, k: f64) -> Result<f64> {
    check_bessel_args(n, l, a, k)?;
    if k == 0.0 {
        return Ok(if l == 0 { (ln_gaussian_moment(n, a)).exp() } else { 0.0 });
    }
    let x = k * k / (4.0 * a);
    let b = l as f64 + 1.5;
    let ln_pref = ln_bessel_prefactor(n, l, a) + l as f64 * k.ln();
    if let Some(m) = terminating_order(n, l) {
        let c = terminating_hyp1f1_coeffs(m, b);
        let poly = c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
        return Ok(poly * (ln_pref - x).exp());
    }
    let h = 0.5 * (n + l as f64 + 1.0);
    let m = hyp1f1_neg_kummer(h, b, x)?;
    Ok(m * ln_pref.exp())
}

/// `∫₀^∞ r^n e^{-a r²} j_L(k r) dr`, switching to the large-argument expansion
/// when the closed form leaves its stable range.
pub fn bessel_moment_integral(n: f64, l: u32, a: f64, k: f64) -> Result<f64> {
    match bessel_moment_closed_form(n, l, a, k) {
        Err(Error::PrecisionLoss { x }) => {
            let h = 0.5 * (n + l as f64 + 1.0);
            let b = l as f64 + 1.5;
            let ln_pref = ln_bessel_prefactor(n, l, a) + l as f64 * k.ln();
            Ok(hyp1f1_neg_asymptotic(h, b, x) * ln_pref.exp())
        }
        other => other,
    }
}

/// One term of a precomputed Bessel-moment kernel.
#[derive(Debug, Clone)]
struct KernelTerm {
    sign: f64,
    ln_pref: f64,
    poly: Vec<f64>,
}

/// `∫ f(r) g(r) j_L(k r) dr` for two fixed Gaussian expansions, precomputed so
/// that evaluation at many `k` costs one exponential per term.
#[derive(Debug, Clone)]
pub struct BesselMomentKernel {
    l: u32,
    inv_4a: f64,
    terms: Vec<KernelTerm>,
    generic: Vec<(f64, f64)>,
    a: f64,
}

impl BesselMomentKernel {
    pub fn new(f: &GaussianExpansion, g: &GaussianExpansion, l: u32) -> Result<Self> {
        let a = f.exponent + g.exponent;
        let b = l as f64 + 1.5;
        let mut terms = Vec::new();
        let mut generic = Vec::new();
        for &(c1, n1) in &f.terms {
            for &(c2, n2) in &g.terms {
                let c = c1 * c2;
                if c == 0.0 {
                    continue;
                }
                let n = (n1 + n2) as f64;
                check_bessel_args(n, l, a, 0.0)?;
                let ln_c = f.ln_scale + g.ln_scale + c.abs().ln();
                match terminating_order(n, l) {
                    Some(m) => terms.push(KernelTerm {
                        sign: c.signum(),
                        ln_pref: ln_c + ln_bessel_prefactor(n, l, a),
                        poly: terminating_hyp1f1_coeffs(m, b),
                    }),
                    None => generic.push((c.signum() * ln_c.exp(), n)),
                }
            }
        }
        Ok(Self { l, inv_4a: 0.25 / a, terms, generic, a })
    }

    pub fn eval(&self, k: f64) -> Result<f64> {
        if k == 0.0 {
            if self.l != 0 {
                return Ok(0.0);
            }
            let mut s = 0.0;
            for t in &self.terms {
                s += t.sign * (t.ln_pref).exp() * t.poly[0];
            }
            for &(c, n) in &self.generic {
                s += c * bessel_moment_integral(n, 0, self.a, 0.0)?;
            }
            return Ok(s);
        }
        let x = k * k * self.inv_4a;
        let lk = self.l as f64 * k.ln() - x;
        let mut s = 0.0;
        for t in &self.terms {
            let e = t.ln_pref + lk;
            if e < -745.0 {
                continue;
            }
            let poly = t.poly.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
            s += t.sign * poly * e.exp();
        }
        for &(c, n) in &self.generic {
            s += c * bessel_moment_integral(n, self.l, self.a, k)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_exponents() {
        let spec = BasisSpec { kappa: -1, zeta1: 0.01, beta_ratio: 1.5, n_b: 3, z: 1.0, alpha_inv: 137.0 };
        let e = spec.exponents();
        assert!((e[0] - 0.01).abs() < 1e-16 && (e[1] - 0.015).abs() < 1e-16 && (e[2] - 0.0225).abs() < 1e-16);
        let b = build_basis(&spec).unwrap();
        assert!(b.iter().all(|g| g.power == 1));
    }

    #[test]
    fn rejects_bad_specs() {
        let good = BasisSpec { kappa: -1, zeta1: 0.01, beta_ratio: 1.5, n_b: 3, z: 1.0, alpha_inv: 137.0 };
        assert!(build_basis(&BasisSpec { beta_ratio: 1.0, ..good }).is_err());
        assert!(build_basis(&BasisSpec { zeta1: 0.0, ..good }).is_err());
        assert!(build_basis(&BasisSpec { n_b: 1, ..good }).is_err());
        assert!(build_basis(&BasisSpec { kappa: 0, ..good }).is_err());
    }

    #[test]
    fn normalization_kappa_minus_one() {
        let g = RadialBasisFunction::new(1.0, large_power(-1));
        let expected = (0.25 * (PI / 8.0).sqrt()).powf(-0.5);
        assert!((g.norm() - expected).abs() < 1e-13);
        assert!((g.norm() - 2.5264).abs() < 1e-4);
    }

    #[test]
    fn small_component_forms() {
        let g = RadialBasisFunction::new(0.7, large_power(-1));
        let q = rkb_small_component(&g, -1);
        assert_eq!(q.terms, vec![(-0.7, 2)]);
        let g = RadialBasisFunction::new(0.7, large_power(1));
        let q = rkb_small_component(&g, 1);
        assert_eq!(q.terms, vec![(1.5, 1), (-0.7, 3)]);
        assert!(q.norm_sq() > 0.0);
    }

    #[test]
    fn self_dual_exponent() {
        let g = RadialBasisFunction::new(0.5, 1);
        assert!((momentum_transform(&g).exponent - 0.5).abs() < 1e-16);
    }

    #[test]
    fn bessel_moment_zero_momentum() {
        let n = 3.0;
        let a = 1.7;
        let v = bessel_moment_integral(n, 0, a, 0.0).unwrap();
        let expect = ln_gamma(2.0).exp() / (2.0 * a.powf(2.0));
        assert!((v - expect).abs() < 1e-15);
        assert_eq!(bessel_moment_integral(n, 2, a, 0.0).unwrap(), 0.0);
        assert!(bessel_moment_integral(0.0, 2, a, 1.0).is_err());
    }

    #[test]
    fn coulomb_element_rejects_divergence() {
        let f = GaussianExpansion { exponent: 1.0, ln_scale: 0.0, terms: vec![(1.0, 0)] };
        assert!(coulomb_matrix_element(&f, &f).is_err());
    }
}
