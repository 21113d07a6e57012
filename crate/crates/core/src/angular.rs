//! Relativistic angular-momentum bookkeeping.
//!
//! Half-integer quantum numbers are carried internally as doubled integers
//! (`two_j`, `two_m`). Condon–Shortley phases throughout.

use crate::error::{Error, Result};
use crate::special::ln_gamma;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Angular channel of a Dirac spinor labelled by `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KappaChannel {
    pub kappa: i32,
    /// Orbital momentum of the large component.
    pub ell: u32,
    /// Orbital momentum of the small component.
    pub ell_bar: u32,
    /// Twice the total angular momentum.
    pub j2: u32,
}

impl KappaChannel {
    pub fn new(kappa: i32) -> Result<Self> {
        kappa_to_channel(kappa)
    }

    pub fn j(&self) -> f64 {
        self.j2 as f64 / 2.0
    }

    /// The channel `-κ` carried by the small component.
    pub fn flipped(&self) -> Self {
        kappa_to_channel(-self.kappa).expect("nonzero kappa")
    }
}

pub fn kappa_to_channel(kappa: i32) -> Result<KappaChannel> {
    if kappa == 0 {
        return Err(Error::ZeroKappa);
    }
    let abs = kappa.unsigned_abs();
    let (ell, ell_bar) = if kappa < 0 { (abs - 1, abs) } else { (abs, abs - 1) };
    Ok(KappaChannel { kappa, ell, ell_bar, j2: 2 * abs - 1 })
}

fn ln_fact(n: i32) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

fn triangle_ok(a2: i32, b2: i32, c2: i32) -> bool {
    c2 >= (a2 - b2).abs() && c2 <= a2 + b2 && (a2 + b2 + c2) % 2 == 0
}

/// Clebsch–Gordan coefficient `⟨j1 m1; j2 m2 | J M⟩` with doubled arguments.
///
/// Racah's single-sum formula; factorial ratios are carried in log form so
/// arguments up to a few hundred do not overflow.
pub fn cg2(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if m1 + m2 != m || !triangle_ok(j1, j2, j) {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j + m) % 2 != 0 {
        return 0.0;
    }
    // Integer arguments of the factorials.
    let a = (j1 + j2 - j) / 2;
    let b = (j1 - j2 + j) / 2;
    let c = (-j1 + j2 + j) / 2;
    let d = (j1 + j2 + j) / 2 + 1;
    let ln_delta = 0.5 * (ln_fact(a) + ln_fact(b) + ln_fact(c) - ln_fact(d));
    let ln_pref = 0.5
        * ((j + 1) as f64).ln()
        + 0.5
            * (ln_fact((j1 + m1) / 2)
                + ln_fact((j1 - m1) / 2)
                + ln_fact((j2 + m2) / 2)
                + ln_fact((j2 - m2) / 2)
                + ln_fact((j + m) / 2)
                + ln_fact((j - m) / 2));
    let kmin = 0.max((j2 - j - m1) / 2).max((j1 - j + m2) / 2);
    let kmax = a.min((j1 - m1) / 2).min((j2 + m2) / 2);
    if kmin > kmax {
        return 0.0;
    }
    let mut terms = Vec::with_capacity((kmax - kmin + 1) as usize);
    for k in kmin..=kmax {
        let ln_den = ln_fact(k)
            + ln_fact(a - k)
            + ln_fact((j1 - m1) / 2 - k)
            + ln_fact((j2 + m2) / 2 - k)
            + ln_fact((j - j2 + m1) / 2 + k)
            + ln_fact((j - j1 - m2) / 2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((sign, -ln_den));
    }
    let lmax = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|(sg, l)| sg * (l - lmax).exp()).sum();
    s * (ln_delta + ln_pref + lmax).exp()
}

/// Half-integer check: returns `2x` if `x` is an integer or half-integer.
fn doubled(x: f64, what: &str) -> Result<i32> {
    let d = 2.0 * x;
    if (d - d.round()).abs() > 1e-12 || !d.is_finite() {
        return Err(Error::InvalidAngularMomentum(format!("{what} = {x} is not a half-integer")));
    }
    Ok(d.round() as i32)
}

/// Clebsch–Gordan coefficient `⟨l ml; s ms | j mj⟩` with (half-)integer arguments.
pub fn clebsch_gordan(l: u32, ml: f64, s: f64, ms: f64, j: f64, mj: f64) -> Result<f64> {
    let l2 = 2 * l as i32;
    let ml2 = doubled(ml, "ml")?;
    let s2 = doubled(s, "s")?;
    let ms2 = doubled(ms, "ms")?;
    let j2 = doubled(j, "j")?;
    let mj2 = doubled(mj, "mj")?;
    if s2 < 0 || j2 < 0 {
        return Err(Error::InvalidAngularMomentum("negative angular momentum".into()));
    }
    if ml2.abs() > l2 || ms2.abs() > s2 || (l2 + ml2) % 2 != 0 || (s2 + ms2) % 2 != 0 {
        return Err(Error::InvalidAngularMomentum("projection out of range".into()));
    }
    if !triangle_ok(l2, s2, j2) {
        return Err(Error::InvalidAngularMomentum(format!("triangle rule violated for ({l}, {s}, {j})")));
    }
    Ok(cg2(l2, ml2, s2, ms2, j2, mj2))
}

/// `∫ Y*_{l1 m1} Y_{L M} Y_{l2 m2} dΩ`.
pub fn gaunt(l1: u32, m1: i32, big_l: u32, big_m: i32, l2: u32, m2: i32) -> f64 {
    if m1 != big_m + m2 || (l1 + big_l + l2) % 2 != 0 {
        return 0.0;
    }
    let (l1i, li, l2i) = (2 * l1 as i32, 2 * big_l as i32, 2 * l2 as i32);
    let pref = (((2 * l2 + 1) * (2 * big_l + 1)) as f64 / (4.0 * PI * (2 * l1 + 1) as f64)).sqrt();
    pref * cg2(l2i, 0, li, 0, l1i, 0) * cg2(l2i, 2 * m2, li, 2 * big_m, l1i, 2 * m1)
}

/// `⟨1/2 ms1 | σ_q | 1/2 ms2⟩` for spherical components `q ∈ {-1, 0, 1}` (doubled spins).
fn sigma_spherical(q: i32, ms1: i32, ms2: i32) -> f64 {
    match (q, ms1, ms2) {
        (0, 1, 1) => 1.0,
        (0, -1, -1) => -1.0,
        (1, 1, -1) => -std::f64::consts::SQRT_2,
        (-1, -1, 1) => std::f64::consts::SQRT_2,
        _ => 0.0,
    }
}

/// `⟨κ1 m1 | Y_{LM} | κ2 m2⟩` between spin-angular functions (doubled `m`).
pub fn spinor_ylm_element(c1: &KappaChannel, m1: i32, big_l: u32, big_m: i32, c2: &KappaChannel, m2: i32) -> f64 {
    if m1 != 2 * big_m + m2 {
        return 0.0;
    }
    let mut s = 0.0;
    for ms in [-1, 1] {
        let ml1 = m1 - ms;
        let ml2 = m2 - ms;
        if ml1.abs() > 2 * c1.ell as i32 || ml2.abs() > 2 * c2.ell as i32 {
            continue;
        }
        let a = cg2(2 * c1.ell as i32, ml1, 1, ms, c1.j2 as i32, m1);
        let b = cg2(2 * c2.ell as i32, ml2, 1, ms, c2.j2 as i32, m2);
        if a == 0.0 || b == 0.0 {
            continue;
        }
        s += a * b * gaunt(c1.ell, ml1 / 2, big_l, big_m, c2.ell, ml2 / 2);
    }
    s
}

/// `⟨κ1 m1 | Y_{LM} σ_q | κ2 m2⟩` between spin-angular functions (doubled `m`).
pub fn spinor_ylm_sigma_element(
    c1: &KappaChannel,
    m1: i32,
    big_l: u32,
    big_m: i32,
    q: i32,
    c2: &KappaChannel,
    m2: i32,
) -> f64 {
    if m1 != 2 * big_m + 2 * q + m2 {
        return 0.0;
    }
    let mut s = 0.0;
    for ms1 in [-1, 1] {
        for ms2 in [-1, 1] {
            let sig = sigma_spherical(q, ms1, ms2);
            if sig == 0.0 {
                continue;
            }
            let ml1 = m1 - ms1;
            let ml2 = m2 - ms2;
            if ml1.abs() > 2 * c1.ell as i32 || ml2.abs() > 2 * c2.ell as i32 {
                continue;
            }
            let a = cg2(2 * c1.ell as i32, ml1, 1, ms1, c1.j2 as i32, m1);
            let b = cg2(2 * c2.ell as i32, ml2, 1, ms2, c2.j2 as i32, m2);
            if a == 0.0 || b == 0.0 {
                continue;
            }
            s += a * b * sig * gaunt(c1.ell, ml1 / 2, big_l, big_m, c2.ell, ml2 / 2);
        }
    }
    s
}

/// Vertex structure of a photon-exchange angular weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vertex {
    /// Temporal (charge) vertex, weight of `R_T²`, `R_T = ∫ j_L (P_a P_n + Q_a Q_n)`.
    Temporal,
    /// Spatial vertex, weight of `R_1²`, `R_1 = ∫ j_L P_a Q_n`.
    SpatialLargeSmall,
    /// Spatial vertex, weight of `R_2²`, `R_2 = ∫ j_L Q_a P_n`.
    SpatialSmallLarge,
    /// Spatial vertex, weight of `-2 R_1 R_2`.
    SpatialCross,
}

/// `m`-summed angular factor of the Feynman-gauge multipole `L` between reference
/// channel `a` (averaged over `m_a`) and intermediate channel `n` (summed over `m_n`).
///
/// The temporal weight is `Σ_{m_n, M} |⟨κ_a m_a|Y_{LM}|κ_n m_n⟩|²`; the spatial ones are
/// built from `A = ⟨κ_a|Y_{LM}σ_q|-κ_n⟩` and `B = ⟨-κ_a|Y_{LM}σ_q|κ_n⟩` summed over `M, q`.
pub fn photon_angular_weight(big_l: u32, a: &KappaChannel, n: &KappaChannel, vertex: Vertex) -> f64 {
    match vertex {
        Vertex::Temporal => {
            if (a.ell + n.ell + big_l) % 2 != 0 || !triangle_ok(a.j2 as i32, n.j2 as i32, 2 * big_l as i32) {
                return 0.0;
            }
            // Closed form: (2L+1)(2j_n+1)/(4π) · (j_a L j_n; 1/2 0 -1/2)².
            let cg = cg2(a.j2 as i32, 1, 2 * big_l as i32, 0, n.j2 as i32, 1);
            // 3j² = CG² / (2 j_n + 1)
            let three_j_sq = cg * cg / (n.j2 + 1) as f64;
            (2 * big_l + 1) as f64 * (n.j2 + 1) as f64 / (4.0 * PI) * three_j_sq
        }
        _ => spatial_weight(big_l, a, n, vertex),
    }
}

fn spatial_weight(big_l: u32, a: &KappaChannel, n: &KappaChannel, vertex: Vertex) -> f64 {
    let na = n.flipped();
    let aa = a.flipped();
    let parity_a = (a.ell + na.ell + big_l) % 2 == 0;
    let parity_b = (aa.ell + n.ell + big_l) % 2 == 0;
    let lj = 2 * big_l as i32;
    let j_ok = (a.j2 as i32 - n.j2 as i32).abs() <= lj + 2 && lj <= (a.j2 + n.j2) as i32 + 2;
    if !j_ok {
        return 0.0;
    }
    let needs_a = matches!(vertex, Vertex::SpatialLargeSmall | Vertex::SpatialCross);
    let needs_b = matches!(vertex, Vertex::SpatialSmallLarge | Vertex::SpatialCross);
    if (needs_a && !parity_a) || (needs_b && !parity_b) {
        return 0.0;
    }
    let mut acc = 0.0;
    for ma in (-(a.j2 as i32)..=a.j2 as i32).step_by(2) {
        for mn in (-(n.j2 as i32)..=n.j2 as i32).step_by(2) {
            for q in -1..=1 {
                let two_m = ma - mn - 2 * q;
                if two_m % 2 != 0 || two_m.abs() > lj {
                    continue;
                }
                let big_m = two_m / 2;
                let ea = if needs_a { spinor_ylm_sigma_element(a, ma, big_l, big_m, q, &na, mn) } else { 0.0 };
                let eb = if needs_b { spinor_ylm_sigma_element(&aa, ma, big_l, big_m, q, n, mn) } else { 0.0 };
                acc += match vertex {
                    Vertex::SpatialLargeSmall => ea * ea,
                    Vertex::SpatialSmallLarge => eb * eb,
                    _ => ea * eb,
                };
            }
        }
    }
    acc / (a.j2 + 1) as f64
}

/// Bessel orders `L` that can carry a nonzero weight between `a` and `n` for a vertex type.
pub fn allowed_multipoles(a: &KappaChannel, n: &KappaChannel, temporal: bool) -> Vec<u32> {
    let lo = (a.j2 as i32 - n.j2 as i32).unsigned_abs() / 2;
    let hi = (a.j2 + n.j2) / 2;
    if temporal {
        (lo..=hi).filter(|l| (a.ell + n.ell + l) % 2 == 0).collect()
    } else {
        // Vector harmonics: L ranges over J±1 for J in the triangle.
        let lmin = lo.saturating_sub(1);
        (lmin..=hi + 1).filter(|l| (a.ell + n.ell_bar + l) % 2 == 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channels() {
        let c = kappa_to_channel(-1).unwrap();
        assert_eq!((c.ell, c.ell_bar, c.j2), (0, 1, 1));
        let c = kappa_to_channel(1).unwrap();
        assert_eq!((c.ell, c.ell_bar, c.j2), (1, 0, 1));
        let c = kappa_to_channel(2).unwrap();
        assert_eq!((c.ell, c.ell_bar, c.j2), (2, 1, 3));
        assert_eq!(kappa_to_channel(0), Err(Error::ZeroKappa));
    }

    #[test]
    fn cg_known_values() {
        assert!((clebsch_gordan(0, 0.0, 0.5, 0.5, 0.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(clebsch_gordan(1, 0.0, 0.5, 0.5, 1.5, -0.5).unwrap(), 0.0);
        // ⟨1 1; 1/2 -1/2 | 1/2 1/2⟩ = sqrt(2/3)
        let v = clebsch_gordan(1, 1.0, 0.5, -0.5, 0.5, 0.5).unwrap();
        assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!(clebsch_gordan(1, 0.0, 0.5, 0.5, 2.5, 0.5).is_err());
        assert!(clebsch_gordan(1, 0.3, 0.5, 0.5, 1.5, 0.5).is_err());
    }

    #[test]
    fn cg_large_arguments_are_finite() {
        // j up to 250: orthonormality of a column.
        let (l, j) = (249 * 2, 499);
        let m = 1;
        let s: f64 = [-1, 1].iter().map(|&ms| cg2(l, m - ms, 1, ms, j, m).powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-10, "{s}");
    }

    #[test]
    fn temporal_selection_rules() {
        let a = kappa_to_channel(-1).unwrap();
        for kn in [-3, -2, -1, 1, 2, 3] {
            let n = kappa_to_channel(kn).unwrap();
            let allowed = allowed_multipoles(&a, &n, true);
            assert_eq!(allowed.len(), 1);
            for l in 0..8 {
                let w = photon_angular_weight(l, &a, &n, Vertex::Temporal);
                if allowed.contains(&l) {
                    assert!(w > 0.0);
                } else {
                    assert_eq!(w, 0.0);
                }
            }
        }
    }
}
