//! Special functions used by the radial integrals and the partial-wave tail.

use crate::error::{Error, Result};

/// Scaled argument beyond which the Kummer series for 1F1 overflows.
pub const KUMMER_STABLE_LIMIT: f64 = 700.0;

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `∫₀^∞ r^n e^{-a r²} dr = Γ((n+1)/2) / (2 a^{(n+1)/2})`, returned as a logarithm.
#[inline]
pub fn ln_gaussian_moment(n: f64, a: f64) -> f64 {
    let h = 0.5 * (n + 1.0);
    ln_gamma(h) - std::f64::consts::LN_2 - h * a.ln()
}

/// Spherical Bessel function of the first kind, `j_l(x)` for `x ≥ 0`.
pub fn spherical_bessel_j(l: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let lf = l as f64;
    if x * x < 0.1 * (2.0 * lf + 3.0) {
        return spherical_bessel_series(l, x);
    }
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;
    if l == 1 {
        return j1;
    }
    if x > lf {
        let (mut jm, mut jc) = (j0, j1);
        for k in 1..l {
            let jn = (2 * k + 1) as f64 / x * jc - jm;
            jm = jc;
            jc = jn;
        }
        return jc;
    }
    // Miller downward recurrence, normalised against j0 or j1.
    let start = l + 20 + (40.0 * lf).sqrt() as u32 + (x as u32);
    let (mut jp, mut jc) = (0.0_f64, 1e-300_f64);
    let mut target = 0.0;
    for k in (1..=start).rev() {
        let jm = (2 * k + 1) as f64 / x * jc - jp;
        jp = jc;
        jc = jm;
        if k - 1 == l {
            target = jc;
        }
        if jc.abs() > 1e250 {
            jc *= 1e-250;
            jp *= 1e-250;
            target *= 1e-250;
        }
    }
    // jc now holds the unnormalised j0, jp the unnormalised j1.
    if j0.abs() > j1.abs() {
        target * j0 / jc
    } else {
        target * j1 / jp
    }
}

fn spherical_bessel_series(l: u32, x: f64) -> f64 {
    let mut lead = 1.0;
    for k in 1..=l {
        lead *= x / (2 * k + 1) as f64;
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= y / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Legendre polynomial `P_l(t)`.
pub fn legendre_p(l: u32, t: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => t,
        _ => {
            let (mut pm, mut pc) = (1.0, t);
            for k in 1..l {
                let kf = k as f64;
                let pn = ((2.0 * kf + 1.0) * t * pc - kf * pm) / (kf + 1.0);
                pm = pc;
                pc = pn;
            }
            pc
        }
    }
}

/// `M(a; b; -x)` for `x ≥ 0` via the Kummer-transformed series `e^{-x} M(b-a; b; x)`.
///
/// The transformed series has terms of a single sign except for a short
/// alternating head, so it is accurate until `e^x` overflows.
pub fn hyp1f1_neg_kummer(a: f64, b: f64, x: f64) -> Result<f64> {
    if x > KUMMER_STABLE_LIMIT {
        return Err(Error::PrecisionLoss { x });
    }
    let c = b - a;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut s = 0.0;
    loop {
        term *= (c + s) * x / ((b + s) * (s + 1.0));
        sum += term;
        s += 1.0;
        if term == 0.0 || (s > x && term.abs() < 1e-17 * sum.abs()) {
            break;
        }
        if s > 10_000.0 {
            return Err(Error::PrecisionLoss { x });
        }
    }
    Ok((-x).exp() * sum)
}

/// Large-argument expansion `M(a; b; -x) ≈ Γ(b)/Γ(b-a) x^{-a} Σ (a)_s (a-b+1)_s / (s! x^s)`.
pub fn hyp1f1_neg_asymptotic(a: f64, b: f64, x: f64) -> f64 {
    let c = b - a;
    if c <= 0.0 && c.fract() == 0.0 {
        // 1/Γ(b-a) vanishes; only the exponentially small branch survives.
        return 0.0;
    }
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut last = f64::INFINITY;
    for s in 0..200 {
        let sf = s as f64;
        term *= (a + sf) * (a - b + 1.0 + sf) / ((sf + 1.0) * x);
        if term.abs() > last || term == 0.0 {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
    }
    let sign = gamma_sign(c);
    sign * (ln_gamma(b) - ln_gamma(c) - a * x.ln()).exp() * sum
}

/// Sign of Γ(x) for non-pole real x.
fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if (x.floor() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coefficients of the terminating polynomial `M(-m; b; x) = Σ_s (-m)_s x^s / ((b)_s s!)`.
pub fn terminating_hyp1f1_coeffs(m: u32, b: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(m as usize + 1);
    let mut c = 1.0;
    out.push(c);
    for s in 0..m {
        let sf = s as f64;
        c *= (sf - m as f64) / ((b + sf) * (sf + 1.0));
        out.push(c);
    }
    out
}

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (q+k)^{-s}` for `s > 1`, `q > 0`.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const B2J: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let n = 12usize;
    let mut sum = 0.0;
    for k in 0..n {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + n as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // Euler–Maclaurin corrections.
    let mut rising = s; // s (s+1) ... (s+2j-2)
    let mut fact = 2.0; // (2j)!
    let mut apow = a.powf(-s - 1.0);
    for (j, b) in B2J.iter().enumerate() {
        sum += b / fact * rising * apow;
        let jf = (j + 1) as f64;
        rising *= (s + 2.0 * jf - 1.0) * (s + 2.0 * jf);
        fact *= (2.0 * jf + 1.0) * (2.0 * jf + 2.0);
        apow /= a * a;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_low_orders() {
        // Reference j_2 values computed with an independent library.
        let j2_ref = [
            (0.01, 6.666619047751334e-06),
            (0.3, 0.00596152486862022),
            (1.0, 0.062035052011373916),
            (2.5, 0.26006672948890525),
            (7.0, -0.13426627079380085),
            (30.0, 0.03231043467857091),
        ];
        for &(x, j2) in &j2_ref {
            let x: f64 = x;
            let j0 = x.sin() / x;
            assert!((spherical_bessel_j(0, x) - j0).abs() < 1e-14);
            let got = spherical_bessel_j(2, x);
            assert!((got - j2).abs() < 1e-13 * j2.abs().max(1e-3), "x={x}: {got} vs {j2}");
        }
    }

    #[test]
    fn bessel_downward_matches_series() {
        // x small relative to l: downward recurrence against the power series.
        for l in [5u32, 12, 30] {
            let x = 0.9;
            let a = spherical_bessel_j(l, x);
            let b = spherical_bessel_series(l, x);
            assert!((a - b).abs() <= 1e-13 * b.abs(), "l={l}: {a} vs {b}");
        }
        // Cross-check recurrence regimes against each other around x ~ l.
        let l = 10;
        let x = 9.5;
        let y = spherical_bessel_j(l, x);
        let z = (2.0 * (l - 1) as f64 + 1.0) / x * spherical_bessel_j(l - 1, x)
            - spherical_bessel_j(l - 2, x);
        assert!((y - z).abs() < 1e-12);
    }

    #[test]
    fn hurwitz_basic() {
        let z3 = 1.202_056_903_159_594_2;
        assert!((hurwitz_zeta(3.0, 1.0) - z3).abs() < 1e-14);
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((hurwitz_zeta(2.0, 1.0) - pi2_6).abs() < 1e-14);
        let direct: f64 = (0..5).map(|k| (1.0 + k as f64).powi(-3)).sum();
        assert!((hurwitz_zeta(3.0, 6.0) - (z3 - direct)).abs() < 1e-14);
    }

    #[test]
    fn kummer_and_asymptotic_agree_at_large_argument() {
        let (a, b) = (2.0, 2.5);
        let x = 600.0;
        let s = hyp1f1_neg_kummer(a, b, x).unwrap();
        let t = hyp1f1_neg_asymptotic(a, b, x);
        assert!((s - t).abs() < 1e-12 * t.abs(), "{s} {t}");
        assert!(hyp1f1_neg_kummer(a, b, 800.0).is_err());
    }

    #[test]
    fn terminating_polynomial() {
        // M(-2; b; x) = 1 - 2x/b + x²/(b(b+1))
        let c = terminating_hyp1f1_coeffs(2, 1.5);
        assert_eq!(c.len(), 3);
        assert!((c[1] + 2.0 / 1.5).abs() < 1e-15);
        assert!((c[2] - 1.0 / (1.5 * 2.5)).abs() < 1e-15);
    }
}
