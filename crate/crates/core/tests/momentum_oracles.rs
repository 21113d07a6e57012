use gbse_core::basis::BasisSpec;
use gbse_core::dirac::{assemble_matrices, solve_spectrum};
use gbse_core::momentum_terms::{
    coulomb_momentum, gamma_r0, one_potential_integral, one_potential_term, sigma_r, zero_potential_term,
    MomentumWave, OnePotentialGrid, OnePotentialOperator, Renormalization,
};
use gbse_core::photon_pw::ReferenceState;
use gbse_core::quadrature::adaptive_integrate;
use nalgebra::DVector;
use proptest::prelude::*;
use std::f64::consts::PI;

const ALPHA_INV: f64 = 137.0359895;

fn reference(n_b: usize) -> (BasisSpec, ReferenceState) {
    let spec = BasisSpec::from_bohr(-1, 0.01, 1.5, n_b, 92.0, ALPHA_INV);
    let s = solve_spectrum(&spec).unwrap();
    (spec, ReferenceState::ground(&s).unwrap())
}

fn scheme(shift: f64) -> Renormalization {
    Renormalization { shift }
}

#[test]
fn ward_identity_at_zero_momentum_transfer() {
    // γ⁰Γ⁰(p, p) = −γ⁰ ∂Σ/∂E: scalar = −(E B_E + B), beta = −A_E, c1 + c2 = B_E.
    for shift in [0.0, 0.7] {
        for &(e, p) in &[(0.74, 0.3), (0.74, 1.5), (0.2, 0.05), (-0.5, 2.0), (0.95, 8.0)] {
            let h = 1e-5;
            let up = sigma_r(e + h, p, scheme(shift)).unwrap();
            let dn = sigma_r(e - h, p, scheme(shift)).unwrap();
            let s = sigma_r(e, p, scheme(shift)).unwrap();
            let a_e = (up.mass - dn.mass) / (2.0 * h);
            let b_e = (up.slash - dn.slash) / (2.0 * h);
            let v = gamma_r0(e, p, p, 1.0, scheme(shift)).unwrap();
            let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-3);
            assert!(rel(v.scalar, -(e * b_e + s.slash)) < 1e-4, "scalar at E={e} p={p}: {} vs {}", v.scalar, -(e * b_e + s.slash));
            assert!(rel(v.beta, -a_e) < 1e-4, "beta at E={e} p={p}: {} vs {}", v.beta, -a_e);
            assert!(rel(v.c1 + v.c2, b_e) < 1e-4, "vector at E={e} p={p}: {} vs {b_e}", v.c1 + v.c2);
        }
    }
}

#[test]
fn self_energy_vanishes_on_the_mass_shell() {
    for p in [0.0, 0.5, 3.0] {
        let e = (1.0 + p * p - 1e-12_f64).sqrt();
        let s = sigma_r(e, p, Renormalization::default()).unwrap();
        assert!((s.mass + s.slash).abs() < 1e-9, "p={p}: {} + {}", s.mass, s.slash);
    }
}

#[test]
fn self_energy_is_continuous_across_its_series_switch() {
    // The ρ series and the closed form take over at |1 − ρ| = 0.05.
    let e = 0.74_f64;
    for target in [0.95, 1.05] {
        let p_edge = (target - 1.0 + e * e).sqrt();
        let a = sigma_r(e, p_edge * (1.0 - 1e-9), Renormalization::default()).unwrap();
        let b = sigma_r(e, p_edge * (1.0 + 1e-9), Renormalization::default()).unwrap();
        assert!((a.mass - b.mass).abs() < 1e-8 && (a.slash - b.slash).abs() < 1e-8, "{a:?} {b:?}");
    }
    let mut last = sigma_r(e, 1e-6, Renormalization::default()).unwrap();
    let mut p = 1e-6;
    while p < 1e4 {
        p *= 1.05;
        let s = sigma_r(e, p, Renormalization::default()).unwrap();
        let jump = (s.mass - last.mass).abs().max((s.slash - last.slash).abs());
        let scale = s.mass.abs().max(s.slash.abs()).max(1.0);
        assert!(jump < 0.2 * scale, "jump {jump} at p={p}");
        last = s;
    }
}

#[test]
fn self_energy_rejects_timelike_momenta() {
    assert!(sigma_r(1.5, 0.1, Renormalization::default()).is_err());
    assert!(gamma_r0(1.2, 0.1, 0.2, 0.0, Renormalization::default()).is_err());
    assert!(gamma_r0(0.5, 0.1, 0.2, 1.5, Renormalization::default()).is_err());
}

#[test]
fn coulomb_potential_scaling() {
    let a = 1.0 / ALPHA_INV;
    for q in [1e-3, 0.4, 17.0] {
        let v = coulomb_momentum(q, 92.0, a).unwrap();
        assert_eq!(coulomb_momentum(2.0 * q, 92.0, a).unwrap() / v, 0.25);
        assert!((coulomb_momentum(q, 46.0, a).unwrap() * 2.0 - v).abs() <= 1e-15 * v.abs());
    }
    assert!(coulomb_momentum(0.0, 92.0, a).is_err());
    assert!(coulomb_momentum(f64::NAN, 92.0, a).is_err());
}

#[test]
fn coulomb_potential_is_the_yukawa_limit() {
    let (z, a) = (92.0, 1.0 / ALPHA_INV);
    let mu = 1e-2;
    for q in [0.5, 1.0, 4.0] {
        // (2π)⁻³ ∫ d³r e^{−iq·r} (−Zα e^{−μr}/r) = −(Zα/(2π²q)) ∫₀^∞ sin(qr) e^{−μr} dr.
        let period = 2.0 * PI / q;
        let mut acc = 0.0;
        let mut r = 0.0;
        while r < 60.0 / mu {
            acc += adaptive_integrate(|x| (q * x).sin() * (-mu * x).exp(), r, r + period, 1e-13, 1e-16).unwrap();
            r += period;
        }
        let num = -z * a / (2.0 * PI * PI * q) * acc;
        let yukawa = -z * a / (2.0 * PI * PI * (q * q + mu * mu));
        assert!((num - yukawa).abs() < 1e-9 * yukawa.abs(), "q={q}: {num} vs {yukawa}");
        let v = coulomb_momentum(q, z, a).unwrap();
        assert!((num - v).abs() < 2.0 * (mu / q).powi(2) * v.abs(), "q={q}: {num} vs {v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vertex_is_symmetric_in_the_legs(e in -0.9f64..0.9, p1 in 1e-3f64..20.0, p2 in 1e-3f64..20.0, c in -1.0f64..1.0) {
        let a = gamma_r0(e, p1, p2, c, Renormalization::default()).unwrap();
        let b = gamma_r0(e, p2, p1, c, Renormalization::default()).unwrap();
        let tol = 1e-9 * (a.scalar.abs() + a.beta.abs() + a.c1.abs() + a.c2.abs() + a.spin.abs()).max(1.0);
        prop_assert!((a.scalar - b.scalar).abs() < tol);
        prop_assert!((a.beta - b.beta).abs() < tol);
        prop_assert!((a.spin - b.spin).abs() < tol);
        prop_assert!((a.c1 - b.c2).abs() < tol && (a.c2 - b.c1).abs() < tol);
    }

    #[test]
    fn self_energy_is_even_in_energy_sign(e in 0.0f64..0.99, p in 0.0f64..30.0) {
        let a = sigma_r(e, p, Renormalization::default()).unwrap();
        let b = sigma_r(-e, p, Renormalization::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn momentum_wave_is_normalised() {
    let (_, r) = reference(100);
    let w = MomentumWave::from_reference(&r);
    assert!((w.norm() - 1.0).abs() < 1e-10, "analytic norm {}", w.norm());
    let mut acc = 0.0;
    let mut lo = 1e-6;
    while lo < w.p_max() {
        acc += adaptive_integrate(
            |p| {
                let (a, b) = w.eval(p);
                a * a + b * b
            },
            lo,
            lo * 2.0,
            1e-13,
            1e-20,
        )
        .unwrap();
        lo *= 2.0;
    }
    assert!((acc - 1.0).abs() < 1e-9, "quadrature norm {acc}");
}

#[test]
fn zero_potential_term_is_invariant_under_sign_flip() {
    let (_, r) = reference(60);
    let mut flipped = r.clone();
    flipped.large.iter_mut().for_each(|c| *c = -*c);
    flipped.small.iter_mut().for_each(|c| *c = -*c);
    let a = zero_potential_term(&MomentumWave::from_reference(&r), Renormalization::default()).unwrap();
    let b = zero_potential_term(&MomentumWave::from_reference(&flipped), Renormalization::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn coulomb_expectation_matches_the_matrix_form() {
    let (spec, r) = reference(100);
    let w = MomentumWave::from_reference(&r);
    let v = one_potential_integral(&w, 92.0, Renormalization::default(), &OnePotentialGrid::default(), OnePotentialOperator::Coulomb)
        .unwrap();
    // Z cᵀ (H(Z=1) − H(0)) c, the position-space 1/r expectation.
    let h1 = assemble_matrices(&spec.with_charge(1.0)).unwrap().h;
    let h0 = assemble_matrices(&spec.with_charge(0.0)).unwrap().h;
    let mut c = r.large.clone();
    c.extend_from_slice(&r.small);
    let c = DVector::from_vec(c);
    let exact = 92.0 * (c.transpose() * (h1 - h0) * &c)[(0, 0)];
    assert!((v - exact).abs() < 2e-9 * exact.abs(), "{v} vs {exact}");
}

#[test]
fn shared_subtraction_shift_cancels_in_the_sum() {
    let (spec, r) = reference(100);
    let w = MomentumWave::from_reference(&r);
    let grid = OnePotentialGrid::default();
    let f = PI / (spec.alpha() * (92.0 * spec.alpha()).powi(4));
    let sum = |shift: f64| {
        let e0 = zero_potential_term(&w, scheme(shift)).unwrap();
        let e1 = one_potential_term(&w, 92.0, scheme(shift), &grid).unwrap();
        (f * e0, f * e1)
    };
    let (a0, a1) = sum(0.0);
    let (b0, b1) = sum(1.0);
    assert!((a0 - b0).abs() > 1e-2, "the shift must move each term");
    assert!(((a0 + a1) - (b0 + b1)).abs() < 1e-6, "{} vs {}", a0 + a1, b0 + b1);
}

#[test]
fn one_potential_term_is_linear_in_charge() {
    let (_, r) = reference(40);
    let w = MomentumWave::from_reference(&r);
    let grid = OnePotentialGrid { nodes_per_decade: 6, p_min: 1e-4, cos_nodes: 6 };
    let a = one_potential_term(&w, 92.0, Renormalization::default(), &grid).unwrap();
    let b = one_potential_term(&w, 46.0, Renormalization::default(), &grid).unwrap();
    assert!((a - 2.0 * b).abs() <= 1e-14 * a.abs());
    assert!(a > 0.0);
}
