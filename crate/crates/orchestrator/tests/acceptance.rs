//! Acceptance suite: one PASS/FAIL line per criterion, sub-checks indented below it.
//!
//! Runs the full default pipeline (a minute or two on one core). The process
//! exits nonzero if any criterion fails.

use gbse::reference::ReferenceData;
use gbse::{Pipeline, RunConfig};
use gbse_core::angular::{cg2, photon_angular_weight, spinor_ylm_element, KappaChannel, Vertex};
use gbse_core::basis::{
    bessel_moment_integral, build_basis, large_power, momentum_transform, BasisSpec, RadialBasisFunction,
};
use gbse_core::dirac::{assemble_matrices, solve_spectrum};
use gbse_core::momentum_terms::{
    gamma_r0, one_potential_term, sigma_r, zero_potential_term, MomentumWave, OnePotentialGrid, Renormalization,
};
use gbse_core::mp_assembly::{extrapolate_tail, to_f_units, PartialWaveResult, TailConfig};
use gbse_core::photon_pw::{PartialWaveEngine, ReferenceState};
use gbse_core::quadrature::adaptive_integrate;
use gbse_core::special::spherical_bessel_j;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

const ALPHA_INV: f64 = 137.0359895;

struct Check {
    label: String,
    pass: bool,
    detail: String,
}

fn within(label: &str, value: f64, target: f64, tol: f64) -> Check {
    let d = value - target;
    Check { label: label.into(), pass: d.abs() <= tol, detail: format!("{value:.10} vs {target} (diff {d:+.2e}, tol {tol:.1e})") }
}

fn check(label: &str, pass: bool, detail: String) -> Check {
    Check { label: label.into(), pass, detail }
}

fn run(id: u32, name: &str, ok: &mut bool, f: impl FnOnce() -> Vec<Check>) {
    let t = Instant::now();
    let checks = catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            vec![check("completed", false, msg.unwrap_or_else(|| "panicked".into()))]
        });
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    *ok &= pass;
    println!("{} criterion {id}: {name} ({:.1} s)", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    for c in &checks {
        println!("       [{}] {}: {}", if c.pass { "ok" } else { "FAILED" }, c.label, c.detail);
    }
}

fn default_cfg(root: &Path) -> RunConfig {
    let mut c = RunConfig::default();
    c.cache_dir = root.join("cache");
    c.output_dir = root.join("out");
    c
}

fn eigensolver(p: &Pipeline) -> Vec<Check> {
    let s = p.spectrum(-1, false).unwrap();
    let e = s.energies[s.lowest_positive().unwrap()];
    let za = 92.0 / ALPHA_INV;
    let exact = (1.0 - za * za).sqrt();
    let rel = (e - exact).abs() / exact;
    vec![check("ground energy, n_b = 100", rel <= 1e-9, format!("{e:.12} vs {exact:.12}, relative {rel:.2e} (tol 1e-9)"))]
}

fn table2(p: &Pipeline, r: &ReferenceData) -> Vec<Check> {
    let n_bs = [40, 50, 60, 70, 80, 90];
    let exact = r.value(2, "ref", "exact").unwrap();
    let mut out = Vec::new();
    for beta in [1.5, 1.45, 1.4] {
        let cells = p.sweep(&n_bs, &[beta], 5).unwrap();
        if beta == 1.5 {
            for c in cells.iter().filter(|c| c.n_b == 40 || c.n_b == 90) {
                let t = r.value(2, &c.n_b.to_string(), "beta=1.50").unwrap();
                out.push(within(&format!("n_b = {}, beta = 1.50", c.n_b), c.e_mp_pair, t, 2e-7));
            }
        }
        let v: Vec<f64> = cells.iter().map(|c| c.e_mp_pair).collect();
        let rising = v.windows(2).all(|w| w[1] >= w[0]);
        let (d0, d1) = ((v[0] - exact).abs(), (v[v.len() - 1] - exact).abs());
        out.push(check(
            &format!("beta = {beta:.2} column monotone toward {exact}"),
            rising && d1 < 0.01 * d0,
            format!("{:?}, distance {d0:.2e} -> {d1:.2e}", v.iter().map(|x| format!("{x:.8}")).collect::<Vec<_>>()),
        ));
    }
    out
}

fn table1(p: &Pipeline, r: &ReferenceData) -> Vec<Check> {
    let mut out = Vec::new();
    for row in p.mp_rows(&[-1, 1]).unwrap() {
        let k = row.kappa.to_string();
        for (c, v, tol) in [("bound", row.e_bound, 5e-6), ("zero", row.e_zero, 5e-6), ("one", row.e_one, 5e-6), ("mp", row.e_mp, 5e-7)] {
            out.push(within(&format!("kappa {k} {c}"), v, r.value(1, &k, c).unwrap(), tol));
        }
    }
    out
}

fn table3(p: &Pipeline, r: &ReferenceData) -> Vec<Check> {
    vec![
        within("Delta E^(0)_R", p.zero_potential().unwrap(), r.value(3, "e0", "present").unwrap(), 1e-4),
        within("Delta E^(1)_R", p.one_potential().unwrap(), r.value(3, "e1", "present").unwrap(), 1e-4),
    ]
}

fn full_pipeline(p: &Pipeline, r: &ReferenceData, root: &Path) -> Vec<Check> {
    let rep = p.assemble().unwrap();
    gbse::output::write_report(&p.cfg, &rep).unwrap();
    let mut out = vec![
        within("Delta E^mp, kappa_max = 15", rep.e_mp_total.value, r.value(3, "mp", "present").unwrap(), 1e-4),
        within("F_SE", rep.f_total.value, r.value(3, "se", "present").unwrap(), 1.5e-4),
    ];
    let order: Vec<i32> = rep.per_kappa.iter().map(|x| x.kappa).collect();
    let expected: Vec<i32> = (1..=15).flat_map(|k| [-k, k]).collect();
    out.push(check("rows in Table 4 order", order == expected, format!("{} rows", order.len())));
    let k2 = rep.per_kappa.iter().find(|x| x.kappa == 2).unwrap();
    out.push(within("Table 4 kappa 2 e_mp", k2.e_mp, r.value(4, "2", "mp").unwrap(), 5e-7));
    let worst = rep
        .per_kappa
        .iter()
        .flat_map(|x| {
            let k = x.kappa.to_string();
            [("zero", x.e_zero), ("one", x.e_one), ("bound", x.e_bound), ("mp", x.e_mp)]
                .map(|(c, v)| (v - r.value(4, &k, c).unwrap()).abs())
        })
        .fold(0.0, f64::max);
    out.push(check("largest Table 4 deviation", worst <= 5e-6, format!("{worst:.2e} (tol 5e-6)")));
    out.push(check(
        "stated uncertainty",
        rep.f_total.sigma > 0.0,
        format!("F_SE = {:.7} +- {:.1e}", rep.f_total.value, rep.f_total.sigma),
    ));

    let mut reduced = default_cfg(root);
    for (k, v) in [("kappa_max", "6"), ("n_b", "60"), ("tail_points", "4"), ("basis_check_nb", "50")] {
        reduced.set(k, v).unwrap();
    }
    let q = Pipeline::new(reduced).unwrap();
    let small = q.assemble().unwrap();
    out.push(within("reduced variant F_SE (kappa_max 6, n_b 60)", small.f_total.value, r.value(3, "se", "present").unwrap(), 2e-3));
    out
}

fn radial_quad(f: impl Fn(f64) -> f64, width: f64) -> f64 {
    let edges = [0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0, 9.0, 14.0];
    edges.windows(2).map(|w| adaptive_integrate(&f, w[0] * width, w[1] * width, 1e-14, 1e-18).unwrap()).sum()
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn properties(root: &Path) -> Vec<Check> {
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for &(n, l, a, k) in &[(2.0, 0, 0.7, 0.3), (3.0, 1, 0.05, 1.1), (4.0, 2, 2.0, 3.0), (2.5, 3, 0.3, 0.8)] {
        let v = bessel_moment_integral(n, l, a, k).unwrap();
        let q = radial_quad(|r| r.powf(n) * (-a * r * r).exp() * spherical_bessel_j(l, k * r), 1.0 / (a as f64).sqrt());
        worst = worst.max((v - q).abs() / q.abs());
    }
    out.push(check("Gaussian-Bessel moments vs quadrature", worst <= 1e-10, format!("relative {worst:.1e} (tol 1e-10)")));

    let mut worst: f64 = 0.0;
    for kappa in [-1, 2, -3] {
        let l = if kappa < 0 { (-kappa - 1) as u32 } else { kappa as u32 };
        for zeta in [0.05, 0.7, 3.0] {
            let g = RadialBasisFunction::new(zeta, large_power(kappa));
            let gt = momentum_transform(&g);
            let w = 1.0 / zeta.sqrt();
            let ps = [0.1, 0.5, 1.3, 2.0, 4.0].map(|x| x * zeta.sqrt());
            let pairs: Vec<(f64, f64)> = ps
                .iter()
                .map(|&p| (gt.eval(p), (2.0 / PI).sqrt() * p * radial_quad(|r| r * spherical_bessel_j(l, p * r) * g.eval(r), w)))
                .collect();
            let peak = pairs.iter().fold(0.0_f64, |m, x| m.max(x.1.abs()));
            worst = pairs.iter().fold(worst, |m, (a, n)| m.max((a - n).abs() / peak));
        }
    }
    out.push(check("momentum transform vs Hankel quadrature", worst <= 1e-10, format!("{worst:.1e} of peak (tol 1e-10)")));

    let b = build_basis(&BasisSpec::from_bohr(-2, 0.01, 1.5, 40, 92.0, ALPHA_INV)).unwrap();
    let mut worst: f64 = 0.0;
    for i in (0..b.len()).step_by(6) {
        for j in (i..b.len()).step_by(4) {
            let r = b[i].expansion().integral_with(&b[j].expansion(), 0).unwrap();
            let p = momentum_transform(&b[i]).expansion().integral_with(&momentum_transform(&b[j]).expansion(), 0).unwrap();
            worst = worst.max((r - p).abs());
        }
    }
    out.push(check("Parseval", worst <= 1e-12, format!("{worst:.1e} (tol 1e-12)")));

    let mut gap = f64::INFINITY;
    for kappa in [-1, 1, -4, 4] {
        let s = solve_spectrum(&BasisSpec::from_bohr(kappa, 0.01, 1.5, 60, 0.0, ALPHA_INV)).unwrap();
        gap = s.energies.iter().fold(gap, |m, e| m.min(e.abs()));
    }
    out.push(check("free spectrum outside (-1, 1)", gap >= 1.0 - 1e-8, format!("min |E| = {gap:.10}")));

    let sp = BasisSpec::from_bohr(-1, 0.01, 1.5, 40, 92.0, ALPHA_INV);
    let m = assemble_matrices(&sp).unwrap();
    let c = solve_spectrum(&sp).unwrap().coeff_matrix();
    let n = c.ncols();
    let mut worst: f64 = 0.0;
    for i in (0..n).step_by(7) {
        for j in (0..n).step_by(5) {
            // (Σ_a c_a c_aᵀ S)_ij in double-double.
            let (mut hi, mut lo) = (0.0, 0.0);
            for a in 0..n {
                let (mut sh, mut sl) = (0.0, 0.0);
                for k in 0..n {
                    let p = c[(k, a)] * m.s[(k, j)];
                    let (h, t) = two_sum(sh, p);
                    sh = h;
                    sl += t + c[(k, a)].mul_add(m.s[(k, j)], -p);
                }
                let proj = sh + sl;
                let p = c[(i, a)] * proj;
                let (h, t) = two_sum(hi, p);
                hi = h;
                lo += t + c[(i, a)].mul_add(proj, -p);
            }
            worst = worst.max((hi + lo - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    out.push(check("resolution of identity", worst <= 1e-8, format!("{worst:.1e} (tol 1e-8)")));

    let mut worst: f64 = 0.0;
    for l2 in (0..=20).step_by(2) {
        for mj in (-(l2 + 1)..=l2 + 1).step_by(2) {
            let js: Vec<i32> = [l2 - 1, l2 + 1].into_iter().filter(|&j| j >= 0).collect();
            for &ja in &js {
                for &jb in &js {
                    let s: f64 = [-1, 1]
                        .iter()
                        .filter(|&&ms| (mj - ms).abs() <= l2)
                        .map(|&ms| cg2(l2, mj - ms, 1, ms, ja, mj) * cg2(l2, mj - ms, 1, ms, jb, mj))
                        .sum();
                    let t = if ja == jb && mj.abs() <= ja { 1.0 } else { 0.0 };
                    worst = worst.max((s - t).abs());
                }
            }
        }
    }
    out.push(check("Clebsch-Gordan orthogonality", worst <= 1e-13, format!("{worst:.1e} (tol 1e-13)")));

    let mut worst: f64 = 0.0;
    let chans: Vec<KappaChannel> = (1..=4).flat_map(|k| [-k, k]).map(|k| KappaChannel::new(k).unwrap()).collect();
    for a in &chans {
        for nn in &chans {
            for big_l in 0..=8u32 {
                let mut s = 0.0;
                for ma in (-(a.j2 as i32)..=a.j2 as i32).step_by(2) {
                    for mn in (-(nn.j2 as i32)..=nn.j2 as i32).step_by(2) {
                        if (ma - mn) % 2 != 0 || ((ma - mn) / 2).unsigned_abs() > big_l {
                            continue;
                        }
                        let e = spinor_ylm_element(a, ma, big_l, (ma - mn) / 2, nn, mn);
                        s += e * e;
                    }
                }
                s /= (a.j2 + 1) as f64;
                worst = worst.max((photon_angular_weight(big_l, a, nn, Vertex::Temporal) - s).abs());
            }
        }
    }
    out.push(check("temporal angular weights vs explicit m sums, |kappa| <= 4", worst <= 1e-10, format!("{worst:.1e} (tol 1e-10)")));

    let mut worst: f64 = 0.0;
    for &(e, p) in &[(0.74, 0.3), (0.74, 1.5), (-0.5, 2.0)] {
        let h = 1e-5;
        let s = Renormalization::default();
        let (up, dn, mid) = (sigma_r(e + h, p, s).unwrap(), sigma_r(e - h, p, s).unwrap(), sigma_r(e, p, s).unwrap());
        let b_e = (up.slash - dn.slash) / (2.0 * h);
        let a_e = (up.mass - dn.mass) / (2.0 * h);
        let v = gamma_r0(e, p, p, 1.0, s).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-3);
        worst = worst.max(rel(v.scalar, -(e * b_e + mid.slash))).max(rel(v.beta, -a_e)).max(rel(v.c1 + v.c2, b_e));
    }
    out.push(check("Ward identity by finite differences", worst <= 1e-4, format!("relative {worst:.1e} (tol 1e-4)")));

    let spec = BasisSpec::from_bohr(-1, 0.01, 1.5, 40, 92.0, ALPHA_INV);
    let sa = solve_spectrum(&spec).unwrap();
    let reference = ReferenceState::ground(&sa).unwrap();
    let engine = PartialWaveEngine::new(reference.clone(), &spec).unwrap();
    let v = engine.integrand_at(&[1e-6, 1e-7], &sa).unwrap();
    let rel = (v[0] - v[1]).abs() / v[1].abs();
    out.push(check("k -> 0 integrand finite", v.iter().all(|x| x.is_finite()) && rel <= 0.01, format!("I(1e-6) = {:.6e}, I(1e-7) = {:.6e}", v[0], v[1])));

    let mut worst: f64 = 0.0;
    for kmax in [10, 15] {
        let rows: Vec<PartialWaveResult> = (1..=kmax)
            .flat_map(|k| [-k, k])
            .map(|k| PartialWaveResult::new(k, (if k < 0 { 0.7 } else { 0.3 }) * (k.abs() as f64).powi(-3), 0.0, 0.0))
            .collect();
        let t = extrapolate_tail(&rows, kmax as u32, &TailConfig::default()).unwrap().tail;
        let exact: f64 = (kmax + 1..2_000_000).rev().map(|k| (k as f64).powi(-3)).sum::<f64>() + 0.5 / 2e6f64.powi(2);
        worst = worst.max((t - exact).abs() / exact);
    }
    out.push(check("synthetic |kappa|^-3 tail", worst <= 1e-3, format!("relative {worst:.1e} (tol 1e-3)")));

    let w = MomentumWave::from_reference(&reference);
    let grid = OnePotentialGrid::default();
    let total = |shift: f64| {
        let s = Renormalization { shift };
        let e = zero_potential_term(&w, s).unwrap() + one_potential_term(&w, 92.0, s, &grid).unwrap();
        to_f_units(e, 92.0, 1, ALPHA_INV)
    };
    let (a, b) = (total(0.0), total(1.0));
    out.push(check("shared subtraction shift cancels", (a - b).abs() <= 1e-6, format!("{a:.9} vs {b:.9}")));

    let mut sums = Vec::new();
    for threads in [1, 3] {
        let mut c = default_cfg(&root.join(format!("threads{threads}")));
        for (k, v) in [("n_b", "30"), ("beta", "1.9"), ("k_nodes_per_decade", "12")] {
            c.set(k, v).unwrap();
        }
        c.threads = threads;
        let rows = Pipeline::new(c).unwrap().mp_rows(&[-1, 2, -3]).unwrap();
        sums.push(rows.iter().map(|r| [r.e_bound, r.e_zero, r.e_one].map(f64::to_bits)).collect::<Vec<_>>());
    }
    out.push(check("rows bitwise equal on 1 and 3 threads", sums[0] == sums[1], format!("{} rows", sums[0].len())));
    out
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let root = dir.path();
    let reference = ReferenceData::bundled();
    let p = Pipeline::new(default_cfg(root)).expect("pipeline");
    let mut ok = true;
    run(1, "eigensolver accuracy", &mut ok, || eigensolver(&p));
    run(2, "Table 2 basis convergence at |kappa| = 5", &mut ok, || table2(&p, &reference));
    run(3, "Table 1 terms for kappa = -1 and +1", &mut ok, || table1(&p, &reference));
    run(4, "Table 3 momentum-space terms", &mut ok, || table3(&p, &reference));
    run(5, "full pipeline with extrapolation", &mut ok, || full_pipeline(&p, &reference, &root.join("reduced")));
    run(6, "quick property checks", &mut ok, || properties(root));
    if ok {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILURES");
        ExitCode::FAILURE
    }
}
