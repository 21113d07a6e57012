//! Radial Dirac Hamiltonian in the kinetically balanced Gaussian basis.

use crate::basis::{build_basis, rkb_small_component, BasisSpec, GaussianExpansion, RadialBasisFunction};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Relative singular-value cutoff of the canonical-orthogonalisation fallback.
const CANONICAL_CUTOFF: f64 = 1e-10;
/// Residual tolerance `‖Hc − ESc‖ / ‖H‖` flagged after the solve.
const RESIDUAL_TOL: f64 = 1e-8;

/// Large- and small-component basis functions of one κ.
#[derive(Debug, Clone)]
pub struct KineticBalancedBasis {
    pub spec: BasisSpec,
    pub large: Vec<RadialBasisFunction>,
    pub large_exp: Vec<GaussianExpansion>,
    pub small_exp: Vec<GaussianExpansion>,
}

impl KineticBalancedBasis {
    pub fn new(spec: &BasisSpec) -> Result<Self> {
        let large = build_basis(spec)?;
        let large_exp = large.iter().map(|g| g.expansion()).collect();
        let small_exp = large.iter().map(|g| rkb_small_component(g, spec.kappa)).collect();
        Ok(Self { spec: *spec, large, large_exp, small_exp })
    }

    pub fn len(&self) -> usize {
        self.large.len()
    }

    pub fn is_empty(&self) -> bool {
        self.large.is_empty()
    }
}

/// Hamiltonian and overlap of the radial Dirac operator, `2n_b × 2n_b`.
#[derive(Debug, Clone)]
pub struct DiracMatrices {
    pub h: DMatrix<f64>,
    pub s: DMatrix<f64>,
}

/// Full eigensystem of the radial Dirac matrix for one (κ, Z).
///
/// Column `a` of `coeffs` holds `(c^P, c^Q)` with respect to the normalised
/// large-component functions and the unnormalised kinetically balanced small
/// components. Energies are absolute, in units of mc², ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrum {
    pub kappa: i32,
    pub z: f64,
    pub spec: BasisSpec,
    pub energies: Vec<f64>,
    /// Column-major, `dim × energies.len()`.
    pub coeffs: Vec<f64>,
    pub dim: usize,
}

impl RadialSpectrum {
    pub fn n_b(&self) -> usize {
        self.dim / 2
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn column(&self, a: usize) -> &[f64] {
        &self.coeffs[a * self.dim..(a + 1) * self.dim]
    }

    pub fn large(&self, a: usize) -> &[f64] {
        &self.column(a)[..self.n_b()]
    }

    pub fn small(&self, a: usize) -> &[f64] {
        &self.column(a)[self.n_b()..]
    }

    /// Index of the lowest state with `E > 0`.
    pub fn lowest_positive(&self) -> Option<usize> {
        self.energies.iter().position(|&e| e > 0.0)
    }

    /// `(P(r), Q(r))` of state `a`.
    pub fn eval(&self, basis: &KineticBalancedBasis, a: usize, r: f64) -> (f64, f64) {
        let p = self.large(a).iter().zip(&basis.large_exp).map(|(c, g)| c * g.eval(r)).sum();
        let q = self.small(a).iter().zip(&basis.small_exp).map(|(c, g)| c * g.eval(r)).sum();
        (p, q)
    }

    pub fn coeff_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.dim, self.len(), &self.coeffs)
    }
}

/// Overlap block `⟨f_i | r^shift | f_j⟩` for one family of expansions.
fn gram(fs: &[GaussianExpansion], gs: &[GaussianExpansion], shift: i32) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(fs.len(), gs.len());
    for (i, f) in fs.iter().enumerate() {
        for (j, g) in gs.iter().enumerate() {
            m[(i, j)] = f.integral_with(g, shift)?;
        }
    }
    Ok(m)
}

pub fn assemble_basis_matrices(basis: &KineticBalancedBasis) -> Result<DiracMatrices> {
    let nb = basis.len();
    let spec = &basis.spec;
    let s_pp = gram(&basis.large_exp, &basis.large_exp, 0)?;
    let s_qq = gram(&basis.small_exp, &basis.small_exp, 0)?;
    let mut h = DMatrix::zeros(2 * nb, 2 * nb);
    let mut s = DMatrix::zeros(2 * nb, 2 * nb);
    let za = spec.z * spec.alpha();
    let (v_pp, v_qq) = if za != 0.0 {
        (
            gram(&basis.large_exp, &basis.large_exp, -1)? * (-za),
            gram(&basis.small_exp, &basis.small_exp, -1)? * (-za),
        )
    } else {
        (DMatrix::zeros(nb, nb), DMatrix::zeros(nb, nb))
    };
    for i in 0..nb {
        for j in 0..nb {
            s[(i, j)] = s_pp[(i, j)];
            s[(nb + i, nb + j)] = s_qq[(i, j)];
            h[(i, j)] = v_pp[(i, j)] + s_pp[(i, j)];
            h[(nb + i, nb + j)] = v_qq[(i, j)] - s_qq[(i, j)];
            // c(d/dr + κ/r) g^P = 2mc² g^Q and its adjoint.
            h[(nb + i, j)] = 2.0 * s_qq[(i, j)];
            h[(i, nb + j)] = 2.0 * s_qq[(i, j)];
        }
    }
    symmetrize(&mut h);
    symmetrize(&mut s);
    Ok(DiracMatrices { h, s })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub fn assemble_matrices(spec: &BasisSpec) -> Result<DiracMatrices> {
    assemble_basis_matrices(&KineticBalancedBasis::new(spec)?)
}

/// Solve `H c = E S c` by Cholesky reduction after diagonal equilibration,
/// with a canonical-orthogonalisation fallback.
pub fn solve_generalized(h: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = h.nrows();
    let d: DVector<f64> = DVector::from_iterator(n, (0..n).map(|i| 1.0 / s[(i, i)].sqrt()));
    let scale = |m: &DMatrix<f64>| {
        let mut out = m.clone();
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] *= d[i] * d[j];
            }
        }
        out
    };
    let hs = scale(h);
    let ss = scale(s);
    let (vals, vecs) = match ss.clone().cholesky() {
        Some(ch) => {
            let l = ch.l();
            // A = L⁻¹ H L⁻ᵀ
            let x = l.solve_lower_triangular(&hs).ok_or(Error::IndefiniteOverlap)?;
            let a = l.solve_lower_triangular(&x.transpose()).ok_or(Error::IndefiniteOverlap)?;
            let mut a = a.transpose();
            symmetrize(&mut a);
            let eig = SymmetricEigen::new(a);
            let c = l.transpose().solve_upper_triangular(&eig.eigenvectors).ok_or(Error::IndefiniteOverlap)?;
            (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), c)
        }
        None => canonical_solve(&hs, &ss)?,
    };
    // A first-order Löwdin step restores cᵀ S c = 1 lost in the triangular solves.
    let m = vecs.ncols();
    let mut err = compensated_gram(&vecs, &ss);
    for i in 0..m {
        err[(i, i)] -= 1.0;
    }
    let vecs = &vecs - &vecs * err * 0.5;
    // Residual check in the equilibrated problem.
    let hnorm = hs.norm();
    for (k, &e) in vals.iter().enumerate() {
        let c = vecs.column(k);
        let r = (&hs * c - &ss * c * e).norm() / (hnorm * c.norm().max(1e-300));
        if !(r <= RESIDUAL_TOL) {
            return Err(Error::EigenResidual { residual: r });
        }
    }
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let mut out = DMatrix::zeros(n, vals.len());
    let mut energies = Vec::with_capacity(vals.len());
    for (col, &k) in order.iter().enumerate() {
        energies.push(vals[k]);
        let v = vecs.column(k);
        // Sign convention on the equilibrated coefficients.
        let (imax, _) = v.iter().enumerate().fold((0, 0.0), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
        let sign = if v[imax] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            out[(i, col)] = sign * v[i] * d[i];
        }
    }
    Ok((energies, out))
}

/// Dot product accumulated in double-double (Ogita–Rump–Oishi `Dot2`).
fn dot2(a: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut hi, mut lo) = (0.0_f64, 0.0_f64);
    for (x, y) in a {
        let p = x * y;
        let ep = x.mul_add(y, -p);
        let t = hi + p;
        let z = t - hi;
        lo += (hi - (t - z)) + (p - z) + ep;
        hi = t;
    }
    (hi, lo)
}

/// `Vᵀ S V` with compensated accumulation, `S` symmetric.
fn compensated_gram(v: &DMatrix<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = v.shape();
    let mut w_hi = DMatrix::zeros(n, m);
    let mut w_lo = DMatrix::zeros(n, m);
    for j in 0..m {
        let vj = v.column(j);
        let vj = vj.as_slice();
        for k in 0..n {
            let sk = s.column(k);
            let (h, l) = dot2(sk.as_slice().iter().copied().zip(vj.iter().copied()));
            w_hi[(k, j)] = h;
            w_lo[(k, j)] = l;
        }
    }
    let mut g = DMatrix::zeros(m, m);
    for j in 0..m {
        let (wh, wl) = (w_hi.column(j), w_lo.column(j));
        for i in 0..m {
            let vi = v.column(i);
            let (h, l) = dot2(vi.as_slice().iter().copied().zip(wh.as_slice().iter().copied()));
            let tail: f64 = vi.iter().zip(wl.iter()).map(|(a, b)| a * b).sum();
            g[(i, j)] = h + (l + tail);
        }
    }
    g
}

fn canonical_solve(hs: &DMatrix<f64>, ss: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(ss.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if !(lmax > 0.0) {
        return Err(Error::IndefiniteOverlap);
    }
    let keep: Vec<usize> = (0..ss.nrows()).filter(|&i| eig.eigenvalues[i] > CANONICAL_CUTOFF * lmax).collect();
    if keep.is_empty() {
        return Err(Error::IndefiniteOverlap);
    }
    let mut x = DMatrix::zeros(ss.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let f = 1.0 / eig.eigenvalues[i].sqrt();
        x.set_column(c, &(eig.eigenvectors.column(i) * f));
    }
    let mut a = x.transpose() * hs * &x;
    symmetrize(&mut a);
    let e2 = SymmetricEigen::new(a);
    let c = &x * &e2.eigenvectors;
    Ok((e2.eigenvalues.iter().copied().collect(), c))
}

pub fn solve_spectrum(spec: &BasisSpec) -> Result<RadialSpectrum> {
    let z_alpha = spec.z.abs() * spec.alpha();
    if z_alpha >= spec.kappa.unsigned_abs() as f64 {
        return Err(Error::Supercritical { z_alpha, kappa: spec.kappa });
    }
    let m = assemble_matrices(spec)?;
    let (energies, c) = solve_generalized(&m.h, &m.s)?;
    Ok(RadialSpectrum {
        kappa: spec.kappa,
        z: spec.z,
        spec: *spec,
        dim: c.nrows(),
        coeffs: c.as_slice().to_vec(),
        energies,
    })
}

/// Point-nucleus Dirac–Coulomb eigenvalue in units of mc².
pub fn exact_dirac_coulomb_energy(n: u32, kappa: i32, z: f64, alpha_inv: f64) -> Result<f64> {
    if kappa == 0 {
        return Err(Error::ZeroKappa);
    }
    let abs_k = kappa.unsigned_abs();
    if n < abs_k || (n == abs_k && kappa > 0) {
        return Err(Error::InvalidInput(format!("no state with n = {n}, kappa = {kappa}")));
    }
    let za = z / alpha_inv;
    let k = abs_k as f64;
    if za >= k {
        return Err(Error::Supercritical { z_alpha: za, kappa });
    }
    let gamma = (k * k - za * za).sqrt();
    let d = n as f64 - k + gamma;
    Ok(1.0 / (1.0 + (za / d).powi(2)).sqrt())
}
