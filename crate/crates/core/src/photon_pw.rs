//! Partial-wave self-energy engine: Feynman-gauge multipole expansion of the
//! photon propagator, analytic energy-contour integration and quadrature over
//! the photon momentum.

use crate::angular::{allowed_multipoles, photon_angular_weight, KappaChannel, Vertex};
use crate::basis::{BasisSpec, BesselMomentKernel};
use crate::dirac::{KineticBalancedBasis, RadialSpectrum};
use crate::error::{Error, Result};
use crate::greens::FamilySpectra;
use crate::quadrature::{KahanSum, Mapping, Panel, QuadratureGrid};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Smallest energy denominator tolerated before a pole is reported.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// Layout of the photon-momentum grid, in units of mc/ħ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KGridConfig {
    /// Linear panels `(lo, hi, nodes)` covering the low-momentum region.
    pub linear: Vec<(f64, f64, usize)>,
    /// Logarithmic panels, one decade each, from the last linear edge to `k_max`.
    pub nodes_per_decade: usize,
    pub k_max: f64,
    pub tail_nodes: usize,
}

impl Default for KGridConfig {
    fn default() -> Self {
        Self {
            linear: vec![(0.0, 1.0, 64), (1.0, 10.0, 64), (10.0, 100.0, 48)],
            nodes_per_decade: 32,
            k_max: 1e8,
            tail_nodes: 48,
        }
    }
}

pub fn build_kgrid(cfg: &KGridConfig) -> Result<QuadratureGrid> {
    let mut panels = Vec::new();
    let mut edge = 0.0_f64;
    for &(lo, hi, n) in &cfg.linear {
        if (lo - edge).abs() > 1e-12 * hi.abs() {
            return Err(Error::Quadrature(format!("linear panels must be contiguous from 0 (gap at {edge})")));
        }
        panels.push(Panel { lo, hi, nodes: n, mapping: Mapping::Linear });
        edge = hi;
    }
    if cfg.nodes_per_decade > 0 && edge > 0.0 {
        while edge < cfg.k_max * (1.0 - 1e-12) {
            let hi = (edge * 10.0).min(cfg.k_max);
            panels.push(Panel { lo: edge, hi, nodes: cfg.nodes_per_decade, mapping: Mapping::Logarithmic });
            edge = hi;
        }
    }
    if cfg.tail_nodes > 0 {
        let scale = if edge > 0.0 { edge } else { 1.0 };
        panels.push(Panel { lo: edge, hi: f64::INFINITY, nodes: cfg.tail_nodes, mapping: Mapping::Rational { scale } });
    }
    let grid = QuadratureGrid::from_panels(panels)?;
    if grid.len() < 32 {
        return Err(Error::Quadrature(format!("grid has only {} nodes", grid.len())));
    }
    Ok(grid)
}

/// `1/(E_a − E_n − sgn(E_n)·k)`.
pub fn photon_weight(e_a: f64, e_n: f64, k: f64) -> Result<f64> {
    let d = e_a - e_n - e_n.signum() * k;
    if !(d.abs() >= POLE_THRESHOLD) {
        return Err(Error::PhotonPole { denominator: d });
    }
    Ok(1.0 / d)
}

/// Reference state `a`: its channel, energy and expansion coefficients.
#[derive(Debug, Clone)]
pub struct ReferenceState {
    pub channel: KappaChannel,
    pub energy: f64,
    pub large: Vec<f64>,
    pub small: Vec<f64>,
    pub basis: KineticBalancedBasis,
}

impl ReferenceState {
    pub fn from_spectrum(spectrum: &RadialSpectrum, index: usize) -> Result<Self> {
        if index >= spectrum.len() {
            return Err(Error::InvalidInput(format!("state {index} outside spectrum of {}", spectrum.len())));
        }
        Ok(Self {
            channel: KappaChannel::new(spectrum.kappa)?,
            energy: spectrum.energies[index],
            large: spectrum.large(index).to_vec(),
            small: spectrum.small(index).to_vec(),
            basis: KineticBalancedBasis::new(&spectrum.spec)?,
        })
    }

    /// Lowest positive-energy state of the spectrum.
    pub fn ground(spectrum: &RadialSpectrum) -> Result<Self> {
        let i = spectrum
            .lowest_positive()
            .ok_or_else(|| Error::InvalidInput("spectrum has no positive-energy state".into()))?;
        Self::from_spectrum(spectrum, i)
    }
}

/// Which radial combination a block of elements represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementKind {
    /// `R_T = ∫ j_L (P_a P_n + Q_a Q_n) dr`.
    Temporal,
    /// `R_1 = ∫ j_L P_a Q_n dr`.
    LargeSmall,
    /// `R_2 = ∫ j_L Q_a P_n dr`.
    SmallLarge,
}

#[derive(Debug, Clone)]
struct KernelBlock {
    l: u32,
    kind: ElementKind,
    /// Row-major over `(i, j)`: reference index `i`, intermediate index `j`.
    /// Temporal blocks hold large–large then small–small kernels.
    kernels: Vec<BesselMomentKernel>,
}

/// Radial elements of the reference state against a family spectrum.
///
/// `values[b]` is a `nodes × states` matrix for block `b`.
#[derive(Debug, Clone)]
pub struct MultipoleElementTable {
    pub kappa_n: i32,
    pub blocks: Vec<(u32, ElementKind)>,
    pub k: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
}

/// Kernels contracted with the reference coefficients: `nodes × 2n_b` per block.
#[derive(Debug, Clone)]
pub struct ReducedKernels {
    pub k: Vec<f64>,
    pub blocks: Vec<DMatrix<f64>>,
}

/// Angular weights in the order the engine contracts them.
#[derive(Debug, Clone, Copy)]
struct TemporalTerm {
    block: usize,
    w: f64,
}

#[derive(Debug, Clone, Copy)]
struct SpatialTerm {
    r1: Option<usize>,
    r2: Option<usize>,
    w_aa: f64,
    w_bb: f64,
    w_ab: f64,
}

/// Evaluates the self-energy-like term of one intermediate κ for any family.
#[derive(Debug, Clone)]
pub struct PartialWaveEngine {
    pub reference: ReferenceState,
    pub channel_n: KappaChannel,
    pub alpha: f64,
    blocks: Vec<KernelBlock>,
    temporal: Vec<TemporalTerm>,
    spatial: Vec<SpatialTerm>,
    n_b: usize,
}

impl PartialWaveEngine {
    /// `spec_n` fixes the intermediate basis; its charge is irrelevant.
    pub fn new(reference: ReferenceState, spec_n: &BasisSpec) -> Result<Self> {
        let basis_n = KineticBalancedBasis::new(spec_n)?;
        let ca = reference.channel;
        let cn = KappaChannel::new(spec_n.kappa)?;
        let ra = &reference.basis;
        let mut blocks = Vec::new();
        let mut temporal = Vec::new();
        let mut spatial = Vec::new();

        for l in allowed_multipoles(&ca, &cn, true) {
            let w = photon_angular_weight(l, &ca, &cn, Vertex::Temporal);
            if w == 0.0 {
                continue;
            }
            let mut kernels = Vec::with_capacity(2 * ra.len() * basis_n.len());
            for f in &ra.large_exp {
                for g in &basis_n.large_exp {
                    kernels.push(BesselMomentKernel::new(f, g, l)?);
                }
            }
            for f in &ra.small_exp {
                for g in &basis_n.small_exp {
                    kernels.push(BesselMomentKernel::new(f, g, l)?);
                }
            }
            temporal.push(TemporalTerm { block: blocks.len(), w });
            blocks.push(KernelBlock { l, kind: ElementKind::Temporal, kernels });
        }

        for l in allowed_multipoles(&ca, &cn, false) {
            let w_aa = photon_angular_weight(l, &ca, &cn, Vertex::SpatialLargeSmall);
            let w_bb = photon_angular_weight(l, &ca, &cn, Vertex::SpatialSmallLarge);
            let w_ab = photon_angular_weight(l, &ca, &cn, Vertex::SpatialCross);
            let mut term = SpatialTerm { r1: None, r2: None, w_aa, w_bb, w_ab };
            if w_aa != 0.0 {
                let mut kernels = Vec::with_capacity(ra.len() * basis_n.len());
                for f in &ra.large_exp {
                    for g in &basis_n.small_exp {
                        kernels.push(BesselMomentKernel::new(f, g, l)?);
                    }
                }
                term.r1 = Some(blocks.len());
                blocks.push(KernelBlock { l, kind: ElementKind::LargeSmall, kernels });
            }
            if w_bb != 0.0 {
                let mut kernels = Vec::with_capacity(ra.len() * basis_n.len());
                for f in &ra.small_exp {
                    for g in &basis_n.large_exp {
                        kernels.push(BesselMomentKernel::new(f, g, l)?);
                    }
                }
                term.r2 = Some(blocks.len());
                blocks.push(KernelBlock { l, kind: ElementKind::SmallLarge, kernels });
            }
            if term.r1.is_some() || term.r2.is_some() {
                spatial.push(term);
            }
        }

        Ok(Self {
            alpha: reference.basis.spec.alpha(),
            n_b: basis_n.len(),
            reference,
            channel_n: cn,
            blocks,
            temporal,
            spatial,
        })
    }

    /// Contract the kernels with the reference coefficients at every `k`.
    pub fn reduce(&self, ks: &[f64]) -> Result<ReducedKernels> {
        let nb = self.n_b;
        let na = self.reference.large.len();
        let mut out = Vec::with_capacity(self.blocks.len());
        for blk in &self.blocks {
            // Column j of the 2n_b layout, evaluated at all nodes.
            let cols: Vec<Result<Vec<f64>>> = (0..2 * nb)
                .into_par_iter()
                .map(|col| {
                    let mut v = vec![0.0; ks.len()];
                    let (coef, offset, j) = match (blk.kind, col < nb) {
                        (ElementKind::Temporal, true) => (&self.reference.large, 0, col),
                        (ElementKind::Temporal, false) => (&self.reference.small, na * nb, col - nb),
                        (ElementKind::LargeSmall, false) => (&self.reference.large, 0, col - nb),
                        (ElementKind::SmallLarge, true) => (&self.reference.small, 0, col),
                        _ => return Ok(v),
                    };
                    for (i, &c) in coef.iter().enumerate() {
                        let ker = &blk.kernels[offset + i * nb + j];
                        for (slot, &k) in v.iter_mut().zip(ks) {
                            *slot += c * ker.eval(k)?;
                        }
                    }
                    Ok(v)
                })
                .collect();
            let mut m = DMatrix::zeros(ks.len(), 2 * nb);
            for (col, v) in cols.into_iter().enumerate() {
                let v = v?;
                for (row, x) in v.into_iter().enumerate() {
                    m[(row, col)] = x;
                }
            }
            out.push(m);
        }
        Ok(ReducedKernels { k: ks.to_vec(), blocks: out })
    }

    pub fn multipole_elements(&self, reduced: &ReducedKernels, spectrum: &RadialSpectrum) -> Result<MultipoleElementTable> {
        if spectrum.kappa != self.channel_n.kappa || spectrum.n_b() != self.n_b {
            return Err(Error::InvalidInput(format!(
                "spectrum (kappa {}, n_b {}) does not match engine (kappa {}, n_b {})",
                spectrum.kappa,
                spectrum.n_b(),
                self.channel_n.kappa,
                self.n_b
            )));
        }
        let c = spectrum.coeff_matrix();
        let values: Vec<DMatrix<f64>> = reduced.blocks.iter().map(|u| u * &c).collect();
        if values.iter().any(|m| m.iter().any(|x| !x.is_finite())) {
            return Err(Error::Quadrature("non-finite multipole element".into()));
        }
        Ok(MultipoleElementTable {
            kappa_n: spectrum.kappa,
            blocks: self.blocks.iter().map(|b| (b.l, b.kind)).collect(),
            k: reduced.k.clone(),
            values,
        })
    }

    /// Integrand in `k` at every node of the table.
    pub fn integrand(&self, table: &MultipoleElementTable, spectrum: &RadialSpectrum) -> Result<Vec<f64>> {
        let ea = self.reference.energy;
        let mut out = Vec::with_capacity(table.k.len());
        for (row, &k) in table.k.iter().enumerate() {
            let mut acc = KahanSum::default();
            for (n, &en) in spectrum.energies.iter().enumerate() {
                let mut ang = 0.0;
                for t in &self.temporal {
                    let r = table.values[t.block][(row, n)];
                    ang += t.w * r * r;
                }
                for t in &self.spatial {
                    let r1 = t.r1.map_or(0.0, |b| table.values[b][(row, n)]);
                    let r2 = t.r2.map_or(0.0, |b| table.values[b][(row, n)]);
                    ang -= t.w_aa * r1 * r1 + t.w_bb * r2 * r2 - 2.0 * t.w_ab * r1 * r2;
                }
                if ang == 0.0 {
                    continue;
                }
                // At k = 0 only the n = a denominator survives the k factor.
                let kw = if k == 0.0 {
                    if (ea - en).abs() < POLE_THRESHOLD {
                        -1.0
                    } else {
                        0.0
                    }
                } else {
                    k * photon_weight(ea, en, k)?
                };
                acc.add(kw * ang);
            }
            out.push(-4.0 * self.alpha * acc.value());
        }
        Ok(out)
    }

    /// Integrand values at arbitrary momenta.
    pub fn integrand_at(&self, ks: &[f64], spectrum: &RadialSpectrum) -> Result<Vec<f64>> {
        let red = self.reduce(ks)?;
        let tab = self.multipole_elements(&red, spectrum)?;
        self.integrand(&tab, spectrum)
    }

    /// The term for each spectrum on the grid, in units of mc².
    pub fn terms(&self, grid: &QuadratureGrid, spectra: &[&RadialSpectrum]) -> Result<Vec<f64>> {
        let ks: Vec<f64> = grid.nodes.iter().map(|n| n.0).collect();
        let red = self.reduce(&ks)?;
        spectra
            .iter()
            .map(|s| {
                let tab = self.multipole_elements(&red, s)?;
                let f = self.integrand(&tab, s)?;
                let mut acc = KahanSum::default();
                for (&(_, w), v) in grid.nodes.iter().zip(&f) {
                    acc.add(w * v);
                }
                Ok(acc.value())
            })
            .collect()
    }

    /// The family value of the term in units of mc².
    pub fn family_term(&self, grid: &QuadratureGrid, family: &FamilySpectra) -> Result<f64> {
        let refs: Vec<&RadialSpectrum> = family.members.iter().collect();
        family.combine(&self.terms(grid, &refs)?)
    }
}

/// One partial-wave term for a family of intermediate states.
pub fn partial_wave_term(
    reference: &ReferenceState,
    family: &FamilySpectra,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let first = family
        .members
        .first()
        .ok_or_else(|| Error::InvalidInput("empty family".into()))?;
    let engine = PartialWaveEngine::new(reference.clone(), &first.spec)?;
    engine.family_term(grid, family)
}
