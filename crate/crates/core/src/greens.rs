//! Spectral families entering the many-potential difference.

use crate::basis::BasisSpec;
use crate::dirac::{solve_spectrum, RadialSpectrum};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_DELTA_Z: f64 = 0.5;
pub const DEFAULT_RICHARDSON_TOL: f64 = 1e-6;

/// Anything that can hand out a solved spectrum for a basis specification.
pub trait SpectrumSource {
    fn spectrum(&self, spec: &BasisSpec) -> Result<RadialSpectrum>;
}

/// Solves every request from scratch.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectSolver;

impl SpectrumSource for DirectSolver {
    fn spectrum(&self, spec: &BasisSpec) -> Result<RadialSpectrum> {
        solve_spectrum(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Bound,
    Free,
    OnePotential,
}

/// Spectra of one family for one κ together with the linear combination that
/// turns per-spectrum functional values into the family value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpectra {
    pub kind: FamilyKind,
    pub members: Vec<RadialSpectrum>,
    /// Nuclear charge multiplying the derivative (one-potential only).
    pub z_nuc: f64,
    pub delta_z: f64,
    pub richardson_tol: f64,
}

impl FamilySpectra {
    /// Combine functional values `F[G_m]`, one per member, into the family value.
    pub fn combine(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.members.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} functional values, got {}",
                self.members.len(),
                values.len()
            )));
        }
        match self.kind {
            FamilyKind::Bound | FamilyKind::Free => Ok(values[0]),
            FamilyKind::OnePotential => {
                let (r, rh) = self.richardson(values);
                let change = (r - rh).abs() / r.abs().max(f64::MIN_POSITIVE);
                let floor = 1e-12 * values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if change > self.richardson_tol && (r - rh).abs() > floor {
                    return Err(Error::UnstableDerivative { change });
                }
                Ok(r)
            }
        }
    }

    /// Central differences at `δZ`, `δZ/2` and `δZ/4`, scaled by the nuclear charge.
    pub fn derivatives(&self, values: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        let mut h = self.delta_z;
        for (i, d) in out.iter_mut().enumerate() {
            *d = self.z_nuc * (values[2 * i] - values[2 * i + 1]) / (2.0 * h);
            h *= 0.5;
        }
        out
    }

    /// Richardson-extrapolated derivative from steps `(δZ, δZ/2)` and from `(δZ/2, δZ/4)`.
    pub fn richardson(&self, values: &[f64]) -> (f64, f64) {
        let [d0, d1, d2] = self.derivatives(values);
        ((4.0 * d1 - d0) / 3.0, (4.0 * d2 - d1) / 3.0)
    }
}

/// Bound, free, or one-potential spectra for a set of κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFamily {
    pub kind: FamilyKind,
    pub spec: BasisSpec,
    pub spectra: BTreeMap<i32, FamilySpectra>,
}

impl SpectralFamily {
    pub fn get(&self, kappa: i32) -> Result<&FamilySpectra> {
        self.spectra
            .get(&kappa)
            .ok_or_else(|| Error::InvalidInput(format!("family has no spectra for kappa {kappa}")))
    }
}

fn single(kind: FamilyKind, s: RadialSpectrum) -> FamilySpectra {
    FamilySpectra { kind, members: vec![s], z_nuc: 0.0, delta_z: 0.0, richardson_tol: 0.0 }
}

pub fn bound_family(src: &impl SpectrumSource, spec: &BasisSpec, kappas: &[i32]) -> Result<SpectralFamily> {
    let mut spectra = BTreeMap::new();
    for &k in kappas {
        spectra.insert(k, single(FamilyKind::Bound, src.spectrum(&spec.with_kappa(k))?));
    }
    Ok(SpectralFamily { kind: FamilyKind::Bound, spec: *spec, spectra })
}

pub fn free_family(src: &impl SpectrumSource, spec: &BasisSpec, kappas: &[i32]) -> Result<SpectralFamily> {
    let mut spectra = BTreeMap::new();
    for &k in kappas {
        let s = spec.with_kappa(k).with_charge(0.0);
        spectra.insert(k, single(FamilyKind::Free, src.spectrum(&s)?));
    }
    Ok(SpectralFamily { kind: FamilyKind::Free, spec: *spec, spectra })
}

/// Spectra at `Z = ±δZ`, `±δZ/2` and `±δZ/4`. The family value is the
/// Richardson combination of the two coarser central differences; the finer
/// pair repeats it at half the step as a consistency check.
pub fn one_potential_family(
    src: &impl SpectrumSource,
    spec: &BasisSpec,
    delta_z: f64,
    richardson_tol: f64,
    kappas: &[i32],
) -> Result<SpectralFamily> {
    if !(delta_z > 0.0 && delta_z <= 10.0) {
        return Err(Error::InvalidInput(format!("delta_z must lie in (0, 10], got {delta_z}")));
    }
    let mut spectra = BTreeMap::new();
    for &k in kappas {
        let base = spec.with_kappa(k);
        let members = [1.0, -1.0, 0.5, -0.5, 0.25, -0.25]
            .iter()
            .map(|&f| src.spectrum(&base.with_charge(f * delta_z)))
            .collect::<Result<Vec<_>>>()?;
        spectra.insert(
            k,
            FamilySpectra { kind: FamilyKind::OnePotential, members, z_nuc: spec.z, delta_z, richardson_tol },
        );
    }
    Ok(SpectralFamily { kind: FamilyKind::OnePotential, spec: *spec, spectra })
}
