//! Cached per-κ jobs and the assembled report.

use crate::cache::{Cache, Scalar};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use gbse_core::basis::BasisSpec;
use gbse_core::dirac::{solve_spectrum, RadialSpectrum};
use gbse_core::greens::{bound_family, free_family, one_potential_family, SpectrumSource};
use gbse_core::momentum_terms::{one_potential_term, zero_potential_term, MomentumWave, Renormalization};
use gbse_core::mp_assembly::{many_potential_kappa, to_f_units, Families, PartialWaveResult, SelfEnergyReport};
use gbse_core::photon_pw::{build_kgrid, KGridConfig, ReferenceState};
use rayon::prelude::*;
use serde::Serialize;

/// Solver that stores every spectrum it produces under a family label.
pub struct CachedSolver<'a> {
    pub cache: &'a Cache,
    pub family: &'static str,
}

impl SpectrumSource for CachedSolver<'_> {
    fn spectrum(&self, spec: &BasisSpec) -> gbse_core::Result<RadialSpectrum> {
        let r = self.cache.get_or_compute(self.family, Some(spec.kappa), spec, || Ok(solve_spectrum(spec)?));
        r.map_err(|e| match e {
            Error::Core(c) => c,
            other => gbse_core::Error::InvalidInput(other.to_string()),
        })
    }
}

#[derive(Serialize)]
struct ReferenceInputs<'a> {
    spec: &'a BasisSpec,
    ref_n: u32,
}

#[derive(Serialize)]
struct RowInputs<'a> {
    reference: ReferenceInputs<'a>,
    kappa: i32,
    delta_z: f64,
    richardson_tol: f64,
    kgrid: &'a KGridConfig,
    k_refine_tol: f64,
}

#[derive(Serialize)]
struct OnePotInputs<'a> {
    reference: ReferenceInputs<'a>,
    grid: gbse_core::momentum_terms::OnePotentialGrid,
}

/// One cell of a basis-convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub n_b: usize,
    pub beta: f64,
    pub kappa_abs: u32,
    pub e_mp_pair: f64,
}

pub struct Pipeline {
    pub cfg: RunConfig,
    pub cache: Cache,
    pool: rayon::ThreadPool,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let cache = Cache::new(&cfg.cache_dir)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidValue { key: "threads".into(), msg: e.to_string() })?;
        Ok(Self { cfg, cache, pool })
    }

    /// Spectrum of one κ at the configured charge, or at `Z = 0` with `free`.
    pub fn spectrum(&self, kappa: i32, free: bool) -> Result<RadialSpectrum> {
        let mut spec = self.cfg.basis(kappa);
        let family = if free {
            spec = spec.with_charge(0.0);
            "free"
        } else {
            "bound"
        };
        Ok(CachedSolver { cache: &self.cache, family }.spectrum(&spec)?)
    }

    /// Reference state of `cfg`: state `n − ℓ − 1` above the lowest positive level.
    pub fn reference(&self, cfg: &RunConfig) -> Result<ReferenceState> {
        let spec = cfg.basis(cfg.ref_kappa);
        let s = CachedSolver { cache: &self.cache, family: "bound" }.spectrum(&spec)?;
        let l = if cfg.ref_kappa < 0 { -cfg.ref_kappa - 1 } else { cfg.ref_kappa } as u32;
        let lowest = s.lowest_positive().ok_or_else(|| gbse_core::Error::InvalidInput("no positive-energy state".into()))?;
        Ok(ReferenceState::from_spectrum(&s, lowest + (cfg.ref_n - l - 1) as usize)?)
    }

    fn n_cubed(cfg: &RunConfig) -> f64 {
        (cfg.ref_n as f64).powi(3)
    }

    /// Many-potential row of one κ for an arbitrary variant of the run configuration.
    pub fn mp_row_with(&self, cfg: &RunConfig, kappa: i32) -> Result<PartialWaveResult> {
        if kappa == 0 {
            return Err(gbse_core::Error::ZeroKappa.into());
        }
        let spec = cfg.basis(cfg.ref_kappa);
        let kgrid = cfg.kgrid();
        let inputs = RowInputs {
            reference: ReferenceInputs { spec: &spec, ref_n: cfg.ref_n },
            kappa,
            delta_z: cfg.delta_z,
            richardson_tol: cfg.richardson_tol,
            kgrid: &kgrid,
            k_refine_tol: cfg.k_refine_tol,
        };
        self.cache.get_or_compute("mp", Some(kappa), &inputs, || {
            log::info!("computing many-potential row kappa = {kappa} (n_b = {}, beta = {})", cfg.n_b, cfg.beta);
            let reference = self.reference(cfg)?;
            let grid = build_kgrid(&kgrid)?;
            let ks = [kappa];
            let b = bound_family(&CachedSolver { cache: &self.cache, family: "bound" }, &spec, &ks)?;
            let f = free_family(&CachedSolver { cache: &self.cache, family: "free" }, &spec, &ks)?;
            let o = one_potential_family(&CachedSolver { cache: &self.cache, family: "onepot" }, &spec, cfg.delta_z, cfg.richardson_tol, &ks)?;
            let tol = (cfg.k_refine_tol > 0.0).then_some(cfg.k_refine_tol);
            let mut r = many_potential_kappa(&reference, kappa, &Families { bound: &b, free: &f, one: &o }, &grid, tol)?;
            let n3 = Self::n_cubed(cfg);
            if n3 != 1.0 {
                let d = r.diagnostics.clone();
                r = PartialWaveResult::new(kappa, r.e_bound * n3, r.e_zero * n3, r.e_one * n3);
                r.diagnostics = d;
            }
            Ok(r)
        })
    }

    pub fn mp_row(&self, kappa: i32) -> Result<PartialWaveResult> {
        self.mp_row_with(&self.cfg, kappa)
    }

    /// Rows for `kappas` on the worker pool, returned in input order.
    pub fn mp_rows_with(&self, cfg: &RunConfig, kappas: &[i32]) -> Result<Vec<PartialWaveResult>> {
        self.pool.install(|| kappas.par_iter().map(|&k| self.mp_row_with(cfg, k)).collect())
    }

    pub fn mp_rows(&self, kappas: &[i32]) -> Result<Vec<PartialWaveResult>> {
        self.mp_rows_with(&self.cfg, kappas)
    }

    /// Renormalized zero-potential term in F units.
    pub fn zero_potential(&self) -> Result<f64> {
        let spec = self.cfg.basis(self.cfg.ref_kappa);
        let inputs = ReferenceInputs { spec: &spec, ref_n: self.cfg.ref_n };
        let v = self.cache.get_or_compute("zeropot", None, &inputs, || {
            log::info!("computing zero-potential term");
            let w = MomentumWave::from_reference(&self.reference(&self.cfg)?);
            let e = self.pool.install(|| zero_potential_term(&w, Renormalization::default()))?;
            Ok(Scalar(self.to_f(e)))
        })?;
        Ok(v.0)
    }

    /// Renormalized one-potential term in F units.
    pub fn one_potential(&self) -> Result<f64> {
        let spec = self.cfg.basis(self.cfg.ref_kappa);
        let grid = self.cfg.one_potential_grid();
        let inputs = OnePotInputs { reference: ReferenceInputs { spec: &spec, ref_n: self.cfg.ref_n }, grid };
        let v = self.cache.get_or_compute("onepot_term", None, &inputs, || {
            log::info!("computing one-potential term");
            let w = MomentumWave::from_reference(&self.reference(&self.cfg)?);
            let e = self.pool.install(|| one_potential_term(&w, self.cfg.z, Renormalization::default(), &grid))?;
            Ok(Scalar(self.to_f(e)))
        })?;
        Ok(v.0)
    }

    fn to_f(&self, e: f64) -> f64 {
        to_f_units(e, self.cfg.z, self.cfg.ref_n, self.cfg.alpha_inv)
    }

    /// Basis error of the summed many-potential term.
    ///
    /// The largest change of a `basis_check` row between `n_b` and
    /// `basis_check_nb` is taken as a uniform per-term error and combined
    /// over the `2·kappa_max` summed terms in quadrature.
    pub fn basis_sigma(&self, rows: &[PartialWaveResult]) -> Result<f64> {
        if self.cfg.basis_check.is_empty() {
            return Ok(0.0);
        }
        let mut alt = self.cfg.clone();
        alt.n_b = self.cfg.basis_check_nb;
        let other = self.mp_rows_with(&alt, &self.cfg.basis_check)?;
        let mut worst = 0.0f64;
        for o in &other {
            let base = match rows.iter().find(|r| r.kappa == o.kappa) {
                Some(r) => r.clone(),
                None => self.mp_row(o.kappa)?,
            };
            worst = worst.max((base.e_mp - o.e_mp).abs());
        }
        Ok(worst * (2.0 * self.cfg.kappa_max as f64).sqrt())
    }

    /// Every row, both momentum-space terms, the tail and the basis error.
    pub fn assemble(&self) -> Result<SelfEnergyReport> {
        let rows = self.mp_rows(&self.cfg.kappas())?;
        let e0 = self.zero_potential()?;
        let e1 = self.one_potential()?;
        let sigma = self.basis_sigma(&rows)?;
        let rep = SelfEnergyReport::assemble(rows, self.cfg.kappa_max, e0, e1, sigma, &self.cfg.tail(), self.cfg.fingerprint())?;
        log::info!("cache: {} hits, {} misses", self.cache.hits(), self.cache.misses());
        Ok(rep)
    }

    /// `e_mp(−|κ|) + e_mp(|κ|)` over a grid of basis sizes and ratios.
    pub fn sweep(&self, n_bs: &[usize], betas: &[f64], kappa_abs: u32) -> Result<Vec<SweepCell>> {
        if kappa_abs == 0 {
            return Err(gbse_core::Error::ZeroKappa.into());
        }
        let k = kappa_abs as i32;
        let mut jobs = Vec::new();
        for &beta in betas {
            for &n_b in n_bs {
                let mut c = self.cfg.clone();
                c.n_b = n_b;
                c.beta = beta;
                c.validate()?;
                jobs.push(c);
            }
        }
        let pairs: Vec<(usize, i32)> = (0..jobs.len()).flat_map(|j| [(j, -k), (j, k)]).collect();
        let rows: Vec<PartialWaveResult> =
            self.pool.install(|| pairs.par_iter().map(|&(j, kk)| self.mp_row_with(&jobs[j], kk)).collect::<Result<_>>())?;
        Ok(jobs
            .iter()
            .zip(rows.chunks(2))
            .map(|(c, r)| SweepCell {
                n_b: c.n_b,
                beta: c.beta,
                kappa_abs,
                e_mp_pair: r[0].e_mp + r[1].e_mp,
            })
            .collect())
    }
}
