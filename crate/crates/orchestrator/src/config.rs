//! Run configuration: a flat `key = value` file, one key per line.
//!
//! Blank lines and lines starting with `#` are ignored. Every key can also be
//! given on the command line as `--key value`, which takes precedence.

use crate::error::{Error, Result};
use gbse_core::basis::BasisSpec;
use gbse_core::mp_assembly::{TailConfig, TailScheme};
use gbse_core::momentum_terms::OnePotentialGrid;
use gbse_core::photon_pw::KGridConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

/// Documented keys, in canonical order.
pub const KEYS: &[(&str, &str)] = &[
    ("z", "nuclear charge"),
    ("alpha_inv", "inverse fine-structure constant"),
    ("ref_n", "principal quantum number of the reference state"),
    ("ref_kappa", "relativistic quantum number of the reference state"),
    ("zeta1", "smallest Gaussian exponent, Bohr^-2"),
    ("beta", "even-tempered exponent ratio"),
    ("n_b", "basis functions per component"),
    ("kappa_max", "largest |kappa| summed before extrapolation"),
    ("delta_z", "charge step of the one-potential derivative"),
    ("richardson_tol", "relative tolerance of the step-halving check"),
    ("k_nodes_per_decade", "photon-momentum nodes per logarithmic decade"),
    ("k_max", "end of the logarithmic photon-momentum panels, mc/hbar"),
    ("k_tail_nodes", "nodes of the rational tail panel"),
    ("k_refine_tol", "relative tolerance of a node-doubling check, 0 disables it"),
    ("op_nodes_per_decade", "one-potential momentum nodes per decade"),
    ("op_cos_nodes", "one-potential angular nodes"),
    ("op_p_min", "lowest momentum of the one-potential log panels"),
    ("tail_powers", "inverse powers of |kappa| in the tail fit"),
    ("tail_points", "trailing |kappa| values used by the tail fit"),
    ("basis_check", "kappas recomputed at basis_check_nb for the basis error, empty disables"),
    ("basis_check_nb", "basis size of the basis-error rerun"),
    ("output_dir", "directory for CSV and JSON outputs"),
    ("cache_dir", "directory for cached spectra and rows (GBSE_CACHE_DIR overrides the default)"),
    ("threads", "worker threads, 0 uses all cores"),
];

/// Keys that do not change any computed number.
pub const NON_PHYSICAL: &[&str] = &["output_dir", "cache_dir", "threads"];

pub const CACHE_ENV: &str = "GBSE_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub z: f64,
    pub alpha_inv: f64,
    pub ref_n: u32,
    pub ref_kappa: i32,
    pub zeta1: f64,
    pub beta: f64,
    pub n_b: usize,
    pub kappa_max: u32,
    pub delta_z: f64,
    pub richardson_tol: f64,
    pub k_nodes_per_decade: usize,
    pub k_max: f64,
    pub k_tail_nodes: usize,
    pub k_refine_tol: f64,
    pub op_nodes_per_decade: usize,
    pub op_cos_nodes: usize,
    pub op_p_min: f64,
    pub tail_powers: Vec<i32>,
    pub tail_points: usize,
    pub basis_check: Vec<i32>,
    pub basis_check_nb: usize,
    pub output_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cache_dir = std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("gbse-cache"));
        Self {
            z: 92.0,
            alpha_inv: 137.0359895,
            ref_n: 1,
            ref_kappa: -1,
            zeta1: 0.01,
            beta: 1.5,
            n_b: 100,
            kappa_max: 15,
            delta_z: gbse_core::greens::DEFAULT_DELTA_Z,
            richardson_tol: gbse_core::greens::DEFAULT_RICHARDSON_TOL,
            k_nodes_per_decade: 32,
            k_max: 1e8,
            k_tail_nodes: 48,
            k_refine_tol: 0.0,
            op_nodes_per_decade: 16,
            op_cos_nodes: 16,
            op_p_min: 1e-5,
            tail_powers: vec![3, 4],
            tail_points: 6,
            basis_check: vec![-5, 5],
            basis_check_nb: 90,
            output_dir: PathBuf::from("gbse-out"),
            cache_dir,
            threads: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::InvalidValue { key: key.into(), msg: format!("`{v}`: {e}") })
}

fn parse_list(key: &str, v: &str) -> Result<Vec<i32>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_num(key, s)).collect()
}

fn list_text(v: &[i32]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parse a configuration file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config { line: i + 1, msg: format!("expected `key = value`, got `{line}`") })?;
            cfg.set(k.trim(), v.trim()).map_err(|e| Error::Config { line: i + 1, msg: e.to_string() })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "z" => self.z = parse_num(key, v)?,
            "alpha_inv" => self.alpha_inv = parse_num(key, v)?,
            "ref_n" => self.ref_n = parse_num(key, v)?,
            "ref_kappa" => self.ref_kappa = parse_num(key, v)?,
            "zeta1" => self.zeta1 = parse_num(key, v)?,
            "beta" => self.beta = parse_num(key, v)?,
            "n_b" => self.n_b = parse_num(key, v)?,
            "kappa_max" => self.kappa_max = parse_num(key, v)?,
            "delta_z" => self.delta_z = parse_num(key, v)?,
            "richardson_tol" => self.richardson_tol = parse_num(key, v)?,
            "k_nodes_per_decade" => self.k_nodes_per_decade = parse_num(key, v)?,
            "k_max" => self.k_max = parse_num(key, v)?,
            "k_tail_nodes" => self.k_tail_nodes = parse_num(key, v)?,
            "k_refine_tol" => self.k_refine_tol = parse_num(key, v)?,
            "op_nodes_per_decade" => self.op_nodes_per_decade = parse_num(key, v)?,
            "op_cos_nodes" => self.op_cos_nodes = parse_num(key, v)?,
            "op_p_min" => self.op_p_min = parse_num(key, v)?,
            "tail_powers" => self.tail_powers = parse_list(key, v)?,
            "tail_points" => self.tail_points = parse_num(key, v)?,
            "basis_check" => self.basis_check = parse_list(key, v)?,
            "basis_check_nb" => self.basis_check_nb = parse_num(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "cache_dir" => self.cache_dir = PathBuf::from(v),
            "threads" => self.threads = parse_num(key, v)?,
            _ => return Err(Error::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "z" => self.z.to_string(),
            "alpha_inv" => self.alpha_inv.to_string(),
            "ref_n" => self.ref_n.to_string(),
            "ref_kappa" => self.ref_kappa.to_string(),
            "zeta1" => self.zeta1.to_string(),
            "beta" => self.beta.to_string(),
            "n_b" => self.n_b.to_string(),
            "kappa_max" => self.kappa_max.to_string(),
            "delta_z" => self.delta_z.to_string(),
            "richardson_tol" => self.richardson_tol.to_string(),
            "k_nodes_per_decade" => self.k_nodes_per_decade.to_string(),
            "k_max" => self.k_max.to_string(),
            "k_tail_nodes" => self.k_tail_nodes.to_string(),
            "k_refine_tol" => self.k_refine_tol.to_string(),
            "op_nodes_per_decade" => self.op_nodes_per_decade.to_string(),
            "op_cos_nodes" => self.op_cos_nodes.to_string(),
            "op_p_min" => self.op_p_min.to_string(),
            "tail_powers" => list_text(&self.tail_powers),
            "tail_points" => self.tail_points.to_string(),
            "basis_check" => list_text(&self.basis_check),
            "basis_check_nb" => self.basis_check_nb.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            "cache_dir" => self.cache_dir.display().to_string(),
            "threads" => self.threads.to_string(),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| Err(Error::InvalidValue { key: key.into(), msg: msg.into() });
        if !(self.z > 0.0 && self.z.is_finite()) {
            return bad("z", "must be positive");
        }
        if !(self.alpha_inv > 0.0 && self.alpha_inv.is_finite()) {
            return bad("alpha_inv", "must be positive");
        }
        if self.ref_kappa == 0 {
            return bad("ref_kappa", "must be nonzero");
        }
        let l = if self.ref_kappa < 0 { -self.ref_kappa - 1 } else { self.ref_kappa };
        if (self.ref_n as i64) <= l as i64 {
            return bad("ref_n", "must exceed the orbital angular momentum of ref_kappa");
        }
        if !(self.zeta1 > 0.0 && self.zeta1.is_finite()) {
            return bad("zeta1", "must be positive");
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return bad("beta", "must exceed 1");
        }
        if self.n_b < 2 || self.basis_check_nb < 2 {
            return bad("n_b", "must be at least 2");
        }
        if self.kappa_max == 0 {
            return bad("kappa_max", "must be at least 1");
        }
        if !(self.delta_z > 0.0 && self.delta_z <= 10.0) {
            return bad("delta_z", "must lie in (0, 10]");
        }
        if !(self.richardson_tol > 0.0) {
            return bad("richardson_tol", "must be positive");
        }
        if !(self.k_max > 100.0 && self.k_max.is_finite()) {
            return bad("k_max", "must exceed 100");
        }
        if !(self.k_refine_tol >= 0.0) {
            return bad("k_refine_tol", "must be non-negative");
        }
        if self.op_nodes_per_decade == 0 || self.op_cos_nodes == 0 {
            return bad("op_nodes_per_decade", "one-potential node counts must be positive");
        }
        if !(self.op_p_min > 0.0 && self.op_p_min < 1.0) {
            return bad("op_p_min", "must lie in (0, 1)");
        }
        if self.tail_powers.is_empty() || self.tail_powers.iter().any(|&p| p < 2) {
            return bad("tail_powers", "powers must be at least 2");
        }
        if self.tail_points < self.tail_powers.len().max(4) {
            return bad("tail_points", "needs at least four points and one per power");
        }
        if self.basis_check.contains(&0) {
            return bad("basis_check", "kappa must be nonzero");
        }
        Ok(())
    }

    /// Canonical `key = value` text of every key.
    pub fn to_text(&self) -> String {
        KEYS.iter().map(|(k, _)| format!("{k} = {}\n", self.get(k).unwrap_or_default())).collect()
    }

    /// Hash of the keys that influence computed numbers.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for (k, _) in KEYS.iter().filter(|(k, _)| !NON_PHYSICAL.contains(k)) {
            h.update(format!("{k}={}\n", self.get(k).unwrap_or_default()));
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn basis(&self, kappa: i32) -> BasisSpec {
        BasisSpec::from_bohr(kappa, self.zeta1, self.beta, self.n_b, self.z, self.alpha_inv)
    }

    pub fn kgrid(&self) -> KGridConfig {
        KGridConfig { nodes_per_decade: self.k_nodes_per_decade, k_max: self.k_max, tail_nodes: self.k_tail_nodes, ..KGridConfig::default() }
    }

    pub fn one_potential_grid(&self) -> OnePotentialGrid {
        OnePotentialGrid { nodes_per_decade: self.op_nodes_per_decade, p_min: self.op_p_min, cos_nodes: self.op_cos_nodes }
    }

    /// Primary scheme from the config; variants drop or add one power and drop one point.
    pub fn tail(&self) -> TailConfig {
        let p = &self.tail_powers;
        let mut variants = Vec::new();
        if p.len() > 1 {
            variants.push(TailScheme::new(&p[..p.len() - 1], self.tail_points));
        }
        let mut more = p.clone();
        more.push(p.last().copied().unwrap_or(3) + 1);
        variants.push(TailScheme::new(&more, self.tail_points));
        if self.tail_points > p.len().max(4) {
            variants.push(TailScheme::new(p, self.tail_points - 1));
        }
        TailConfig { primary: TailScheme::new(p, self.tail_points), variants }
    }

    /// Kappas `−1, 1, −2, 2, …` up to `kappa_max`.
    pub fn kappas(&self) -> Vec<i32> {
        (1..=self.kappa_max as i32).flat_map(|k| [-k, k]).collect()
    }
}
