//! CSV, JSON and terminal tables. Every file records the fingerprint, units, α and Z.

use crate::cache::TOOL_VERSION;
use crate::config::RunConfig;
use crate::error::Result;
use crate::pipeline::SweepCell;
use crate::reference::Deviation;
use gbse_core::dirac::RadialSpectrum;
use gbse_core::mp_assembly::{format_significant, PartialWaveResult, SelfEnergyReport};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const DIGITS: usize = 10;

pub fn sig(x: f64) -> String {
    format_significant(x, DIGITS)
}

/// `#` comment lines heading every CSV file.
pub fn preamble(cfg: &RunConfig, units: &str) -> String {
    format!(
        "# gbse {TOOL_VERSION}\n# fingerprint = {}\n# units = {units}\n# z = {}\n# alpha_inv = {}\n# reference = n {} kappa {}\n",
        cfg.fingerprint(),
        cfg.z,
        cfg.alpha_inv,
        cfg.ref_n,
        cfg.ref_kappa
    )
}

pub const F_UNITS: &str = "F(Z alpha), Delta E = (alpha/pi) (Z alpha)^4 / n^3 F mc^2";

pub fn rows_csv(cfg: &RunConfig, rows: &[PartialWaveResult]) -> String {
    let mut out = preamble(cfg, F_UNITS);
    out.push_str("kappa,e_bound,e_zero,e_one,e_mp\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.kappa, sig(r.e_bound), sig(r.e_zero), sig(r.e_one), sig(r.e_mp));
    }
    out
}

pub fn report_csv(cfg: &RunConfig, rep: &SelfEnergyReport) -> String {
    let mut out = preamble(cfg, F_UNITS);
    out.push_str(&rep.to_csv());
    out
}

pub fn summary_csv(cfg: &RunConfig, rep: &SelfEnergyReport) -> String {
    let mut out = preamble(cfg, F_UNITS);
    out.push_str("quantity,value,uncertainty\n");
    let partial = rep.e_mp_total.value - rep.tail.value;
    for (q, v, u) in [
        ("e_mp_partial", partial, None),
        ("e_mp_tail", rep.tail.value, Some(rep.tail.sigma)),
        ("e_mp", rep.e_mp_total.value, Some(rep.e_mp_total.sigma)),
        ("e0_r", rep.e0_r, None),
        ("e1_r", rep.e1_r, None),
        ("f_se", rep.f_total.value, Some(rep.f_total.sigma)),
    ] {
        let _ = writeln!(out, "{q},{},{}", sig(v), u.map(sig).unwrap_or_default());
    }
    out
}

pub fn spectrum_csv(cfg: &RunConfig, s: &RadialSpectrum) -> String {
    let mut out = preamble(cfg, "mc^2");
    let _ = writeln!(out, "# kappa = {}\n# nuclear charge of this spectrum = {}", s.kappa, s.z);
    out.push_str("index,energy\n");
    for (i, e) in s.energies.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", sig(*e));
    }
    out
}

pub fn sweep_csv(cfg: &RunConfig, cells: &[SweepCell]) -> String {
    let mut out = preamble(cfg, F_UNITS);
    out.push_str("n_b,beta,kappa_abs,e_mp_pair\n");
    for c in cells {
        let _ = writeln!(out, "{},{},{},{}", c.n_b, c.beta, c.kappa_abs, sig(c.e_mp_pair));
    }
    out
}

pub fn compare_csv(cfg: &RunConfig, d: &[Deviation]) -> String {
    let mut out = preamble(cfg, F_UNITS);
    out.push_str("table,row,column,reference,computed,deviation\n");
    for x in d {
        let _ = writeln!(out, "{},{},{},{},{},{}", x.table, x.row, x.column, sig(x.reference), sig(x.computed), sig(x.deviation));
    }
    out
}

#[derive(Serialize)]
struct ReportJson<'a> {
    tool_version: &'a str,
    fingerprint: String,
    units: &'a str,
    z: f64,
    alpha_inv: f64,
    ref_n: u32,
    ref_kappa: i32,
    config: serde_json::Value,
    report: &'a SelfEnergyReport,
}

pub fn report_json(cfg: &RunConfig, rep: &SelfEnergyReport) -> String {
    let j = ReportJson {
        tool_version: TOOL_VERSION,
        fingerprint: cfg.fingerprint(),
        units: F_UNITS,
        z: cfg.z,
        alpha_inv: cfg.alpha_inv,
        ref_n: cfg.ref_n,
        ref_kappa: cfg.ref_kappa,
        config: physical_config(cfg),
        report: rep,
    };
    let mut s = serde_json::to_string_pretty(&j).expect("report serializes");
    s.push('\n');
    s
}

/// Configuration without paths and thread count, so equal runs give equal reports.
fn physical_config(cfg: &RunConfig) -> serde_json::Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Some(m) = v.as_object_mut() {
        for k in crate::config::NON_PHYSICAL {
            m.remove(*k);
        }
    }
    v
}

/// Human-readable table of the assembled result.
pub fn report_table(rep: &SelfEnergyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>6} {:>16} {:>16} {:>16} {:>16}", "kappa", "zero", "one", "bound", "mp");
    for r in &rep.per_kappa {
        let _ = writeln!(out, "{:>6} {:>16} {:>16} {:>16} {:>16}", r.kappa, sig(r.e_zero), sig(r.e_one), sig(r.e_bound), sig(r.e_mp));
    }
    let _ = writeln!(out, "\ntail (|kappa| > {})   {} +- {}", rep.kappa_max, sig(rep.tail.value), sig(rep.tail.sigma));
    let _ = writeln!(out, "Delta E^mp            {} +- {}", sig(rep.e_mp_total.value), sig(rep.e_mp_total.sigma));
    let _ = writeln!(out, "Delta E^(0)_R         {}", sig(rep.e0_r));
    let _ = writeln!(out, "Delta E^(1)_R         {}", sig(rep.e1_r));
    let _ = writeln!(out, "F_SE                  {} +- {}", sig(rep.f_total.value), sig(rep.f_total.sigma));
    out
}

/// Write `contents` to `dir/name`, creating `dir`.
pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    std::fs::write(&p, contents)?;
    log::info!("wrote {}", p.display());
    Ok(p)
}

/// report.csv, summary.csv and report.json.
pub fn write_report(cfg: &RunConfig, rep: &SelfEnergyReport) -> Result<()> {
    write(&cfg.output_dir, "report.csv", &report_csv(cfg, rep))?;
    write(&cfg.output_dir, "summary.csv", &summary_csv(cfg, rep))?;
    write(&cfg.output_dir, "report.json", &report_json(cfg, rep))?;
    Ok(())
}
