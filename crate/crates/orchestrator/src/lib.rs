//! Run management for the Gaussian-basis self-energy pipeline: configuration,
//! the artifact cache, per-κ scheduling, output tables and reference comparison.

pub mod cache;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod reference;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use pipeline::Pipeline;

use gbse_core::mp_assembly::SelfEnergyReport;

/// Computed cells keyed like the bundled reference data.
pub fn report_cells(rep: &SelfEnergyReport) -> Vec<((u8, String, String), f64)> {
    let mut out = Vec::new();
    for r in &rep.per_kappa {
        let k = r.kappa.to_string();
        for (c, v) in [("zero", r.e_zero), ("one", r.e_one), ("bound", r.e_bound), ("mp", r.e_mp)] {
            if r.kappa.abs() == 1 {
                out.push(((1, k.clone(), c.to_string()), v));
            }
            out.push(((4, k.clone(), c.to_string()), v));
        }
    }
    for (row, v) in [("e0", rep.e0_r), ("e1", rep.e1_r), ("mp", rep.e_mp_total.value), ("se", rep.f_total.value)] {
        out.push(((3, row.to_string(), "present".to_string()), v));
    }
    out
}
