use clap::{Parser, Subcommand};
use gbse::cli::Overrides;
use gbse::output::{self, sig};
use gbse::reference::{compare, parse_reference, ReferenceData};
use gbse::{report_cells, Pipeline, Result, RunConfig};
use gbse_core::mp_assembly::SelfEnergyReport;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gbse", version, about = "One-loop self-energy of hydrogen-like ions in a Gaussian basis")]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration before running.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and tabulate the radial spectrum of one kappa.
    Spectrum {
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<i32>,
        /// Use Z = 0 and check the free gap.
        #[arg(long)]
        free: bool,
    },
    /// Many-potential rows for a comma-separated kappa list, all kappas up to kappa_max by default.
    Mp {
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        kappas: Vec<i32>,
    },
    /// Renormalized zero-potential term.
    ZeroPot,
    /// Renormalized one-potential term.
    OnePot,
    /// Full self-energy: every row, both momentum terms, tail and errors.
    Assemble,
    /// Basis-convergence table of the |kappa| pair sum.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [40, 50, 60, 70, 80, 90])]
        nb: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.5, 1.45, 1.4])]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        kappa: u32,
    },
    /// Per-cell deviations of a report from the bundled reference tables.
    Compare {
        /// report.json to compare, `output_dir/report.json` by default.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Alternative reference CSV.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::parse(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    if cli.show_config {
        eprint!("{}", cfg.to_text());
    }
    log::info!("configuration fingerprint {}", cfg.fingerprint());
    match cli.command {
        Command::Spectrum { kappa, free } => {
            let p = Pipeline::new(cfg)?;
            let kappa = kappa.unwrap_or(p.cfg.ref_kappa);
            let s = p.spectrum(kappa, free)?;
            output::write(&p.cfg.output_dir, &format!("spectrum_k{kappa}{}.csv", if free { "_free" } else { "" }), &output::spectrum_csv(&p.cfg, &s))?;
            if let Some(i) = s.lowest_positive() {
                println!("kappa {kappa}: lowest positive-energy state {} mc^2", sig(s.energies[i]));
            }
            if free {
                let gap = s.energies.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
                let ok = gap >= 1.0 - 1e-9;
                println!("free gap check: min |E| = {} {}", sig(gap), if ok { "passes" } else { "FAILS" });
                if !ok {
                    return Err(gbse::Error::Core(gbse_core::Error::InvalidInput("free spectrum has a state inside the gap".into())));
                }
            }
        }
        Command::Mp { kappas } => {
            let p = Pipeline::new(cfg)?;
            let kappas = if kappas.is_empty() { p.cfg.kappas() } else { kappas };
            let rows = p.mp_rows(&kappas)?;
            output::write(&p.cfg.output_dir, "mp.csv", &output::rows_csv(&p.cfg, &rows))?;
            for r in &rows {
                println!("{:>4} bound {} zero {} one {} mp {}", r.kappa, sig(r.e_bound), sig(r.e_zero), sig(r.e_one), sig(r.e_mp));
            }
        }
        Command::ZeroPot => {
            let p = Pipeline::new(cfg)?;
            println!("Delta E^(0)_R = {}", sig(p.zero_potential()?));
        }
        Command::OnePot => {
            let p = Pipeline::new(cfg)?;
            println!("Delta E^(1)_R = {}", sig(p.one_potential()?));
        }
        Command::Assemble => {
            let p = Pipeline::new(cfg)?;
            let rep = p.assemble()?;
            output::write_report(&p.cfg, &rep)?;
            print!("{}", output::report_table(&rep));
        }
        Command::Sweep { nb, betas, kappa } => {
            let p = Pipeline::new(cfg)?;
            let cells = p.sweep(&nb, &betas, kappa)?;
            output::write(&p.cfg.output_dir, "sweep.csv", &output::sweep_csv(&p.cfg, &cells))?;
            for c in &cells {
                println!("n_b {:>4} beta {:<5} |kappa| {} : {}", c.n_b, c.beta, c.kappa_abs, sig(c.e_mp_pair));
            }
        }
        Command::Compare { report, reference } => {
            let path = report.unwrap_or_else(|| cfg.output_dir.join("report.json"));
            let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
            let rep: SelfEnergyReport = serde_json::from_value(v.get("report").cloned().unwrap_or(v))?;
            let refs = match reference {
                Some(p) => parse_reference(&std::fs::read_to_string(p)?)?,
                None => ReferenceData::bundled(),
            };
            let d = compare(&refs, report_cells(&rep));
            output::write(&cfg.output_dir, "compare.csv", &output::compare_csv(&cfg, &d))?;
            println!("{:>5} {:>5} {:>8} {:>16} {:>16} {:>16}", "table", "row", "column", "reference", "computed", "deviation");
            for x in &d {
                println!("{:>5} {:>5} {:>8} {:>16} {:>16} {:>16}", x.table, x.row, x.column, sig(x.reference), sig(x.computed), sig(x.deviation));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::FAILURE
        }
    }
}
