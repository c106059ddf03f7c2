use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use wavefem_harness::selftest::run_selftest;
use wavefem_harness::{emit_csv, read_csv, run_experiment, sweep, RateTable, RunConfig};

/// Leapfrog FEM runs for the damped 1D wave equation with a posteriori
/// error estimation.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Prints convergence orders of a CSV written by an earlier sweep.
    Rates { csv: PathBuf },
    /// Runs a quick suite of invariant checks.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` settings, applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// standing, propagating or zero.
    #[arg(long)]
    benchmark: Option<String>,
    /// Polynomial degree, 1 to 3.
    #[arg(long)]
    degree: Option<usize>,
    /// Number of cells, a power of two.
    #[arg(long)]
    cells: Option<usize>,
    /// Comma-separated ascending list of cell counts.
    #[arg(long, value_delimiter = ',', conflicts_with = "cells")]
    sweep: Option<Vec<usize>>,
    /// Damping rate of the error norms.
    #[arg(long)]
    rho: Option<f64>,
    /// Fraction of the stability limit used for the time step.
    #[arg(long)]
    cfl_ratio: Option<f64>,
    /// cfl (τ ∝ h) or scaled (τ² ∝ h³).
    #[arg(long)]
    time_mode: Option<String>,
    /// Cells of the mesh that fixes τ²/h³ in scaled mode.
    #[arg(long)]
    coarse_cells: Option<usize>,
    /// Final time of the damped integrals.
    #[arg(long)]
    tstar: Option<f64>,
    /// Steps of the CFL probe.
    #[arg(long)]
    alpha_probe: Option<usize>,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut rho_given = false;
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            rho_given = text
                .lines()
                .any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("rho"));
            cfg.apply_file(path)?;
        }
        let flags: [(&str, Option<String>); 10] = [
            ("benchmark", self.benchmark.clone()),
            ("degree", self.degree.map(|v| v.to_string())),
            ("cells", self.cells.map(|v| v.to_string())),
            ("rho", self.rho.map(|v| v.to_string())),
            ("cfl-ratio", self.cfl_ratio.map(|v| v.to_string())),
            ("time-mode", self.time_mode.clone()),
            ("coarse-cells", self.coarse_cells.map(|v| v.to_string())),
            ("tstar", self.tstar.map(|v| v.to_string())),
            ("alpha-probe", self.alpha_probe.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if !rho_given && self.rho.is_none() {
            cfg.rho = cfg.benchmark.default_rho();
        }
        Ok(cfg)
    }
}

fn write_records(records: &[wavefem_harness::RunRecord], cfg: &RunConfig) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => emit_csv(records, path)?,
        None => wavefem_harness::records::write_records(records, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Some(Command::Rates { csv }) => {
            let records = read_csv(&csv)?;
            if records.len() < 2 {
                bail!(
                    "{} holds {} rows; orders need at least two",
                    csv.display(),
                    records.len()
                );
            }
            print!("{}", RateTable::from_records(&records));
        }
        Some(Command::Selftest) => {
            let checks = run_selftest();
            let mut out = std::io::stdout().lock();
            for c in &checks {
                writeln!(
                    out,
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                )?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                bail!("{failed} of {} checks failed", checks.len());
            }
        }
        None => {
            let cfg = cli.run.config()?;
            match &cli.run.sweep {
                Some(ladder) => {
                    let result = sweep(&cfg, ladder)?;
                    write_records(&result.records, &cfg)?;
                    eprint!("{}", result.rates);
                }
                None => write_records(&[run_experiment(&cfg)?], &cfg)?,
            }
        }
    }
    Ok(())
}
