//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use hyperfem::stability::{run_sweep, write_csv, SweepRecord};

use crate::config::{check_writable, ConfigError, RunConfig};
use crate::report::{
    ledger_cells, ledger_line, run_solve, write_rows, LedgerRow, WriteError, BENCH_HEADER, LEDGER_HEADER,
    SOLVE_HEADER,
};
use crate::throughput::run_throughput;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hyperfem", version, about = "Stability sweeps, operator benchmarks and cube solves")]
struct Cli {
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output path of the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 gives bit-reproducible output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single- versus double-precision error sweep of the stresses.
    Stability,
    /// Throughput of the linearized operator and the residual.
    Bench,
    /// Pressure-loaded cube, Newton with multigrid-preconditioned FGMRES.
    Solve,
    /// Stored bytes per quadrature point.
    Ledger {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Prints the effective configuration as TOML.
    Config,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Write(#[from] WriteError),
    #[error(transparent)]
    Numerical(#[from] hyperfem::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Write(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

/// Runs the CLI on `args` (program name first) and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = e.print();
                    EXIT_CONFIG
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn invalid(field: &str, message: String) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid("--threads", "must be at least 1".into()).into());
        }
        // A pool built earlier in the same process keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let output = |default: &Path| cli.out.clone().unwrap_or_else(|| default.to_path_buf());
    let mut say = |line: String| {
        let _ = writeln!(out, "{line}");
    };

    match cli.command {
        Command::Stability => {
            let sweep = cfg.stability.sweep(cfg.seed)?;
            let path = output(&cfg.stability.output);
            check_writable(&path)?;
            let records = run_sweep(&sweep).map_err(hyperfem::Error::from)?;
            write_csv(&records, &path).map_err(|e| invalid("output", e.to_string()))?;
            for line in stability_summary(&records) {
                say(line);
            }
            say(format!("wrote {} records to {}", records.len(), path.display()));
        }
        Command::Bench => {
            let plan = cfg.bench.plan()?;
            let path = output(&cfg.bench.output);
            check_writable(&path)?;
            let records = run_throughput(&plan, |r| say(r.to_string()))?;
            write_rows(&records, &BENCH_HEADER, &path)?;
            say(format!("wrote {} records to {}", records.len(), path.display()));
        }
        Command::Solve => {
            let problem = cfg.solve.problem(cfg.seed)?;
            let path = output(&cfg.solve.output);
            check_writable(&path)?;
            let report = run_solve(&problem)?;
            for line in report.summary() {
                say(line);
            }
            write_rows(&report.rows, &SOLVE_HEADER, &path)?;
            say(format!(
                "{} DoFs, {} levels; wrote {} rows to {}",
                report.outcome.n_dofs,
                report.outcome.n_levels,
                report.rows.len(),
                path.display()
            ));
        }
        Command::Ledger { model, domain, strategy } => {
            let model = model.map(|m| m.parse()).transpose().map_err(|e| invalid("--model", e))?;
            let domain = domain.map(|d| d.parse()).transpose().map_err(|e| invalid("--domain", e))?;
            let strategy = strategy.map(|s| s.parse()).transpose().map_err(|e| invalid("--strategy", e))?;
            let cells = ledger_cells(model, domain, strategy);
            for c in &cells {
                say(ledger_line(c));
            }
            if let Some(path) = &cli.out {
                let rows: Vec<LedgerRow> = cells.iter().map(LedgerRow::from).collect();
                write_rows(&rows, &LEDGER_HEADER, path)?;
            }
        }
        Command::Config => {
            say(cfg.to_toml()?);
        }
    }
    Ok(())
}

/// One line per (model, formulation, quantity) series of a sweep.
pub fn stability_summary(records: &[SweepRecord]) -> Vec<String> {
    let mut keys: Vec<(String, String, String)> = Vec::new();
    for r in records {
        let k = (r.model.clone(), r.formulation.tag(), r.quantity.to_string());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(model, form, quantity)| {
            let series: Vec<&SweepRecord> = records
                .iter()
                .filter(|r| r.model == model && r.formulation.tag() == form && r.quantity.to_string() == quantity)
                .collect();
            let small = series.iter().filter(|r| r.scale <= 0.1).map(|r| r.max_rel_error).fold(0.0, f64::max);
            let all = series.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
            let invalid: usize = series.iter().map(|r| r.count_invalid).sum();
            format!(
                "{model} {form} {quantity}: max error {small:.3e} for scales <= 0.1, {all:.3e} overall, {invalid} invalid"
            )
        })
        .collect()
}
