//! CSV writers, the solve driver and the byte ledger table.

use std::path::Path;

use hyperfem::constitutive::{byte_ledger, ByteLedger, Domain, ModelKind, Strategy};
use hyperfem::problem::{CubeProblem, SolveOutcome};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
#[error("writing {path}: {source}")]
pub struct WriteError {
    pub path: String,
    #[source]
    pub source: csv::Error,
}

/// Writes a header row and one row per record, in order.
pub fn write_rows<T: Serialize>(rows: &[T], header: &[&str], path: &Path) -> Result<(), WriteError> {
    let wrap = |source| WriteError { path: path.display().to_string(), source };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.serialize(r).map_err(wrap)?;
    }
    w.flush().map_err(|e| wrap(e.into()))
}

pub const BENCH_HEADER: [&str; 9] =
    ["p", "n_el", "dofs", "variant", "operation", "repetitions", "seconds", "dofs_per_sec", "bytes_per_dof"];

/// One Newton iteration of the solve driver; iteration 0 carries the initial residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveRow {
    pub step: usize,
    pub load_factor: f64,
    pub newton_iteration: usize,
    pub residual: f64,
    pub fgmres_iterations: usize,
    pub seconds: f64,
}

pub const SOLVE_HEADER: [&str; 6] =
    ["step", "load_factor", "newton_iteration", "residual", "fgmres_iterations", "seconds"];

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    pub rows: Vec<SolveRow>,
}

impl SolveReport {
    /// One summary line per load increment.
    pub fn summary(&self) -> Vec<String> {
        let n = self.outcome.steps.len();
        self.outcome
            .steps
            .iter()
            .map(|s| {
                format!(
                    "step {}/{} load {:.3}: {} Newton iterations, FGMRES {:?}, residual {:.3e} -> {:.3e}, {:.2} s",
                    s.step,
                    n,
                    s.load_factor,
                    s.newton_iterations,
                    s.linear_iterations,
                    s.residuals[0],
                    s.residuals.last().unwrap(),
                    s.seconds
                )
            })
            .collect()
    }
}

pub fn run_solve(problem: &CubeProblem) -> hyperfem::Result<SolveReport> {
    let outcome = problem.solve()?;
    let mut rows = Vec::new();
    for s in &outcome.steps {
        for (k, &residual) in s.residuals.iter().enumerate() {
            let (fgmres_iterations, seconds) =
                if k == 0 { (0, 0.0) } else { (s.linear_iterations[k - 1], s.step_seconds[k - 1]) };
            rows.push(SolveRow {
                step: s.step,
                load_factor: s.load_factor,
                newton_iteration: k,
                residual,
                fgmres_iterations,
                seconds,
            });
        }
    }
    Ok(SolveReport { outcome, rows })
}

/// Ledger cells matching the given filters, in model, domain, strategy order.
pub fn ledger_cells(model: Option<ModelKind>, domain: Option<Domain>, strategy: Option<Strategy>) -> Vec<ByteLedger> {
    let mut cells = Vec::new();
    for m in ModelKind::ALL.into_iter().filter(|&m| model.is_none_or(|x| x == m)) {
        for d in [Domain::Material, Domain::Spatial].into_iter().filter(|&d| domain.is_none_or(|x| x == d)) {
            for s in Strategy::ALL.into_iter().filter(|&s| strategy.is_none_or(|x| x == s)) {
                cells.push(byte_ledger(m, d, s));
            }
        }
    }
    cells
}

pub fn ledger_line(l: &ByteLedger) -> String {
    format!("{} {} {}: {} B storage / {} B traffic", l.model, l.domain, l.strategy, l.storage(), l.traffic())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub model: String,
    pub domain: String,
    pub strategy: String,
    pub storage_bytes: usize,
    pub traffic_bytes: usize,
    pub fields: String,
}

pub const LEDGER_HEADER: [&str; 6] = ["model", "domain", "strategy", "storage_bytes", "traffic_bytes", "fields"];

impl From<&ByteLedger> for LedgerRow {
    fn from(l: &ByteLedger) -> Self {
        LedgerRow {
            model: l.model.to_string(),
            domain: l.domain.to_string(),
            strategy: l.strategy.to_string(),
            storage_bytes: l.storage(),
            traffic_bytes: l.traffic(),
            fields: l
                .fields
                .iter()
                .map(|f| format!("{}:{}{}", f.name, f.bytes, if f.in_traffic { "" } else { "*" }))
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}
