//! Operator throughput: linearized operator applications and residual
//! evaluations per second on structured meshes.

use std::time::Instant;

use hyperfem::constitutive::{Domain, Formulation, Strategy};
use hyperfem::mesh::{build_cube, Deformation, Face, FeLevel, Mapping};
use hyperfem::operator::{ElasticOperator, OperatorConfig};
use serde::Serialize;

use crate::config::{BenchPlan, MeshSection, Operation};

/// One timed (mesh, variant, operation) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub p: usize,
    pub n_el: usize,
    pub dofs: usize,
    /// `<domain>-<strategy>`.
    pub variant: String,
    pub operation: String,
    /// Repetitions summed over the kept runs.
    pub repetitions: usize,
    /// Wall time summed over the kept runs.
    pub seconds: f64,
    pub dofs_per_sec: f64,
    /// Analytic memory traffic per degree of freedom and evaluation.
    pub bytes_per_dof: f64,
}

impl std::fmt::Display for BenchRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "p={} n_el={} dofs={} {} {}: {:.3e} DoF/s, {:.1} B/DoF ({} reps in {:.2} s)",
            self.p,
            self.n_el,
            self.dofs,
            self.variant,
            self.operation,
            self.dofs_per_sec,
            self.bytes_per_dof,
            self.repetitions,
            self.seconds
        )
    }
}

/// Bytes per degree of freedom for reading the source and writing the destination vector.
const VECTOR_BYTES: usize = 16;

/// Mesh with the `XMin` face clamped, as in the solve driver.
pub fn bench_level(m: &MeshSection) -> hyperfem::Result<FeLevel> {
    let mesh = build_cube(m.n0, m.level, m.extent)?;
    let mapping = Mapping::new(&mesh, m.degree, &Deformation { amplitude: m.amplitude })?;
    let mut level = FeLevel::new(&mesh, m.degree, &mapping)?;
    level.clamp(&[Face::XMin]);
    Ok(level)
}

/// Smooth displacement of a few percent strain used as linearization point.
pub fn bench_state(level: &FeLevel) -> Vec<f64> {
    let l = level.mesh.extent;
    let mut u = level.interpolate(|x| {
        let s = x[0] / l;
        [0.02 * s * l, -0.01 * s * (x[1] / l) * l, 0.01 * s * s * l]
    });
    level.dirichlet.zero(&mut u);
    u
}

fn bytes_per_dof(op: &ElasticOperator, operation: Operation) -> f64 {
    let level = op.level();
    let qps = (level.n_elements() * level.qp_per_element()) as f64;
    let ledger = op.byte_ledger();
    let per_qp = match operation {
        Operation::TangentApply => ledger.traffic(),
        Operation::Residual => ledger.storage(),
    };
    (per_qp as f64 * qps) / op.n_dofs() as f64 + VECTOR_BYTES as f64
}

/// Runs `f` in blocks of `block` until `min_seconds` have elapsed, `repeats`
/// times after one warm-up call; returns repetitions and seconds summed over
/// the `best_of` fastest runs.
pub fn measure(
    plan: &BenchPlan,
    mut f: impl FnMut() -> hyperfem::Result<()>,
) -> hyperfem::Result<(usize, f64)> {
    f()?;
    let mut runs = Vec::with_capacity(plan.repeats);
    for _ in 0..plan.repeats {
        let start = Instant::now();
        let mut reps = 0;
        loop {
            for _ in 0..plan.block {
                f()?;
            }
            reps += plan.block;
            if start.elapsed().as_secs_f64() >= plan.min_seconds {
                break;
            }
        }
        runs.push((reps, start.elapsed().as_secs_f64()));
    }
    runs.sort_by(|a, b| (b.0 as f64 / b.1).total_cmp(&(a.0 as f64 / a.1)));
    Ok(runs[..plan.best_of].iter().fold((0, 0.0), |(r, s), &(ri, si)| (r + ri, s + si)))
}

/// Times every (mesh, variant, operation) of the plan; `report` sees each record as it completes.
pub fn run_throughput(
    plan: &BenchPlan,
    mut report: impl FnMut(&BenchRecord),
) -> hyperfem::Result<Vec<BenchRecord>> {
    let mut records = Vec::new();
    for m in &plan.meshes {
        let level = bench_level(m)?;
        let u = bench_state(&level);
        let x: Vec<f64> = (0..u.len()).map(|i| ((i * 7919) % 1000) as f64 / 1000.0 - 0.5).collect();
        for &(domain, strategy) in &plan.variants {
            let config = OperatorConfig {
                formulation: Formulation::stable(domain),
                strategy,
                ..OperatorConfig::default()
            };
            let mut op = ElasticOperator::new(level.clone(), plan.material.clone(), config)?;
            op.update_linearization(&u)?;
            for &operation in &plan.operations {
                let (repetitions, seconds) = match operation {
                    Operation::TangentApply => {
                        let mut y = vec![0.0; x.len()];
                        measure(plan, || Ok(op.apply_tangent_into(&x, &mut y)?))?
                    }
                    Operation::Residual => measure(plan, || {
                        op.update_linearization(&u)?;
                        std::hint::black_box(op.evaluate_residual(&u)?);
                        Ok(())
                    })?,
                };
                let dofs = op.n_dofs();
                let record = BenchRecord {
                    p: m.degree,
                    n_el: level.n_elements(),
                    dofs,
                    variant: variant_name(domain, strategy),
                    operation: operation.to_string(),
                    repetitions,
                    seconds,
                    dofs_per_sec: (dofs * repetitions) as f64 / seconds,
                    bytes_per_dof: bytes_per_dof(&op, operation),
                };
                report(&record);
                records.push(record);
            }
        }
    }
    Ok(records)
}

pub fn variant_name(domain: Domain, strategy: Strategy) -> String {
    format!("{domain}-{strategy}")
}
