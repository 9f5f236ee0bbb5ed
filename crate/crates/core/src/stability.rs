//! Forward-stability sweep: stresses and their linearizations are evaluated in
//! single and double precision on random displacement gradients of prescribed
//! magnitude, and the largest componentwise relative deviation is recorded.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constitutive::{
    kirchhoff, material_lin, second_pk, spatial_lin, st_venant_kirchhoff, ConstitutiveError,
    Domain, Formulation, Material, ModelKind, Stability,
};
use crate::fastscalar::KernelConfig;
use crate::scalar::Scalar;
use crate::tensor::{SymTensor2, Tensor2};

#[derive(Debug, thiserror::Error)]
pub enum StabilityError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// Denominator floor of the relative error.
pub const ERROR_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    /// `S` (reference configuration) or `τ` (current configuration).
    Stress,
    /// `D_u S` (reference) or `Jc : (x)^S` (current).
    Tangent,
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Quantity::Stress => "stress",
            Quantity::Tangent => "tangent",
        })
    }
}

impl std::str::FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stress" => Ok(Quantity::Stress),
            "tangent" => Ok(Quantity::Tangent),
            _ => Err(format!("unknown quantity `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Strictly increasing strain magnitudes.
    pub scales: Vec<f64>,
    pub samples_per_scale: usize,
    pub seed: u64,
    pub models: Vec<ModelKind>,
    pub formulations: Vec<Formulation>,
    pub quantities: Vec<Quantity>,
    pub kernel: KernelConfig,
    /// Adds St. Venant–Kirchhoff records (stable strain, reference configuration).
    pub svk_anchor: bool,
}

/// `n` logarithmically spaced points from `lo` to `hi`.
pub fn log_scales(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            scales: log_scales(1e-8, 1e2, 200),
            samples_per_scale: 1000,
            seed: 0x5eed,
            models: ModelKind::ALL.to_vec(),
            formulations: [Stability::Standard, Stability::Stable]
                .into_iter()
                .flat_map(|s| [Domain::Material, Domain::Spatial].map(|d| Formulation::new(s, d)))
                .collect(),
            quantities: vec![Quantity::Stress, Quantity::Tangent],
            kernel: KernelConfig::default(),
            svk_anchor: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), StabilityError> {
        let bad = |m: &str| Err(StabilityError::Config(m.into()));
        if self.scales.is_empty() || self.models.is_empty() {
            return bad("scales and models must be non-empty");
        }
        if self.formulations.is_empty() || self.quantities.is_empty() {
            return bad("formulations and quantities must be non-empty");
        }
        if self.samples_per_scale == 0 {
            return bad("samples_per_scale must be positive");
        }
        if !self.scales.iter().all(|&s| s > 0.0) || self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return bad("scales must be positive and strictly increasing");
        }
        self.kernel.validate().map_err(|e| StabilityError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub scale: f64,
    /// Model tag, `SVK` for the anchor.
    pub model: String,
    pub formulation: Formulation,
    pub quantity: Quantity,
    pub max_rel_error: f64,
    pub count_invalid: usize,
}

/// Random gradient whose entries have magnitude uniform in `[ε/10, ε]` and a random sign.
pub fn sample_gradient<R: Rng>(rng: &mut R, epsilon: f64) -> Tensor2<f64> {
    let mut m = [[0.0; 3]; 3];
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            let mag = rng.random_range(0.1 * epsilon..=epsilon);
            *v = if rng.random::<bool>() { mag } else { -mag };
        }
    }
    Tensor2 { m }
}

/// Generator for one (scale, sample) pair: one ChaCha8 stream per pair,
/// stream id `scale_index << 32 | sample`.
pub fn sample_rng(seed: u64, scale_index: usize, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((scale_index as u64) << 32) | sample as u64);
    rng
}

enum Evaluated {
    Value(Vec<f64>),
    Invalid,
}

fn flatten_sym<S: Scalar>(s: &SymTensor2<S>) -> Vec<f64> {
    s.v.iter().map(|x| num_traits::ToPrimitive::to_f64(&x.lane(0)).unwrap_or(f64::NAN)).collect()
}

fn evaluate<S: Scalar>(
    mat: &Material,
    form: Formulation,
    quantity: Quantity,
    g: &Tensor2<S>,
    d: &Tensor2<S>,
    cfg: &KernelConfig,
) -> Result<Vec<f64>, ConstitutiveError> {
    let st = form.stability;
    Ok(match (form.domain, quantity) {
        (Domain::Material, Quantity::Stress) => flatten_sym(&second_pk(mat, g, st, cfg)?),
        (Domain::Spatial, Quantity::Stress) => flatten_sym(&kirchhoff(mat, g, st, cfg)?),
        (Domain::Material, Quantity::Tangent) => {
            flatten_sym(&material_lin(mat, g, st, cfg)?.d_stress(d))
        }
        (Domain::Spatial, Quantity::Tangent) => {
            flatten_sym(&spatial_lin(mat, g, st, cfg)?.material_part(d))
        }
    })
}

fn svk_evaluate<S: Scalar>(
    mu: f64,
    lambda: f64,
    quantity: Quantity,
    g: &Tensor2<S>,
    d: &Tensor2<S>,
) -> Vec<f64> {
    match quantity {
        Quantity::Stress => flatten_sym(&st_venant_kirchhoff(mu, lambda, g)),
        Quantity::Tangent => {
            let f = g.plus_identity();
            let de = f.tr_mul(d).sym_part();
            let mu = S::lit(mu);
            flatten_sym(&de.scale(mu + mu).add_identity(S::lit(lambda) * de.trace()))
        }
    }
}

fn classify(v: Result<Vec<f64>, ConstitutiveError>) -> Evaluated {
    match v {
        Ok(v) if v.iter().all(|x| x.is_finite()) => Evaluated::Value(v),
        _ => Evaluated::Invalid,
    }
}

fn max_rel_error(reference: &[f64], single: &[f64]) -> f64 {
    reference
        .iter()
        .zip(single)
        .map(|(&r, &s)| {
            let e = (r - s).abs() / r.abs().max(ERROR_FLOOR);
            if e.is_nan() {
                f64::INFINITY
            } else {
                e
            }
        })
        .fold(0.0, f64::max)
}

/// A (model, formulation, quantity) cell of the sweep.
#[derive(Clone, Copy)]
enum Cell {
    Model(ModelKind, Formulation, Quantity),
    Svk(Quantity),
}

/// Runs the sweep. Cells of one scale share the sampled gradients; samples with
/// `J <= 0` or non-finite double-precision results are counted and skipped.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, StabilityError> {
    cfg.validate()?;
    let materials: Vec<Material> = cfg.models.iter().map(|&m| Material::default_for(m)).collect();
    let svk = Material::default_for(ModelKind::CompressibleNeoHooke).params;
    let svk_form = Formulation::stable(Domain::Material);

    let mut cells = Vec::new();
    for (mi, &model) in cfg.models.iter().enumerate() {
        for &form in &cfg.formulations {
            for &q in &cfg.quantities {
                cells.push((Some(mi), Cell::Model(model, form, q)));
            }
        }
    }
    if cfg.svk_anchor {
        for &q in &cfg.quantities {
            cells.push((None, Cell::Svk(q)));
        }
    }

    let per_scale: Vec<Vec<SweepRecord>> = cfg
        .scales
        .par_iter()
        .enumerate()
        .map(|(si, &eps)| {
            let mut err = vec![0.0f64; cells.len()];
            let mut invalid = vec![0usize; cells.len()];
            for sample in 0..cfg.samples_per_scale {
                let mut rng = sample_rng(cfg.seed, si, sample);
                let g = sample_gradient(&mut rng, eps);
                let d = sample_gradient(&mut rng, eps);
                let (g32, d32) = (g.to_precision::<f32>(), d.to_precision::<f32>());
                for (ci, (mi, cell)) in cells.iter().enumerate() {
                    let (r64, r32) = match *cell {
                        Cell::Model(_, form, q) => {
                            let mat = &materials[mi.expect("model cell")];
                            (
                                classify(evaluate(mat, form, q, &g, &d, &cfg.kernel)),
                                evaluate(mat, form, q, &g32, &d32, &cfg.kernel),
                            )
                        }
                        Cell::Svk(q) => {
                            let ok = g.det_minus_one() > -1.0;
                            let r64 = if ok {
                                classify(Ok(svk_evaluate(svk.mu, svk.lambda, q, &g, &d)))
                            } else {
                                Evaluated::Invalid
                            };
                            (r64, Ok(svk_evaluate(svk.mu, svk.lambda, q, &g32, &d32)))
                        }
                    };
                    match r64 {
                        Evaluated::Invalid => invalid[ci] += 1,
                        Evaluated::Value(reference) => {
                            let e = match r32 {
                                Ok(single) => max_rel_error(&reference, &single),
                                Err(_) => f64::INFINITY,
                            };
                            err[ci] = err[ci].max(e);
                        }
                    }
                }
            }
            cells
                .iter()
                .enumerate()
                .map(|(ci, (_, cell))| {
                    let (model, formulation, quantity) = match *cell {
                        Cell::Model(m, f, q) => (m.tag().to_string(), f, q),
                        Cell::Svk(q) => ("SVK".to_string(), svk_form, q),
                    };
                    SweepRecord {
                        scale: eps,
                        model,
                        formulation,
                        quantity,
                        max_rel_error: err[ci],
                        count_invalid: invalid[ci],
                    }
                })
                .collect()
        })
        .collect();
    Ok(per_scale.into_iter().flatten().collect())
}

/// Writes `scale,model,formulation,quantity,max_rel_error,count_invalid`, one row per record.
pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<(), StabilityError> {
    let io = |source| StabilityError::Io { path: path.display().to_string(), source };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["scale", "model", "formulation", "quantity", "max_rel_error", "count_invalid"])
        .map_err(io)?;
    for r in records {
        w.write_record([
            format!("{:e}", r.scale),
            r.model.clone(),
            r.formulation.tag(),
            r.quantity.to_string(),
            format!("{:e}", r.max_rel_error),
            r.count_invalid.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| io(e.into()))
}
