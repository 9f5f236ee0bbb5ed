//! Declarative run configuration, read from TOML.
//!
//! Every section and field is optional; missing values take the defaults
//! below. Enumerated values are kept as strings in the file and checked by
//! [`RunConfig::validate`].

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hyperfem::constitutive::{Domain, Formulation, Material, MaterialParams, ModelKind, Strategy};
use hyperfem::fastscalar::{ExpMode, JpowMode, KernelConfig};
use hyperfem::mesh::{Deformation, Face};
use hyperfem::operator::OperatorConfig;
use hyperfem::problem::CubeProblem;
use hyperfem::solver::{FgmresConfig, MgConfig, MgPrecision, NewtonConfig};
use hyperfem::stability::{log_scales, Quantity, SweepConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("serializing configuration: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("output {path} is not writable: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: &str, message: impl Display) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.to_string() }
}

fn parse<T: FromStr<Err = String>>(field: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|e: String| invalid(field, e))
}

/// Top-level configuration with one section per subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub stability: StabilitySection,
    pub bench: BenchSection,
    pub solve: SolveSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0x5eed,
            stability: StabilitySection::default(),
            bench: BenchSection::default(),
            solve: SolveSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    /// `exact` or `fast`.
    pub exp: String,
    /// `newton` or `exact`.
    pub jpow: String,
    pub jpow_newton_steps: usize,
    pub ln_series_terms: usize,
}

impl Default for KernelSection {
    fn default() -> Self {
        let k = KernelConfig::default();
        KernelSection {
            exp: "exact".into(),
            jpow: "newton".into(),
            jpow_newton_steps: k.jpow_newton_steps,
            ln_series_terms: k.ln_series_terms,
        }
    }
}

impl KernelSection {
    pub fn resolve(&self, field: &str) -> Result<KernelConfig, ConfigError> {
        let exp_mode = match self.exp.to_ascii_lowercase().as_str() {
            "exact" => ExpMode::Exact,
            "fast" => ExpMode::Fast,
            other => return Err(invalid(&format!("{field}.exp"), format!("unknown mode `{other}`"))),
        };
        let jpow_mode = match self.jpow.to_ascii_lowercase().as_str() {
            "newton" => JpowMode::Newton,
            "exact" => JpowMode::Exact,
            other => return Err(invalid(&format!("{field}.jpow"), format!("unknown mode `{other}`"))),
        };
        let k = KernelConfig {
            ln_series_terms: self.ln_series_terms,
            jpow_newton_steps: self.jpow_newton_steps,
            exp_mode,
            jpow_mode,
        };
        k.validate().map_err(|e| invalid(field, e))?;
        Ok(k)
    }
}

/// Material constants; absent entries keep the model defaults.
/// `nu` derives `lambda` and `kappa` from `mu` unless those are given too.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Mean fiber angle in degrees.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_deg: Option<f64>,
}

impl ParamsSection {
    pub fn resolve(&self, model: ModelKind, field: &str) -> Result<Material, ConfigError> {
        let mut p = MaterialParams::default_for(model);
        if let Some(mu) = self.mu {
            p.mu = mu;
        }
        if let Some(nu) = self.nu {
            if !(nu > -1.0 && nu < 0.5) {
                return Err(invalid(&format!("{field}.nu"), "must lie in (-1, 0.5)"));
            }
            let d = MaterialParams::from_poisson(p.mu, nu);
            p.lambda = d.lambda;
            p.kappa = d.kappa;
        }
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.lambda, self.lambda);
        set(&mut p.kappa, self.kappa);
        set(&mut p.k1, self.k1);
        set(&mut p.k2, self.k2);
        set(&mut p.a, self.a);
        set(&mut p.b, self.b);
        set(&mut p.phi, self.phi_deg.map(f64::to_radians));
        Material::new(model, p).map_err(|e| invalid(field, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub models: Vec<String>,
    /// `<standard|stable>-<material|spatial>`.
    pub formulations: Vec<String>,
    pub quantities: Vec<String>,
    pub scales: usize,
    pub scale_min: f64,
    pub scale_max: f64,
    pub samples: usize,
    pub svk_anchor: bool,
    pub kernel: KernelSection,
    pub output: PathBuf,
}

impl Default for StabilitySection {
    fn default() -> Self {
        let d = SweepConfig::default();
        StabilitySection {
            models: d.models.iter().map(|m| m.to_string()).collect(),
            formulations: d.formulations.iter().map(|f| f.tag()).collect(),
            quantities: d.quantities.iter().map(|q| q.to_string()).collect(),
            scales: d.scales.len(),
            scale_min: d.scales[0],
            scale_max: *d.scales.last().unwrap(),
            samples: d.samples_per_scale,
            svk_anchor: d.svk_anchor,
            kernel: KernelSection::default(),
            output: "stability.csv".into(),
        }
    }
}

fn parse_formulation(field: &str, s: &str) -> Result<Formulation, ConfigError> {
    let (st, dom) = s
        .split_once('-')
        .ok_or_else(|| invalid(field, format!("`{s}` is not of the form stability-domain")))?;
    Ok(Formulation::new(parse(field, st)?, parse(field, dom)?))
}

impl StabilitySection {
    pub fn sweep(&self, seed: u64) -> Result<SweepConfig, ConfigError> {
        if self.scales == 0 || !(self.scale_min > 0.0) || !(self.scale_max >= self.scale_min) {
            return Err(invalid("stability.scales", "need scales >= 1 and 0 < scale_min <= scale_max"));
        }
        if self.scales > 1 && self.scale_max == self.scale_min {
            return Err(invalid("stability.scales", "several scales need scale_min < scale_max"));
        }
        let cfg = SweepConfig {
            scales: log_scales(self.scale_min, self.scale_max, self.scales),
            samples_per_scale: self.samples,
            seed,
            models: self
                .models
                .iter()
                .map(|m| parse("stability.models", m))
                .collect::<Result<_, _>>()?,
            formulations: self
                .formulations
                .iter()
                .map(|f| parse_formulation("stability.formulations", f))
                .collect::<Result<_, _>>()?,
            quantities: self
                .quantities
                .iter()
                .map(|q| parse::<Quantity>("stability.quantities", q))
                .collect::<Result<_, _>>()?,
            kernel: self.kernel.resolve("stability.kernel")?,
            svk_anchor: self.svk_anchor,
        };
        cfg.validate().map_err(|e| invalid("stability", e))?;
        Ok(cfg)
    }
}

/// One structured mesh: `n0³` coarse cells refined `level` times, degree `degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub n0: usize,
    pub level: u32,
    pub degree: usize,
    pub amplitude: f64,
    pub extent: f64,
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection { n0: 1, level: 2, degree: 2, amplitude: Deformation::default().amplitude, extent: 1.0 }
    }
}

impl MeshSection {
    pub fn new(degree: usize, n0: usize, level: u32) -> Self {
        MeshSection { n0, level, degree, ..Self::default() }
    }

    pub fn n_dofs(&self) -> usize {
        let n = self.n0 << self.level;
        3 * (n * self.degree + 1).pow(3)
    }

    pub fn validate(&self, field: &str) -> Result<(), ConfigError> {
        if self.n0 == 0 || self.degree == 0 {
            return Err(invalid(field, "n0 and degree must be positive"));
        }
        if self.level > 12 {
            return Err(invalid(field, "level above 12"));
        }
        if !(self.extent > 0.0) || !(self.amplitude >= 0.0) {
            return Err(invalid(field, "extent must be positive and amplitude non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub model: String,
    pub params: ParamsSection,
    pub domains: Vec<String>,
    pub strategies: Vec<String>,
    /// `tangent_apply` and/or `residual`.
    pub operations: Vec<String>,
    pub meshes: Vec<MeshSection>,
    /// Repetitions per timed block.
    pub block: usize,
    /// Blocks are repeated until this much time has elapsed.
    pub min_seconds: f64,
    pub repeats: usize,
    pub best_of: usize,
    pub output: PathBuf,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            model: "fiber".into(),
            params: ParamsSection::default(),
            domains: vec!["material".into(), "spatial".into()],
            strategies: vec!["none".into(), "scalar".into(), "tensor".into()],
            operations: vec!["tangent_apply".into(), "residual".into()],
            meshes: vec![
                MeshSection::new(1, 2, 4),
                MeshSection::new(2, 2, 3),
                MeshSection::new(3, 5, 1),
                MeshSection::new(4, 1, 3),
            ],
            block: 100,
            min_seconds: 1.0,
            repeats: 10,
            best_of: 3,
            output: "bench.csv".into(),
        }
    }
}

/// Timed operation of the throughput benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operation {
    TangentApply,
    Residual,
}

impl std::fmt::Display for Operation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Operation::TangentApply => "tangent_apply",
            Operation::Residual => "residual",
        })
    }
}

impl FromStr for Operation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tangent_apply" => Ok(Operation::TangentApply),
            "residual" => Ok(Operation::Residual),
            _ => Err(format!("unknown operation `{s}` (expected tangent_apply or residual)")),
        }
    }
}

/// Validated benchmark plan.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub material: Material,
    pub variants: Vec<(Domain, Strategy)>,
    pub operations: Vec<Operation>,
    pub meshes: Vec<MeshSection>,
    pub block: usize,
    pub min_seconds: f64,
    pub repeats: usize,
    pub best_of: usize,
}

impl BenchSection {
    pub fn plan(&self) -> Result<BenchPlan, ConfigError> {
        let model: ModelKind = parse("bench.model", &self.model)?;
        let material = self.params.resolve(model, "bench.params")?;
        let domains: Vec<Domain> =
            self.domains.iter().map(|d| parse("bench.domains", d)).collect::<Result<_, _>>()?;
        let strategies: Vec<Strategy> =
            self.strategies.iter().map(|s| parse("bench.strategies", s)).collect::<Result<_, _>>()?;
        let operations: Vec<Operation> =
            self.operations.iter().map(|o| parse("bench.operations", o)).collect::<Result<_, _>>()?;
        if domains.is_empty() || strategies.is_empty() || operations.is_empty() || self.meshes.is_empty() {
            return Err(invalid("bench", "domains, strategies, operations and meshes must be non-empty"));
        }
        for (i, m) in self.meshes.iter().enumerate() {
            m.validate(&format!("bench.meshes[{i}]"))?;
        }
        if self.block == 0 || self.repeats == 0 || self.best_of == 0 || self.best_of > self.repeats {
            return Err(invalid("bench", "need block, repeats >= 1 and 1 <= best_of <= repeats"));
        }
        if !(self.min_seconds >= 0.0) {
            return Err(invalid("bench.min_seconds", "must be non-negative"));
        }
        let variants = domains.iter().flat_map(|&d| strategies.iter().map(move |&s| (d, s))).collect();
        Ok(BenchPlan {
            material,
            variants,
            operations,
            meshes: self.meshes.clone(),
            block: self.block,
            min_seconds: self.min_seconds,
            repeats: self.repeats,
            best_of: self.best_of,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSection {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonSection {
    fn default() -> Self {
        let d = NewtonConfig::default();
        NewtonSection { abs_tol: d.eps_abs, rel_tol: d.eps_rel, max_iter: d.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FgmresSection {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub restart: usize,
    pub max_restarts: usize,
}

impl Default for FgmresSection {
    fn default() -> Self {
        let d = FgmresConfig::default();
        FgmresSection {
            abs_tol: d.abs_tol,
            rel_tol: d.rel_tol,
            restart: d.restart,
            max_restarts: d.max_restarts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultigridSection {
    /// `single` or `double`.
    pub precision: String,
    pub smoothing_degree: usize,
    pub smoothing_range: f64,
    pub eig_safety: f64,
    pub lanczos_steps: usize,
    pub direct_limit: usize,
    pub cg_rel_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for MultigridSection {
    fn default() -> Self {
        let d = MgConfig::default();
        MultigridSection {
            precision: d.precision.to_string(),
            smoothing_degree: d.smoothing_degree,
            smoothing_range: d.smoothing_range,
            eig_safety: d.eig_safety,
            lanczos_steps: d.lanczos_steps,
            direct_limit: d.direct_limit,
            cg_rel_tol: d.cg_rel_tol,
            cg_max_iter: d.cg_max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub model: String,
    pub params: ParamsSection,
    pub formulation: String,
    pub strategy: String,
    pub kernel: KernelSection,
    pub mesh: MeshSection,
    /// Pressure on `load_face`, in the units of the moduli.
    pub pressure: f64,
    pub load_steps: usize,
    pub clamped_face: String,
    pub load_face: String,
    pub newton: NewtonSection,
    pub fgmres: FgmresSection,
    pub multigrid: MultigridSection,
    pub output: PathBuf,
}

impl Default for SolveSection {
    fn default() -> Self {
        let d = CubeProblem::default();
        SolveSection {
            model: d.model.to_string(),
            params: ParamsSection::default(),
            formulation: d.operator.formulation.tag(),
            strategy: d.operator.strategy.to_string(),
            kernel: KernelSection::default(),
            mesh: MeshSection::default(),
            pressure: d.pressure,
            load_steps: d.load_steps,
            clamped_face: face_name(d.clamped_face).into(),
            load_face: face_name(d.load_face).into(),
            newton: NewtonSection::default(),
            fgmres: FgmresSection::default(),
            multigrid: MultigridSection::default(),
            output: "solve.csv".into(),
        }
    }
}

const FACES: [(&str, Face); 6] = [
    ("xmin", Face::XMin),
    ("xmax", Face::XMax),
    ("ymin", Face::YMin),
    ("ymax", Face::YMax),
    ("zmin", Face::ZMin),
    ("zmax", Face::ZMax),
];

fn face_name(face: Face) -> &'static str {
    FACES.iter().find(|(_, f)| *f == face).map(|(n, _)| *n).unwrap()
}

fn parse_face(field: &str, s: &str) -> Result<Face, ConfigError> {
    FACES
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(s))
        .map(|(_, f)| *f)
        .ok_or_else(|| invalid(field, format!("unknown face `{s}` (expected xmin, xmax, ..., zmax)")))
}

impl SolveSection {
    pub fn problem(&self, seed: u64) -> Result<CubeProblem, ConfigError> {
        let model: ModelKind = parse("solve.model", &self.model)?;
        let material = self.params.resolve(model, "solve.params")?;
        self.mesh.validate("solve.mesh")?;
        let clamped_face = parse_face("solve.clamped_face", &self.clamped_face)?;
        let load_face = parse_face("solve.load_face", &self.load_face)?;
        if clamped_face == load_face {
            return Err(invalid("solve.load_face", "must differ from the clamped face"));
        }
        if !self.pressure.is_finite() || self.load_steps == 0 {
            return Err(invalid("solve", "pressure must be finite and load_steps positive"));
        }
        let operator = OperatorConfig {
            formulation: parse_formulation("solve.formulation", &self.formulation)?,
            strategy: parse("solve.strategy", &self.strategy)?,
            kernel: self.kernel.resolve("solve.kernel")?,
        };
        let newton = NewtonConfig {
            eps_abs: self.newton.abs_tol,
            eps_rel: self.newton.rel_tol,
            max_iter: self.newton.max_iter,
        };
        newton.validate().map_err(|e| invalid("solve.newton", e))?;
        let fgmres = FgmresConfig {
            abs_tol: self.fgmres.abs_tol,
            rel_tol: self.fgmres.rel_tol,
            restart: self.fgmres.restart,
            max_restarts: self.fgmres.max_restarts,
        };
        fgmres.validate().map_err(|e| invalid("solve.fgmres", e))?;
        let mg = &self.multigrid;
        let precision: MgPrecision = parse("solve.multigrid.precision", &mg.precision)?;
        if mg.smoothing_degree == 0 || !(mg.smoothing_range > 1.0) || !(mg.eig_safety >= 1.0) || mg.lanczos_steps == 0 {
            return Err(invalid(
                "solve.multigrid",
                "need smoothing_degree >= 1, smoothing_range > 1, eig_safety >= 1, lanczos_steps >= 1",
            ));
        }
        let multigrid = MgConfig {
            smoothing_degree: mg.smoothing_degree,
            smoothing_range: mg.smoothing_range,
            eig_safety: mg.eig_safety,
            lanczos_steps: mg.lanczos_steps,
            seed,
            precision,
            direct_limit: mg.direct_limit,
            cg_rel_tol: mg.cg_rel_tol,
            cg_max_iter: mg.cg_max_iter,
        };
        Ok(CubeProblem {
            n0: self.mesh.n0,
            refinements: self.mesh.level,
            degree: self.mesh.degree,
            extent: self.mesh.extent,
            deformation: Deformation { amplitude: self.mesh.amplitude },
            model,
            params: material.params,
            operator,
            pressure: self.pressure,
            clamped_face,
            load_face,
            load_steps: self.load_steps,
            newton,
            fgmres,
            multigrid,
        })
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse { path: path.to_string(), source })
    }

    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: name.clone(), source })?;
        let cfg = Self::from_toml(&text, &name)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    /// Checks every section, including the ones the chosen subcommand does not use.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.stability.sweep(self.seed)?;
        self.bench.plan()?;
        self.solve.problem(self.seed)?;
        Ok(())
    }
}

/// Creates (truncates) `path` to make sure results can be written before any work starts.
pub fn check_writable(path: &Path) -> Result<(), ConfigError> {
    std::fs::File::create(path)
        .map(drop)
        .map_err(|source| ConfigError::Output { path: path.display().to_string(), source })
}
