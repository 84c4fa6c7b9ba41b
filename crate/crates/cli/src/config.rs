use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use synplan_core::learn::{McmcConfig, OverlapBasis, Priors};
use synplan_core::milp::SolverConfig;
use synplan_core::planner::PlannerKind;
use synplan_core::process::{ProcessSpec, SCHEMA_VERSION};
use synplan_core::sim::{CellGeometry, HumanVariability, SafetyModel};

use crate::PipelineError;

/// A document given either inline or as a path relative to the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlannerSpec {
    Baseline,
    /// Task-id pairs that must not run in parallel.
    NotNeighboring { pairs: Vec<(String, String)> },
    Stp,
    Rstp,
}

impl PlannerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PlannerSpec::Baseline => "baseline",
            PlannerSpec::NotNeighboring { .. } => "not_neighboring",
            PlannerSpec::Stp => "stp",
            PlannerSpec::Rstp => "rstp",
        }
    }

    pub fn kind(&self, spec: &ProcessSpec) -> Result<PlannerKind, PipelineError> {
        Ok(match self {
            PlannerSpec::Baseline => PlannerKind::Baseline,
            PlannerSpec::Stp => PlannerKind::Stp,
            PlannerSpec::Rstp => PlannerKind::Rstp,
            PlannerSpec::NotNeighboring { pairs } => {
                let index = |id: &str| {
                    spec.task_index(id)
                        .ok_or_else(|| PipelineError::Config(format!("not-neighboring pair names unknown task `{id}`")))
                };
                let pairs = pairs
                    .iter()
                    .map(|(a, b)| Ok((index(a)?, index(b)?)))
                    .collect::<Result<Vec<_>, PipelineError>>()?;
                PlannerKind::NotNeighboring(pairs)
            }
        })
    }
}

/// Per-planner overrides of the solver defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub gap_target: Option<f64>,
    pub time_limit_secs: Option<f64>,
    pub node_limit: Option<u64>,
}

/// Node budget applied when none is configured. Wall-clock limits make
/// results depend on machine speed, so the pipeline leans on this instead.
pub const DEFAULT_NODE_LIMIT: u64 = 20_000;

fn default_dt() -> f64 {
    0.05
}
fn default_n_random() -> usize {
    50
}
fn default_n_eval() -> usize {
    20
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_d_max() -> f64 {
    3.0
}
fn default_grid_step() -> f64 {
    0.05
}
fn default_freeze_below() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema: u32,
    pub process: Source<ProcessSpec>,
    pub geometry: Source<CellGeometry>,
    pub safety: SafetyModel,
    #[serde(default)]
    pub variability: HumanVariability,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_n_random")]
    pub n_random: usize,
    #[serde(default = "default_n_eval")]
    pub n_eval: usize,
    pub planners: Vec<PlannerSpec>,
    /// Keyed by planner name.
    #[serde(default)]
    pub solver: BTreeMap<String, SolverOverrides>,
    #[serde(default)]
    pub priors: Priors,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default = "default_freeze_below")]
    pub freeze_below: f64,
    #[serde(default)]
    pub overlap_basis: OverlapBasis,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_d_max")]
    pub d_max: f64,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
}

/// A config with its documents loaded and checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: PipelineConfig,
    pub spec: ProcessSpec,
    pub geometry: CellGeometry,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

fn load_source<T: Clone + for<'de> Deserialize<'de>>(src: &Source<T>, base: &Path) -> Result<T, PipelineError> {
    match src {
        Source::Inline(v) => Ok(v.clone()),
        Source::Path(p) => read_json(&base.join(p)),
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Resolved, PipelineError> {
        let config: PipelineConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut resolved = config.resolve(base)?;
        if resolved.config.out.is_relative() {
            resolved.config.out = base.join(&resolved.config.out);
        }
        Ok(resolved)
    }

    /// Loads referenced documents relative to `base` and validates everything.
    pub fn resolve(self, base: &Path) -> Result<Resolved, PipelineError> {
        let spec = load_source(&self.process, base)?;
        let geometry = load_source(&self.geometry, base)?;
        let resolved = Resolved {
            config: self,
            spec,
            geometry,
        };
        resolved.validate()?;
        Ok(resolved)
    }

    pub fn solver_config(&self, planner: &PlannerSpec, kind: &PlannerKind) -> SolverConfig {
        let mut cfg = kind.default_solver_config();
        cfg.node_limit = Some(DEFAULT_NODE_LIMIT);
        cfg.seed = self.seed;
        if let Some(o) = self.solver.get(planner.name()) {
            if let Some(g) = o.gap_target {
                cfg.gap_target = g;
            }
            if let Some(t) = o.time_limit_secs {
                cfg.time_limit_secs = t;
            }
            if o.node_limit.is_some() {
                cfg.node_limit = o.node_limit;
            }
        }
        cfg
    }
}

impl Resolved {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let c = &self.config;
        let bad = |msg: &str| Err(PipelineError::Config(msg.into()));
        if c.schema != SCHEMA_VERSION {
            return Err(PipelineError::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                c.schema
            )));
        }
        if c.n_random == 0 {
            return bad("n_random must be at least 1");
        }
        if c.n_eval == 0 {
            return bad("n_eval must be at least 1");
        }
        if c.planners.is_empty() {
            return bad("at least one planner is required");
        }
        if !(c.dt > 0.0 && c.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(c.d_max > 0.0 && c.grid_step > 0.0 && c.grid_step <= c.d_max) {
            return bad("need 0 < grid_step <= d_max");
        }
        if !(c.variability.sigma_h >= 0.0 && c.variability.sigma_h.is_finite()) {
            return bad("sigma_h must be non-negative");
        }
        if c.mcmc.steps <= c.mcmc.burn_in || c.mcmc.chains == 0 {
            return bad("mcmc needs steps > burn_in and at least one chain");
        }
        for (k, p) in c.planners.iter().enumerate() {
            if c.planners[..k].iter().any(|q| q.name() == p.name()) {
                return Err(PipelineError::Config(format!("planner `{}` listed twice", p.name())));
            }
        }
        for name in c.solver.keys() {
            if !c.planners.iter().any(|p| p.name() == name) {
                return Err(PipelineError::Config(format!("solver settings for unconfigured planner `{name}`")));
            }
        }
        c.priors.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        c.safety.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.spec.validate()?;
        self.geometry.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.geometry
            .covers(&self.spec)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        for p in &c.planners {
            p.kind(&self.spec)?;
        }
        Ok(())
    }

    /// SHA-256 of the config with its documents inlined.
    pub fn hash(&self) -> String {
        let mut c = self.config.clone();
        c.process = Source::Inline(self.spec.clone());
        c.geometry = Source::Inline(self.geometry.clone());
        c.out = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
