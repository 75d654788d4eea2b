//! Experiment configuration: parsing, defaults and validation.

use std::path::{Path, PathBuf};

use fracns::grid::{GridSpec, Preset};
use fracns::mild::{SolverConfig, TimeProfile, WorkingNorm};
use fracns::varlp::{Domain, ExponentRule, VariableExponent};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: GridBlock,
    pub solver: SolverBlock,
    #[serde(default)]
    pub exponents: ExponentBlock,
    #[serde(default)]
    pub data: DataBlock,
    #[serde(default)]
    pub run: RunBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBlock {
    pub d: usize,
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverBlock {
    pub alpha: f64,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "one")]
    pub viscosity: f64,
    #[serde(default)]
    pub classical_symbol: bool,
    #[serde(default = "yes")]
    pub nonlinear: bool,
    #[serde(default)]
    pub working_norm: WorkingNorm,
    #[serde(default = "default_budget")]
    pub memory_budget_mb: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentBlock {
    /// Time exponent of the local theorem.
    #[serde(default = "default_time_rule")]
    pub time: ExponentRule,
    /// Space exponent of the global theorem and of `norm`.
    #[serde(default = "default_space_rule")]
    pub space: ExponentRule,
    /// Spatial Lebesgue index of the local theorem.
    #[serde(default = "default_q")]
    pub q: f64,
    /// Mixed-norm index; `3/(2(2α−1))` when absent.
    #[serde(default)]
    pub pp: Option<f64>,
}

impl Default for ExponentBlock {
    fn default() -> Self {
        Self {
            time: default_time_rule(),
            space: default_space_rule(),
            q: default_q(),
            pp: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct DataBlock {
    #[serde(default)]
    pub initial: InitialBlock,
    #[serde(default)]
    pub forcing: ForcingBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialBlock {
    #[serde(default)]
    pub preset: Option<String>,
    /// FNSV file used instead of a preset.
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    /// Bump radius.
    #[serde(default)]
    pub radius: Option<f64>,
}

impl Default for InitialBlock {
    fn default() -> Self {
        Self {
            preset: Some("random_divfree".into()),
            file: None,
            amplitude: default_amplitude(),
            seed: 0,
            radius: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingBlock {
    #[default]
    Zero,
    /// `θ(t)·f₀` with `f₀` a divergence-free preset.
    Field {
        preset: String,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        profile: TimeProfile,
    },
    /// `div(θ(t)·𝓕₀)` with `𝓕₀ = bump ⊗ A` for a seeded random matrix `A`.
    Tensor {
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        profile: TimeProfile,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunBlock {
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub seed: u64,
    /// Horizons of the theorem sweeps.
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    /// Trials of the `C_B` estimate; 0 skips it where optional.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_nodes_per_unit")]
    pub nodes_per_unit: f64,
    /// Oracle substeps per node interval.
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    /// FNSV input of `norm`.
    #[serde(default)]
    pub field: Option<PathBuf>,
    #[serde(default)]
    pub kernel: KernelOptions,
    #[serde(default)]
    pub operators: OperatorOptions,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            out_dir: None,
            format: Format::Csv,
            seed: 0,
            times: None,
            trials: default_trials(),
            nodes_per_unit: default_nodes_per_unit(),
            substeps: default_substeps(),
            field: None,
            kernel: KernelOptions::default(),
            operators: OperatorOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Defaults to the solver α.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_kernel_times")]
    pub times: Vec<f64>,
    /// Radii in units of `t^{1/(2α)}`.
    #[serde(default = "default_scaled_radii")]
    pub scaled_radii: Vec<f64>,
    /// Include the Oseen kernel in the decay report.
    #[serde(default)]
    pub oseen: bool,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            alpha: None,
            times: default_kernel_times(),
            scaled_radii: default_scaled_radii(),
            oseen: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    #[default]
    Maximal,
    RieszPotential,
    MixedRiesz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorOptions {
    #[serde(default)]
    pub operator: OperatorKind,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    /// Riesz order; `d/(2p⁺)` when absent.
    #[serde(default)]
    pub beta: Option<f64>,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self {
            operator: OperatorKind::Maximal,
            ensemble: default_ensemble(),
            beta: None,
        }
    }
}

fn default_length() -> f64 {
    std::f64::consts::TAU
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_nodes() -> usize {
    11
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    50
}
fn default_budget() -> usize {
    4096
}
fn default_time_rule() -> ExponentRule {
    ExponentRule::Constant { p0: 5.0 }
}
fn default_space_rule() -> ExponentRule {
    ExponentRule::Constant { p0: 4.0 }
}
fn default_q() -> f64 {
    6.0
}
fn default_amplitude() -> f64 {
    0.1
}
fn default_trials() -> usize {
    8
}
fn default_nodes_per_unit() -> f64 {
    16.0
}
fn default_substeps() -> usize {
    4
}
fn default_kernel_times() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_scaled_radii() -> Vec<f64> {
    (1..=32).map(|i| 0.25 * i as f64).collect()
}
fn default_ensemble() -> usize {
    10
}

const DIVFREE_PRESETS: [&str; 3] = ["taylor_green_2d", "abc_beltrami_3d", "random_divfree"];

fn preset_dim_issue(name: &str, d: usize) -> Option<String> {
    match name {
        "taylor_green_2d" if d < 2 => Some("preset taylor_green_2d needs d >= 2".into()),
        "abc_beltrami_3d" if d != 3 => Some("preset abc_beltrami_3d needs d = 3".into()),
        _ => None,
    }
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl ExperimentConfig {
    /// Read, parse and validate a config file.
    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::parse(&text)?;
        let hash = cfg.hash();
        Ok((cfg, hash))
    }

    /// Parse JSON text; unknown keys and every constraint violation are reported together.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::MalformedJson(e.to_string()))?;
        if !value.is_object() {
            return Err(CliError::Config(vec!["config must be a JSON object".into()]));
        }
        let mut unknown = Vec::new();
        let parsed: Result<Self, _> = serde_ignored::deserialize(value, |path| unknown.push(format!("unknown key `{path}`")));
        let mut errors = unknown;
        match parsed {
            Ok(cfg) => {
                errors.extend(cfg.violations());
                if errors.is_empty() {
                    Ok(cfg)
                } else {
                    Err(CliError::Config(errors))
                }
            }
            Err(e) => {
                errors.push(e.to_string());
                Err(CliError::Config(errors))
            }
        }
    }

    /// SHA-256 of the canonical JSON of the resolved config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Cross-field constraint violations.
    pub fn violations(&self) -> Vec<String> {
        let mut e = Vec::new();
        let g = &self.grid;
        if !(1..=3).contains(&g.d) {
            e.push(format!("grid.d = {} must be 1, 2 or 3", g.d));
        }
        if g.n < 4 || !g.n.is_multiple_of(2) {
            e.push(format!("grid.n = {} must be even and >= 4", g.n));
        }
        if !positive(g.length) {
            e.push("grid.length must be positive".into());
        }
        let s = &self.solver;
        if !(s.alpha > 0.5 && s.alpha <= 1.0) {
            e.push(format!("alpha out of (0.5, 1]: {}", s.alpha));
        }
        if !positive(s.t_end) {
            e.push("solver.t_end must be positive".into());
        }
        if s.nodes < 2 {
            e.push("solver.nodes must be >= 2".into());
        }
        if !positive(s.tol) {
            e.push("solver.tol must be positive".into());
        }
        if s.max_iter == 0 {
            e.push("solver.max_iter must be >= 1".into());
        }
        if !positive(s.viscosity) {
            e.push("solver.viscosity must be positive".into());
        }
        if s.memory_budget_mb == 0 {
            e.push("solver.memory_budget_mb must be >= 1".into());
        }
        match &s.working_norm {
            WorkingNorm::SpectralMax => {}
            WorkingNorm::Et { p, q } => {
                check_rule(&mut e, "solver.working_norm.p", p, &Domain::Time { t_end: 1.0, nodes: 5 });
                if !(*q > 1.0) {
                    e.push("solver.working_norm.q must exceed 1".into());
                }
            }
            WorkingNorm::EScript { p } => {
                if let Ok(grid) = self.grid_spec() {
                    check_rule(&mut e, "solver.working_norm.p", p, &Domain::Grid(grid));
                }
            }
        }

        let x = &self.exponents;
        if matches!(x.time, ExponentRule::Table { .. }) {
            e.push("exponents.time must be a rule, not a table".into());
        } else {
            check_rule(&mut e, "exponents.time", &x.time, &Domain::Time { t_end: 1.0, nodes: 5 });
        }
        if let Ok(grid) = self.grid_spec() {
            check_rule(&mut e, "exponents.space", &x.space, &Domain::Grid(grid));
        }
        if !(x.q > 1.0) {
            e.push("exponents.q must exceed 1".into());
        }
        if let Some(pp) = x.pp {
            if !(pp > 1.0) {
                e.push("exponents.pp must exceed 1".into());
            }
        }

        let i = &self.data.initial;
        match (&i.preset, &i.file) {
            (Some(_), Some(_)) => e.push("data.initial: give either preset or file, not both".into()),
            (None, None) => e.push("data.initial: one of preset or file is required".into()),
            (Some(name), None) => match name.parse::<Preset>() {
                Err(_) => e.push(format!("data.initial.preset: unknown preset `{name}`")),
                Ok(_) => e.extend(preset_dim_issue(name, g.d)),
            },
            (None, Some(_)) => {}
        }
        if !i.amplitude.is_finite() {
            e.push("data.initial.amplitude must be finite".into());
        }
        if let Some(r) = i.radius {
            if !positive(r) {
                e.push("data.initial.radius must be positive".into());
            }
        }
        match &self.data.forcing {
            ForcingBlock::Zero => {}
            ForcingBlock::Field { preset, amplitude, profile, .. } => {
                if !DIVFREE_PRESETS.contains(&preset.as_str()) {
                    e.push(format!("data.forcing.preset `{preset}` must be one of {DIVFREE_PRESETS:?}"));
                } else {
                    e.extend(preset_dim_issue(preset, g.d));
                }
                if !amplitude.is_finite() {
                    e.push("data.forcing.amplitude must be finite".into());
                }
                check_profile(&mut e, profile);
            }
            ForcingBlock::Tensor { radius, amplitude, profile, .. } => {
                if let Some(r) = radius {
                    if !positive(*r) {
                        e.push("data.forcing.radius must be positive".into());
                    }
                }
                if !amplitude.is_finite() {
                    e.push("data.forcing.amplitude must be finite".into());
                }
                check_profile(&mut e, profile);
            }
        }

        let r = &self.run;
        if let Some(times) = &r.times {
            if times.is_empty() || times.iter().any(|t| !positive(*t)) {
                e.push("run.times must be a nonempty list of positive horizons".into());
            }
        }
        if !positive(r.nodes_per_unit) {
            e.push("run.nodes_per_unit must be positive".into());
        }
        if r.substeps == 0 {
            e.push("run.substeps must be >= 1".into());
        }
        let k = &r.kernel;
        if let Some(a) = k.alpha {
            if !(a > 0.0 && a <= 1.0) {
                e.push(format!("run.kernel.alpha out of (0, 1]: {a}"));
            }
        }
        if k.times.is_empty() || k.times.iter().any(|t| !positive(*t)) {
            e.push("run.kernel.times must be a nonempty list of positive times".into());
        }
        if k.scaled_radii.is_empty() || k.scaled_radii.iter().any(|t| !positive(*t)) {
            e.push("run.kernel.scaled_radii must be a nonempty list of positive radii".into());
        }
        if r.operators.ensemble == 0 {
            e.push("run.operators.ensemble must be >= 1".into());
        }
        if let Some(b) = r.operators.beta {
            if !positive(b) {
                e.push("run.operators.beta must be positive".into());
            }
        }
        e
    }

    pub fn grid_spec(&self) -> fracns::Result<GridSpec> {
        GridSpec::new(self.grid.d, self.grid.n, self.grid.length)
    }

    pub fn solver_config(&self) -> fracns::Result<SolverConfig> {
        let s = &self.solver;
        let mut c = SolverConfig::new(s.alpha, s.t_end, s.nodes, self.grid_spec()?)?;
        c.tol = s.tol;
        c.max_iter = s.max_iter;
        c.dealias = s.dealias;
        c.viscosity = s.viscosity;
        c.classical_symbol = s.classical_symbol;
        c.nonlinear = s.nonlinear;
        c.working_norm = s.working_norm.clone();
        c.memory_budget = s.memory_budget_mb << 20;
        c.validate()?;
        Ok(c)
    }

    /// Apply the `--seed` override to every seeded input.
    pub fn override_seed(&mut self, seed: u64) {
        self.run.seed = seed;
        self.data.initial.seed = seed;
        match &mut self.data.forcing {
            ForcingBlock::Zero => {}
            ForcingBlock::Field { seed: s, .. } | ForcingBlock::Tensor { seed: s, .. } => *s = seed,
        }
    }
}

fn check_rule(errors: &mut Vec<String>, key: &str, rule: &ExponentRule, domain: &Domain) {
    if let ExponentRule::Table { values } = rule {
        if values.len() != domain.len() {
            errors.push(format!("{key}: table has {} values, domain has {}", values.len(), domain.len()));
            return;
        }
    }
    if let Err(err) = VariableExponent::new(rule.clone(), domain.clone()) {
        errors.push(format!("{key}: {err}"));
    }
}

fn check_profile(errors: &mut Vec<String>, profile: &TimeProfile) {
    let ok = match *profile {
        TimeProfile::Constant => true,
        TimeProfile::Exponential { rate } => rate.is_finite(),
        TimeProfile::Cosine { omega } => omega.is_finite(),
    };
    if !ok {
        errors.push("data.forcing.profile parameters must be finite".into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"{"grid": {"d": 3, "n": 16}, "solver": {"alpha": 0.8}}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse(MIN).unwrap();
        assert_eq!(c.solver.tol, 1e-10);
        assert!(c.solver.dealias);
        assert_eq!(c.solver.nodes, 11);
        assert_eq!(c.run.format, Format::Csv);
        assert_eq!(c.data.forcing, ForcingBlock::Zero);
        assert!(c.solver_config().is_ok());
    }

    #[test]
    fn alpha_range_is_enforced() {
        let text = MIN.replace("0.8", "1.2");
        match ExperimentConfig::parse(&text) {
            Err(CliError::Config(v)) => assert!(v.iter().any(|m| m.contains("alpha out of (0.5, 1]")), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_collected() {
        let text = r#"{"grid": {"d": 3, "n": 15, "colour": 1}, "solver": {"alpha": 2.0, "nodes": 1}, "extra": true}"#;
        let Err(CliError::Config(v)) = ExperimentConfig::parse(text) else { panic!() };
        assert!(v.iter().any(|m| m.contains("`extra`")));
        assert!(v.iter().any(|m| m.contains("grid.colour")));
        assert!(v.iter().any(|m| m.contains("grid.n")));
        assert!(v.iter().any(|m| m.contains("alpha out of")));
        assert!(v.iter().any(|m| m.contains("solver.nodes")));
    }

    #[test]
    fn malformed_json_is_distinguished() {
        assert!(matches!(ExperimentConfig::parse("{\"grid\": "), Err(CliError::MalformedJson(_))));
        assert!(matches!(ExperimentConfig::parse("{\"grid\": 3}"), Err(CliError::Config(_))));
    }

    #[test]
    fn preset_dimension_is_checked() {
        let text = r#"{"grid": {"d": 2, "n": 16}, "solver": {"alpha": 0.8}, "data": {"initial": {"preset": "abc_beltrami_3d"}}}"#;
        let Err(CliError::Config(v)) = ExperimentConfig::parse(text) else { panic!() };
        assert!(v.iter().any(|m| m.contains("d = 3")));
    }

    #[test]
    fn seed_override_reaches_every_input() {
        let mut c = ExperimentConfig::parse(MIN).unwrap();
        c.data.forcing = ForcingBlock::Tensor { radius: None, amplitude: 1.0, seed: 1, profile: TimeProfile::Constant };
        let h = c.hash();
        c.override_seed(42);
        assert_eq!(c.data.initial.seed, 42);
        assert!(matches!(c.data.forcing, ForcingBlock::Tensor { seed: 42, .. }));
        assert_ne!(c.hash(), h);
    }
}
