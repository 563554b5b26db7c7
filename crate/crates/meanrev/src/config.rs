//! Strict configuration parsing. The format is TOML: key-value pairs in
//! nested sections, unknown keys rejected so a typo can never silently change
//! a run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    observable_from_registry, reversion_from_registry, ChannelSpec, CoefficientModel,
    ObservableFunction, ReversionFunction,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    /// One experiment per entry; an empty list is a valid (vacuous) run.
    #[serde(default)]
    pub experiment: Vec<ExperimentSection>,
    #[serde(default)]
    pub numeric: NumericSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub reversion: String,
    #[serde(default)]
    pub reversion_params: BTreeMap<String, f64>,
    #[serde(default = "default_observable")]
    pub observable: String,
    #[serde(default)]
    pub observable_params: BTreeMap<String, f64>,
    #[serde(default)]
    pub coefficients: CoefficientsSection,
    /// Declares the bounded-coefficient band [kappa, 1/kappa].
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

fn default_observable() -> String {
    "square".to_string()
}

fn default_horizon() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSection {
    #[serde(default = "zero_channel")]
    pub b: ChannelConfig,
    #[serde(default = "unit_channel")]
    pub c: ChannelConfig,
    #[serde(default = "unit_channel")]
    pub l: ChannelConfig,
    #[serde(default = "unit_channel")]
    pub m: ChannelConfig,
    #[serde(default = "unit_channel")]
    pub h: ChannelConfig,
    #[serde(default = "unit_channel")]
    pub k: ChannelConfig,
}

impl Default for CoefficientsSection {
    fn default() -> Self {
        CoefficientsSection {
            b: zero_channel(),
            c: unit_channel(),
            l: unit_channel(),
            m: unit_channel(),
            h: unit_channel(),
            k: unit_channel(),
        }
    }
}

fn zero_channel() -> ChannelConfig {
    ChannelConfig::Constant { value: 0.0 }
}

fn unit_channel() -> ChannelConfig {
    ChannelConfig::Constant { value: 1.0 }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    Constant {
        value: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    ClippedOu {
        start: f64,
        mean: f64,
        rate: f64,
        vol: f64,
        floor: f64,
        ceil: f64,
    },
    ClippedGeometric {
        start: f64,
        drift: f64,
        vol: f64,
        floor: f64,
        ceil: f64,
    },
}

impl From<&ChannelConfig> for ChannelSpec {
    fn from(cfg: &ChannelConfig) -> ChannelSpec {
        match cfg {
            ChannelConfig::Constant { value } => ChannelSpec::Constant(*value),
            ChannelConfig::Polynomial { coeffs } => ChannelSpec::Polynomial {
                coeffs: coeffs.clone(),
            },
            ChannelConfig::ClippedOu {
                start,
                mean,
                rate,
                vol,
                floor,
                ceil,
            } => ChannelSpec::ClippedOu {
                start: *start,
                mean: *mean,
                rate: *rate,
                vol: *vol,
                floor: *floor,
                ceil: *ceil,
            },
            ChannelConfig::ClippedGeometric {
                start,
                drift,
                vol,
                floor,
                ceil,
            } => ChannelSpec::ClippedGeometric {
                start: *start,
                drift: *drift,
                vol: *vol,
                floor: *floor,
                ceil: *ceil,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    LimitConvergence,
    LocalWindow,
    Ergodic,
    CirBound,
    MomentGrowth,
    InequalitySuite,
    IdentitySuite,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::LimitConvergence => "limit_convergence",
            ExperimentKind::LocalWindow => "local_window",
            ExperimentKind::Ergodic => "ergodic",
            ExperimentKind::CirBound => "cir_bound",
            ExperimentKind::MomentGrowth => "moment_growth",
            ExperimentKind::InequalitySuite => "inequality_suite",
            ExperimentKind::IdentitySuite => "identity_suite",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericSection {
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_z0")]
    pub z0: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// Window start for the local-window experiment.
    #[serde(default = "default_window_t")]
    pub window_t: f64,
    /// Horizon for ergodic averages.
    #[serde(default = "default_ergodic_horizon")]
    pub ergodic_horizon: f64,
    /// Moment order for cir_bound / moment_growth.
    #[serde(default = "default_moment_n")]
    pub moment_n: u32,
    #[serde(default)]
    pub cir: Option<CirSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirSection {
    pub nu: f64,
    pub theta: f64,
    pub sigma: f64,
    pub y0: f64,
    #[serde(default = "default_cir_horizon")]
    pub horizon: f64,
}

fn default_cir_horizon() -> f64 {
    100.0
}

fn default_epsilons() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}
fn default_dt() -> f64 {
    1e-4
}
fn default_n_paths() -> usize {
    200
}
fn default_p() -> f64 {
    2.0
}
fn default_delta() -> f64 {
    0.1
}
fn default_eta() -> f64 {
    1.0
}
fn default_z0() -> f64 {
    1.0
}
fn default_rel_tol() -> f64 {
    1e-10
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_window_t() -> f64 {
    0.5
}
fn default_ergodic_horizon() -> f64 {
    1e4
}
fn default_moment_n() -> u32 {
    2
}

impl Default for NumericSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults must deserialize")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
}

fn default_directory() -> String {
    "out".to_string()
}

fn default_master_seed() -> u64 {
    42
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: default_directory(),
            master_seed: default_master_seed(),
        }
    }
}

impl RunConfig {
    pub fn coefficient_model(&self) -> CoefficientModel {
        let cs = &self.model.coefficients;
        CoefficientModel {
            b: (&cs.b).into(),
            c: (&cs.c).into(),
            l: (&cs.l).into(),
            m: (&cs.m).into(),
            h: (&cs.h).into(),
            k: (&cs.k).into(),
            kappa_bounds: self.model.kappa,
            horizon: self.model.horizon,
        }
    }

    pub fn reversion(&self) -> Result<ReversionFunction> {
        reversion_from_registry(&self.model.reversion, &self.model.reversion_params)
    }

    pub fn observable(&self) -> Result<ObservableFunction> {
        observable_from_registry(&self.model.observable, &self.model.observable_params)
    }

    pub fn quadrature_spec(&self) -> crate::quad::QuadratureSpec {
        crate::quad::QuadratureSpec {
            rel_tol: self.numeric.rel_tol,
            abs_tol: self.numeric.abs_tol,
            max_subdivisions: 4000,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = &self.numeric;
        if n.epsilons.is_empty() || n.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config(format!(
                "epsilons must be a nonempty list of positive values, got {:?}",
                n.epsilons
            )));
        }
        if n.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!(
                "epsilons must be strictly decreasing, got {:?}",
                n.epsilons
            )));
        }
        if !(n.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", n.dt)));
        }
        if !(n.p >= 1.0) {
            return Err(Error::Config(format!("p must be >= 1, got {}", n.p)));
        }
        if !(n.delta > 0.0 && n.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0, 1), got {}",
                n.delta
            )));
        }
        if !(n.eta > 0.0) {
            return Err(Error::Config(format!("eta must be positive, got {}", n.eta)));
        }
        if !(n.rel_tol > 0.0 && n.abs_tol > 0.0) {
            return Err(Error::Config(format!(
                "tolerances must be positive, got rel {} abs {}",
                n.rel_tol, n.abs_tol
            )));
        }
        if !(self.model.horizon > 0.0) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.model.horizon
            )));
        }
        if let Some(kappa) = self.model.kappa {
            if !(kappa > 0.0 && kappa < 1.0) {
                return Err(Error::Config(format!(
                    "kappa must lie in (0, 1), got {kappa}"
                )));
            }
        }
        if let Some(cir) = &n.cir {
            let ratio = 2.0 * cir.nu * cir.theta / (cir.sigma * cir.sigma);
            if !(ratio < 1.0) {
                return Err(Error::Config(format!(
                    "CIR section must satisfy 2 nu theta / sigma^2 < 1, got {ratio}"
                )));
            }
        }
        // Registry names must resolve.
        self.reversion()?;
        self.observable()?;
        Ok(())
    }
}

/// Parse and validate a configuration document. Unknown keys are rejected
/// with the offending key named in the error.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(
            r#"
[model]
reversion = "odd_power"
reversion_params = { power = 3.0 }

[[experiment]]
kind = "limit_convergence"
"#,
        )
        .unwrap();
        assert_eq!(cfg.numeric.dt, 1e-4);
        assert_eq!(cfg.numeric.p, 2.0);
        assert_eq!(cfg.numeric.epsilons, vec![0.2, 0.1, 0.05]);
        assert_eq!(cfg.output.master_seed, 42);
        assert_eq!(cfg.model.observable, "square");
        assert!(cfg.reversion().is_ok());
    }

    #[test]
    fn unknown_key_is_named_in_the_error() {
        let err = parse_config(
            r#"
[model]
reversion = "odd_power"

[numeric]
epsilonn = [0.1]
"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("epsilonn"), "error should name the key: {msg}");
    }

    #[test]
    fn negative_dt_rejected() {
        let err = parse_config(
            r#"
[model]
reversion = "linear"

[numeric]
dt = -1e-4
"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("dt"));
    }

    #[test]
    fn bad_cir_section_rejected_before_any_simulation() {
        let err = parse_config(
            r#"
[model]
reversion = "linear"

[[experiment]]
kind = "cir_bound"

[numeric.cir]
nu = 1.0
theta = 1.0
sigma = 1.0
y0 = 1.0
"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("sigma"));
    }

    #[test]
    fn unknown_registry_name_rejected() {
        let err = parse_config(
            r#"
[model]
reversion = "does_not_exist"
"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("does_not_exist"));
    }

    #[test]
    fn empty_experiment_list_is_valid() {
        let cfg = parse_config(
            r#"
[model]
reversion = "linear"
"#,
        )
        .unwrap();
        assert!(cfg.experiment.is_empty());
    }
}
