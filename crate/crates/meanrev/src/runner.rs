//! Config-driven orchestration: validate the model, run each requested
//! experiment, emit CSV/JSON reports with digests, and summarize everything
//! in a manifest.

use std::time::Instant;

use serde::Serialize;

use crate::config::{ExperimentKind, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    cir_max_bound_check, concatenation_identity_check, ergodic_time_average, exp_inequality_suite,
    incomplete_gamma_suite, local_window_study, moment_growth_check, sp_error_study, GridPolicy,
};
use crate::grid::TimeGrid;
use crate::invariant::{limit_curve, BracketSide};
use crate::model::{sample_coefficients, validate_model, ScalingConfig};
use crate::report::{fmt_g17, EmittedFile, OutputSink};
use crate::rng::SeededNoiseSource;
use crate::sde::{simulate_x, CirParams, SchemeSelector};

/// Summary of one run: the resolved configuration, per-stage timings, every
/// emitted file with its digest, and the overall verdict.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub crate_version: String,
    pub master_seed: u64,
    pub config: RunConfig,
    pub stages: Vec<StageTiming>,
    pub files: Vec<EmittedFile>,
    pub all_passed: bool,
}

#[derive(Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Exit-status mapping: 0 all checks passed, 2 a check failed, 1 config or
/// runtime error (returned as Err).
pub fn exit_code(outcome: &Result<RunManifest>) -> i32 {
    match outcome {
        Ok(manifest) if manifest.all_passed => 0,
        Ok(_) => 2,
        Err(_) => 1,
    }
}

/// Execute every experiment in the config, writing reports under the output
/// directory. Rerunning with the same master seed produces byte-identical
/// report files (the manifest carries wall-clock timings and is excluded
/// from that guarantee).
pub fn run(config: &RunConfig) -> Result<RunManifest> {
    let rf = config.reversion()?;
    let of = config.observable()?;
    let cm = config.coefficient_model();
    let validation = validate_model(&rf, &of, &cm)?;
    if !validation.passed() {
        let failed: Vec<String> = validation
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} (margin {:.3e} at {:.3e})", c.name, c.worst_margin, c.worst_location))
            .collect();
        return Err(Error::Config(format!(
            "model validation failed: {}",
            failed.join("; ")
        )));
    }
    for warning in &validation.warnings {
        eprintln!("warning: {warning}");
    }

    let mut sink = OutputSink::new(&config.output.directory)?;
    let spec = config.quadrature_spec();
    let seed = config.output.master_seed;
    let mut stages = Vec::new();
    let mut all_passed = true;

    for (index, experiment) in config.experiment.iter().enumerate() {
        let started = Instant::now();
        let prefix = format!("{:02}_{}", index, experiment.kind.name());
        let passed = run_experiment(experiment.kind, config, &cm, &rf, &of, &spec, seed, &mut sink, &prefix)
            .map_err(|e| Error::Config(format!("stage {prefix}: {e}")))?;
        all_passed &= passed;
        stages.push(StageTiming {
            stage: prefix,
            seconds: started.elapsed().as_secs_f64(),
        });
    }

    let manifest = RunManifest {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: seed,
        config: config.clone(),
        stages,
        files: sink.files.clone(),
        all_passed,
    };
    let body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization failed: {e}")))?;
    std::fs::write(sink.directory.join("manifest.json"), body)?;
    Ok(manifest)
}

fn run_experiment(
    kind: ExperimentKind,
    config: &RunConfig,
    cm: &crate::model::CoefficientModel,
    rf: &crate::model::ReversionFunction,
    of: &crate::model::ObservableFunction,
    spec: &crate::quad::QuadratureSpec,
    seed: u64,
    sink: &mut OutputSink,
    prefix: &str,
) -> Result<bool> {
    let passed = match kind {
            ExperimentKind::LimitConvergence => {
                let report = sp_error_study(
                    cm,
                    rf,
                    of,
                    &config.numeric.epsilons,
                    config.numeric.z0,
                    config.numeric.p,
                    GridPolicy::UniformDt {
                        dt: config.numeric.dt,
                    },
                    config.numeric.n_paths,
                    seed,
                    spec,
                )?;
                let mut csv =
                    String::from("epsilon,n_paths,mean_sup_error,sp_norm,ci_lo,ci_hi\n");
                for row in &report.rows {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        fmt_g17(row.epsilon),
                        row.n_paths,
                        fmt_g17(row.mean_sup_error),
                        fmt_g17(row.sp_norm),
                        fmt_g17(row.ci_lo),
                        fmt_g17(row.ci_hi),
                    ));
                }
                sink.write(&format!("{prefix}.csv"), &csv)?;
                sink.write_json(
                    &format!("{prefix}.json"),
                    &WithConfig {
                        master_seed: seed,
                        config,
                        result: &report,
                    },
                )?;
                // Degenerate exact cases (f constant) have every error at 0.
                let all_negligible = report.rows.iter().all(|r| r.mean_sup_error <= 1e-14);
                report.monotone_decreasing || all_negligible
            }
            ExperimentKind::LocalWindow => {
                let eps = *config
                    .numeric
                    .epsilons
                    .last()
                    .expect("validated: nonempty");
                let study = local_window_study(
                    cm,
                    rf,
                    of,
                    eps,
                    config.numeric.z0,
                    config.numeric.window_t,
                    config.numeric.dt,
                    config.numeric.n_paths,
                    seed,
                )?;
                // Reference value: the stationary average at the window start.
                let grid = TimeGrid::uniform_dt(cm.horizon, config.numeric.dt)?;
                let coeffs = sample_coefficients(cm, &grid, &SeededNoiseSource::new(seed).path(0))?;
                let curve = limit_curve(rf, of, &coeffs, spec)?;
                let node = (config.numeric.window_t / config.numeric.dt).round() as usize;
                let target = coeffs.h[node] * curve.w_values[node];
                let pass = (study.sample_mean - target).abs()
                    <= 0.1 * target.abs().max(1e-12) + 4.0 * study.standard_error;
                sink.write_json(
                    &format!("{prefix}.json"),
                    &WithConfig {
                        master_seed: seed,
                        config,
                        result: &LocalWindowOutput {
                            target,
                            pass,
                            sample_mean: study.sample_mean,
                            standard_error: study.standard_error,
                            t: study.t,
                            epsilon: study.epsilon,
                            n_paths: study.n_paths,
                        },
                    },
                )?;
                pass
            }
            ExperimentKind::Ergodic => {
                let e = ergodic_time_average(
                    rf,
                    of,
                    1.0,
                    1.0,
                    1.0,
                    config.numeric.delta,
                    BracketSide::Upper,
                    config.numeric.ergodic_horizon,
                    config.numeric.dt.max(1e-3),
                    seed,
                    spec,
                )?;
                let pass = (e.time_average - e.quadrature_target).abs()
                    <= 0.05 * e.quadrature_target.abs().max(1e-12);
                sink.write_json(
                    &format!("{prefix}.json"),
                    &WithConfig {
                        master_seed: seed,
                        config,
                        result: &ErgodicOutput {
                            time_average: e.time_average,
                            quadrature_target: e.quadrature_target,
                            horizon: e.horizon,
                            pass,
                        },
                    },
                )?;
                pass
            }
            ExperimentKind::CirBound => {
                let cir = config.numeric.cir.as_ref().ok_or_else(|| {
                    Error::Config("cir_bound experiment needs a [numeric.cir] section".to_string())
                })?;
                let params = CirParams::new(cir.nu, cir.theta, cir.sigma, cir.y0)
                    .map_err(|e| Error::Config(e.to_string()))?;
                let report = cir_max_bound_check(
                    &params,
                    config.numeric.moment_n,
                    cir.horizon,
                    config.numeric.dt.max(1e-3),
                    config.numeric.n_paths,
                    seed,
                )?;
                let pass = report.pass;
                sink.write_json(
                    &format!("{prefix}.json"),
                    &WithConfig {
                        master_seed: seed,
                        config,
                        result: &report,
                    },
                )?;
                pass
            }
            ExperimentKind::MomentGrowth => {
                let report = moment_growth_check(
                    cm,
                    rf,
                    config.numeric.moment_n,
                    &config.numeric.epsilons,
                    config.numeric.z0,
                    GridPolicy::FastScale { factor: 0.02 },
                    config.numeric.n_paths,
                    seed,
                )?;
                let pass = report.envelope_satisfied;
                let mut csv = String::from("epsilon,sup_moment,running_max_moment,envelope\n");
                for row in &report.rows {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        fmt_g17(row.epsilon),
                        fmt_g17(row.sup_moment),
                        fmt_g17(row.running_max_moment),
                        fmt_g17(row.envelope),
                    ));
                }
                sink.write(&format!("{prefix}.csv"), &csv)?;
                sink.write_json(
                    &format!("{prefix}.json"),
                    &WithConfig {
                        master_seed: seed,
                        config,
                        result: &report,
                    },
                )?;
                pass
            }
            ExperimentKind::InequalitySuite => {
                let gamma_rows = incomplete_gamma_suite()?;
                let exp_rows = exp_inequality_suite()?;
                let pass = gamma_rows.iter().all(|r| r.pass) && exp_rows.iter().all(|r| r.pass);
                sink.write_json(
                    &format!("{prefix}.json"),
                    &WithConfig {
                        master_seed: seed,
                        config,
                        result: &InequalityOutput {
                            incomplete_gamma: gamma_rows,
                            exponential: exp_rows,
                            pass,
                        },
                    },
                )?;
                pass
            }
            ExperimentKind::IdentitySuite => {
                let eps = *config.numeric.epsilons.last().expect("nonempty");
                let scaling = ScalingConfig::new(eps, config.numeric.z0, config.numeric.p, 1.0)?;
                let grid = TimeGrid::uniform_dt(cm.horizon, config.numeric.dt)?;
                let streams = SeededNoiseSource::new(seed).path(0);
                let coeffs = sample_coefficients(cm, &grid, &streams)?;
                let path = simulate_x(
                    cm,
                    rf,
                    &scaling,
                    &grid,
                    &SchemeSelector::drift_implicit(),
                    &streams,
                )?;
                let window = 10.0 * config.numeric.dt;
                let t = (cm.horizon / 2.0 / config.numeric.dt).round() * config.numeric.dt;
                let deviation = concatenation_identity_check(
                    &path, &coeffs.h, &coeffs.k, of, window, t,
                )?;
                let pass = deviation < 1e-10;
                sink.write_json(
                    &format!("{prefix}.json"),
                    &WithConfig {
                        master_seed: seed,
                        config,
                        result: &IdentityOutput {
                            window,
                            t,
                            deviation,
                            pass,
                        },
                    },
                )?;
                pass
            }
        };
    Ok(passed)
}

#[derive(Serialize)]
struct WithConfig<'a, T: Serialize> {
    master_seed: u64,
    config: &'a RunConfig,
    result: &'a T,
}

#[derive(Serialize)]
struct LocalWindowOutput {
    t: f64,
    epsilon: f64,
    n_paths: usize,
    sample_mean: f64,
    standard_error: f64,
    target: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ErgodicOutput {
    time_average: f64,
    quadrature_target: f64,
    horizon: f64,
    pass: bool,
}

#[derive(Serialize)]
struct InequalityOutput {
    incomplete_gamma: Vec<crate::experiments::GammaBoundCheck>,
    exponential: Vec<crate::experiments::ExpInequalityRow>,
    pass: bool,
}

#[derive(Serialize)]
struct IdentityOutput {
    window: f64,
    t: f64,
    deviation: f64,
    pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn temp_dir(tag: &str) -> String {
        let dir = std::env::temp_dir().join(format!("meanrev-runner-{tag}-{}", std::process::id()));
        dir.to_string_lossy().into_owned()
    }

    #[test]
    fn empty_experiment_list_emits_empty_manifest() {
        let dir = temp_dir("empty");
        let cfg = parse_config(&format!(
            r#"
[model]
reversion = "linear"

[output]
directory = "{dir}"
"#
        ))
        .unwrap();
        let manifest = run(&cfg).unwrap();
        assert!(manifest.files.is_empty());
        assert!(manifest.all_passed);
        assert_eq!(exit_code(&Ok(manifest)), 0);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn constant_observable_convergence_run_exits_zero() {
        let dir = temp_dir("const");
        let cfg = parse_config(&format!(
            r#"
[model]
reversion = "linear"
observable = "constant"
observable_params = {{ value = 1.0 }}

[[experiment]]
kind = "limit_convergence"

[numeric]
epsilons = [0.2, 0.1]
dt = 1e-3
n_paths = 8

[output]
directory = "{dir}"
"#
        ))
        .unwrap();
        let manifest = run(&cfg).unwrap();
        assert!(manifest.all_passed, "exact case must exit 0");
        assert_eq!(manifest.files.len(), 2);
        let csv = std::fs::read_to_string(
            std::path::Path::new(&dir).join("00_limit_convergence.csv"),
        )
        .unwrap();
        for line in csv.lines().skip(1) {
            let error_col = line.split(',').nth(2).unwrap();
            assert_eq!(error_col.parse::<f64>().unwrap(), 0.0);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn inequality_suite_passes_and_reruns_are_byte_identical() {
        let dir = temp_dir("ineq");
        let cfg = parse_config(&format!(
            r#"
[model]
reversion = "linear"

[[experiment]]
kind = "inequality_suite"

[output]
directory = "{dir}"
master_seed = 7
"#
        ))
        .unwrap();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert!(a.all_passed && b.all_passed);
        assert_eq!(a.files.len(), b.files.len());
        for (fa, fb) in a.files.iter().zip(&b.files) {
            assert_eq!(fa.sha256, fb.sha256, "digest mismatch for {}", fa.path);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn downstream_errors_carry_stage_context() {
        let dir = temp_dir("stagectx");
        let cfg = parse_config(&format!(
            r#"
[model]
reversion = "linear"

[[experiment]]
kind = "cir_bound"

[output]
directory = "{dir}"
"#
        ))
        .unwrap();
        let err = run(&cfg).unwrap_err();
        assert!(
            err.to_string().contains("stage 00_cir_bound"),
            "error should name the failing stage: {err}"
        );
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn invalid_model_is_a_config_error() {
        let dir = temp_dir("invalid");
        let cfg = parse_config(&format!(
            r#"
[model]
reversion = "linear"

[model.coefficients]
c = {{ kind = "constant", value = -1.0 }}

[output]
directory = "{dir}"
"#
        ))
        .unwrap();
        let out = run(&cfg);
        assert!(matches!(out, Err(Error::Config(_))));
        assert_eq!(exit_code(&out), 1);
        std::fs::remove_dir_all(&dir).ok();
    }
}
