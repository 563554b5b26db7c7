//! Maximal-inequality constants for square-root processes and the Monte
//! Carlo check that the running-maximum moment respects the closed-form
//! bound C1 + C2 log(tau v 1)^n.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::grid::TimeGrid;
use crate::rng::SeededNoiseSource;
use crate::sde::{simulate_cir, CirParams};
use crate::stats::{bootstrap_mean_ci, mean};

/// The two closed-form constants of the square-root maximal inequality.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CirConstants {
    pub c1: f64,
    pub c2: f64,
    /// True when either constant overflowed to infinity.
    pub overflow: bool,
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|i| i as f64).product::<f64>().max(1.0)
}

/// Evaluate the constants
/// C1 = (1 + 8^n (y0^n + gamma^{-2n} + 4^n sigma^n))
///      * (2 + (2^n y0^{n-1} + (2 + 8^n gamma^{-2n}) / y0)
///             * (1 + (12 / y0) (n+1)! / gamma))
/// C2 = 4^n gamma^{-n}
///      * (2 + (2^n y0^{n-1} + (2 + 8^n gamma^{-2n}) / y0)
///             * (1 + (12 / y0) (n+1)! / gamma))
/// verbatim; overflow reports +inf with a flag rather than an error.
pub fn cir_constants(y0: f64, gamma: f64, sigma: f64, n: u32) -> CirConstants {
    let nf = n as f64;
    let eight_n = 8f64.powf(nf);
    let four_n = 4f64.powf(nf);
    let two_n = 2f64.powf(nf);
    let first = 1.0 + eight_n * (y0.powf(nf) + gamma.powf(-2.0 * nf) + four_n * sigma.powf(nf));
    let second = 2.0
        + (two_n * y0.powf(nf - 1.0) + (2.0 + eight_n * gamma.powf(-2.0 * nf)) / y0)
            * (1.0 + (12.0 / y0) * factorial(n + 1) / gamma);
    let c1 = first * second;
    let c2 = four_n * gamma.powf(-nf) * second;
    CirConstants {
        c1,
        c2,
        overflow: !c1.is_finite() || !c2.is_finite(),
    }
}

/// Result of one Monte Carlo maximal-bound check.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalBoundReport {
    pub nu: f64,
    pub theta: f64,
    pub sigma: f64,
    pub y0: f64,
    pub gamma: f64,
    pub n: u32,
    pub horizon: f64,
    pub n_paths: usize,
    pub c1: f64,
    pub c2: f64,
    pub mc_estimate: f64,
    pub ci_half_width: f64,
    pub bound: f64,
    pub slack_ratio: f64,
    pub pass: bool,
}

/// Estimate E[max_{t <= T} Y_t^n] for the CIR process and compare against
/// C1 + C2 log(T v 1)^n with a deterministic horizon playing the stopping
/// time. The bound is a proven upper estimate, so a failure here flags an
/// implementation bug rather than an unlucky draw.
pub fn cir_max_bound_check(
    params: &CirParams,
    n: u32,
    horizon: f64,
    dt: f64,
    n_paths: usize,
    master_seed: u64,
) -> Result<MaximalBoundReport> {
    let grid = TimeGrid::uniform_dt(horizon, dt)?;
    let source = SeededNoiseSource::new(master_seed);
    let maxima: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|path_idx| -> Result<f64> {
            let path = simulate_cir(params, &grid, &source.path(path_idx))?;
            let max_y = path.values.iter().copied().fold(0.0f64, f64::max);
            Ok(max_y.powi(n as i32))
        })
        .collect::<Result<Vec<_>>>()?;
    let estimate = mean(&maxima);
    let ci = bootstrap_mean_ci(&maxima, 1000, 0.95, &source.bootstrap(0));
    let consts = cir_constants(params.y0, params.gamma, params.sigma, n);
    let log_term = horizon.max(1.0).ln().powi(n as i32);
    let bound = consts.c1 + consts.c2 * log_term;
    let upper = estimate + if ci.usable { ci.half_width } else { 0.0 };
    Ok(MaximalBoundReport {
        nu: params.nu,
        theta: params.theta,
        sigma: params.sigma,
        y0: params.y0,
        gamma: params.gamma,
        n,
        horizon,
        n_paths,
        c1: consts.c1,
        c2: consts.c2,
        mc_estimate: estimate,
        ci_half_width: if ci.usable { ci.half_width } else { f64::NAN },
        bound,
        slack_ratio: bound / upper,
        pass: upper <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_instance_n0() {
        // n = 0, y0 = 1, gamma = sigma = 1:
        // first factor = 1 + (1 + 1 + 1) = 4,
        // second factor = 2 + (1 + 3)(1 + 12) = 2 + 52 = 54,
        // C1 = 216, C2 = 54.
        let c = cir_constants(1.0, 1.0, 1.0, 0);
        assert_eq!(c.c1, 216.0);
        assert_eq!(c.c2, 54.0);
        assert!(!c.overflow);
        assert!(c.c2 / c.c1 < 1.0);
    }

    #[test]
    fn constants_nondecreasing_in_n() {
        for (y0, gamma, sigma) in [(1.0, 1.0, 1.0), (0.5, 0.25, 2.0), (2.0, 0.8, 1.5)] {
            let mut prev = 0.0;
            for n in 0..7 {
                let c = cir_constants(y0, gamma, sigma, n);
                assert!(
                    c.c1 >= prev,
                    "C1 must be nondecreasing in n at ({y0}, {gamma}, {sigma}), n = {n}"
                );
                prev = c.c1;
            }
        }
    }

    #[test]
    fn overflow_is_flagged_not_fatal() {
        let c = cir_constants(1e300, 1e-300, 1.0, 10);
        assert!(c.overflow);
        assert!(c.c1.is_infinite());
    }

    #[test]
    fn n_zero_bound_always_holds() {
        // E[max Y^0] = 1 and both constants are comfortably above 1.
        let params = CirParams::new(1.0, 0.25, 2.0, 1.0).unwrap();
        let report = cir_max_bound_check(&params, 0, 1.0, 0.01, 32, 5).unwrap();
        assert_eq!(report.mc_estimate, 1.0);
        assert!(report.pass);
        // T = 1: the log term vanishes for n >= 1, bound reduces to C1.
        let report1 = cir_max_bound_check(&params, 1, 1.0, 0.01, 32, 5).unwrap();
        assert_eq!(report1.bound, report1.c1);
    }

    #[test]
    fn representative_bound_check_passes_with_slack() {
        let params = CirParams::new(1.0, 0.25, 2.0, 1.0).unwrap();
        let report = cir_max_bound_check(&params, 2, 100.0, 0.01, 200, 42).unwrap();
        assert!(report.pass, "estimate {} vs bound {}", report.mc_estimate, report.bound);
        assert!(report.slack_ratio > 10.0, "slack {}", report.slack_ratio);
    }

    /// Scale-speed transform of the n-th power of the square-root process:
    /// F(x) = (2/sigma^2) int_{y0}^{x^{1/n}} v^{-gt} e^{g v}
    ///                     int_{y0}^{v} y^{gt - 1} e^{-g y} dy dv
    /// with g the exponent and gt = g * theta < 1. Its growth envelopes are
    /// what produce the closed-form maximal-bound constants.
    fn scale_transform(y0: f64, gamma: f64, theta: f64, sigma: f64, n: u32, x: f64) -> f64 {
        use crate::quad::{integrate, QuadratureSpec};
        let spec = QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        };
        let gt = gamma * theta;
        let outer = integrate(
            |v: f64| {
                let inner = integrate(
                    |y: f64| y.powf(gt - 1.0) * (-gamma * y).exp(),
                    y0,
                    v,
                    &spec,
                )
                .map(|r| r.value)
                .unwrap_or(f64::NAN);
                v.powf(-gt) * (gamma * v).exp() * inner
            },
            y0,
            x.powf(1.0 / n as f64),
            &spec,
        )
        .unwrap();
        2.0 / (sigma * sigma) * outer.value
    }

    #[test]
    fn scale_transform_growth_envelopes() {
        // Upper envelope: F(x) <= (2 e^{-g y0} / (g^2 s^2 y0)) e^{g x^{1/n}}
        // everywhere; lower envelope:
        // F(x) >= (e^{-g y0} / (2 g^2 s^2)) x^{-1/n} e^{g x^{1/n}} beyond
        // x_bar = 2^n y0^n + 1 + 8^n g^{-2n}. Both need g theta < 1.
        for (y0, gamma, theta, sigma, n) in [
            (1.0f64, 0.5f64, 0.5f64, 2.0f64, 1u32),
            (1.0, 0.5, 0.5, 2.0, 2),
            (0.5, 1.0, 0.4, 1.5, 1),
        ] {
            assert!(gamma * theta < 1.0);
            let nf = n as f64;
            let x_bar = 2f64.powf(nf) * y0.powf(nf) + 1.0 + 8f64.powf(nf) * gamma.powf(-2.0 * nf);
            let upper_coeff = 2.0 * (-gamma * y0).exp() / (gamma * gamma * sigma * sigma * y0);
            let lower_coeff = (-gamma * y0).exp() / (2.0 * gamma * gamma * sigma * sigma);
            let mut prev = 0.0;
            for mult in [1.0, 1.5, 2.5, 4.0] {
                let x = x_bar * mult;
                let f = scale_transform(y0, gamma, theta, sigma, n, x);
                let root = x.powf(1.0 / nf);
                assert!(f > prev, "transform must increase");
                prev = f;
                let upper = upper_coeff * (gamma * root).exp();
                let lower = lower_coeff * root.recip() * (gamma * root).exp();
                assert!(
                    f <= upper * (1.0 + 1e-9),
                    "upper envelope broken at x = {x}: {f} > {upper} \
                     (y0 {y0}, gamma {gamma}, n {n})"
                );
                assert!(
                    f >= lower * (1.0 - 1e-9),
                    "lower envelope broken at x = {x}: {f} < {lower} \
                     (y0 {y0}, gamma {gamma}, n {n})"
                );
            }
        }
    }
}
