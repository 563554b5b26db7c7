//! Elementary inequality checks: the incomplete-gamma tail bound
//! int_y^inf x^n e^{-gamma x} dx <= 3 n! gamma^{-1} y^n e^{-gamma y} on
//! y >= 1/gamma, and the three exponential comparisons used alongside it.

use serde::Serialize;

use crate::error::{Error, Result};

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|i| i as f64).product::<f64>().max(1.0)
}

/// Closed form of int_y^inf x^n e^{-gamma x} dx by repeated integration by
/// parts: e^{-gamma y} sum_{j=0}^{n} (n!/(n-j)!) y^{n-j} gamma^{-(j+1)}.
pub fn incomplete_gamma_tail(gamma: f64, n: u32, y: f64) -> f64 {
    let mut sum = 0.0;
    let mut coeff = 1.0; // n!/(n-j)!
    for j in 0..=n {
        sum += coeff * y.powi((n - j) as i32) * gamma.powi(-(j as i32 + 1));
        coeff *= (n - j) as f64;
    }
    (-gamma * y).exp() * sum
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaBoundCheck {
    pub gamma: f64,
    pub n: u32,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Check the tail bound at one (gamma, n, y); y below 1/gamma violates the
/// precondition.
pub fn incomplete_gamma_bound_check(gamma: f64, n: u32, y: f64) -> Result<GammaBoundCheck> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if y < 1.0 / gamma {
        return Err(Error::Domain(format!(
            "need y >= 1/gamma, got y = {y} < {}",
            1.0 / gamma
        )));
    }
    let lhs = incomplete_gamma_tail(gamma, n, y);
    let rhs = 3.0 * factorial(n) * gamma.recip() * y.powi(n as i32) * (-gamma * y).exp();
    Ok(GammaBoundCheck {
        gamma,
        n,
        y,
        lhs,
        rhs,
        ratio: lhs / rhs,
        pass: lhs <= rhs * (1.0 + 1e-12),
    })
}

/// Default probe grid: gamma in {0.5, 1, 2}, n in 0..=4, y in {1, 2, 10}/gamma.
pub fn incomplete_gamma_suite() -> Result<Vec<GammaBoundCheck>> {
    let mut rows = Vec::new();
    for gamma in [0.5, 1.0, 2.0] {
        for n in 0..=4u32 {
            for mult in [1.0, 2.0, 10.0] {
                rows.push(incomplete_gamma_bound_check(gamma, n, mult / gamma)?);
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpInequalityCase {
    /// e^{gamma x} / x >= e^{gamma x / 2} for x >= 8 / gamma^2.
    Quadratic,
    /// e^{gamma x} - e^{gamma y} >= e^{gamma x} / 2 for x >= y + ln 2 / gamma.
    Positive,
    /// e^{-gamma y} - e^{-gamma x} >= e^{-gamma y} / 2 for x >= y + ln 2 / gamma.
    Negative,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpInequalityRow {
    pub case: ExpInequalityCase,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// (lhs - rhs) / max(|lhs|, |rhs|, 1).
    pub relative_margin: f64,
    pub pass: bool,
}

/// Probe the three exponential inequalities on their stated domains: probes
/// start exactly at the domain boundary and step outward by fixed multiples.
/// A row passes when the relative margin is at least -1e-14.
pub fn exp_inequality_check(gamma: f64, y: f64) -> Result<Vec<ExpInequalityRow>> {
    if !(gamma > 0.0) || !(y >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need gamma > 0 and y >= 0, got gamma = {gamma}, y = {y}"
        )));
    }
    let multipliers = [1.0, 1.0 + 1e-9, 1.25, 2.0, 4.0, 8.0];
    let mut rows = Vec::new();
    let margin = |lhs: f64, rhs: f64| (lhs - rhs) / lhs.abs().max(rhs.abs()).max(1.0);
    for &mult in &multipliers {
        let x = (8.0 / (gamma * gamma)) * mult;
        let lhs = (gamma * x).exp() / x;
        let rhs = (gamma * x / 2.0).exp();
        let m = margin(lhs, rhs);
        rows.push(ExpInequalityRow {
            case: ExpInequalityCase::Quadratic,
            x,
            lhs,
            rhs,
            relative_margin: m,
            pass: m >= -1e-14,
        });
    }
    let x_min = y + 2f64.ln() / gamma;
    for &mult in &multipliers {
        let x = x_min * mult.max(1.0) + (mult - 1.0).max(0.0);
        let lhs = (gamma * x).exp() - (gamma * y).exp();
        let rhs = 0.5 * (gamma * x).exp();
        let m = margin(lhs, rhs);
        rows.push(ExpInequalityRow {
            case: ExpInequalityCase::Positive,
            x,
            lhs,
            rhs,
            relative_margin: m,
            pass: m >= -1e-14,
        });
        let lhs_n = (-gamma * y).exp() - (-gamma * x).exp();
        let rhs_n = 0.5 * (-gamma * y).exp();
        let mn = margin(lhs_n, rhs_n);
        rows.push(ExpInequalityRow {
            case: ExpInequalityCase::Negative,
            x,
            lhs: lhs_n,
            rhs: rhs_n,
            relative_margin: mn,
            pass: mn >= -1e-14,
        });
    }
    Ok(rows)
}

/// The default sweep used by the suite runner.
pub fn exp_inequality_suite() -> Result<Vec<ExpInequalityRow>> {
    let mut rows = Vec::new();
    for gamma in [0.5, 1.0, 2.0] {
        for y in [0.0, 0.5, 2.0] {
            rows.extend(exp_inequality_check(gamma, y)?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadratureSpec};

    #[test]
    fn tail_examples() {
        // n = 0, y = 1/gamma: lhs = e^{-1}/gamma, rhs = 3 e^{-1}/gamma.
        for gamma in [0.5, 1.0, 2.0] {
            let c = incomplete_gamma_bound_check(gamma, 0, 1.0 / gamma).unwrap();
            assert!((c.lhs - (-1.0f64).exp() / gamma).abs() < 1e-15);
            assert!((c.ratio - 1.0 / 3.0).abs() < 1e-12);
            assert!(c.pass);
        }
        // n = 1, gamma = 1, y = 1: lhs = 2/e, rhs = 3/e.
        let c = incomplete_gamma_bound_check(1.0, 1, 1.0).unwrap();
        assert!((c.lhs - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((c.rhs - 3.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(c.pass);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let spec = QuadratureSpec::default();
        for gamma in [0.5, 1.0, 2.0] {
            for n in 0..=4u32 {
                for mult in [1.0, 3.0] {
                    let y = mult / gamma;
                    let closed = incomplete_gamma_tail(gamma, n, y);
                    // Far tail is negligible beyond y + 60/gamma.
                    let upper = y + 60.0 / gamma;
                    let q = integrate(
                        |x| x.powi(n as i32) * (-gamma * x).exp(),
                        y,
                        upper,
                        &spec,
                    )
                    .unwrap();
                    assert!(
                        (closed - q.value).abs() < 1e-9 * closed.max(1e-30),
                        "gamma {gamma} n {n} y {y}: {closed} vs {}",
                        q.value
                    );
                }
            }
        }
    }

    #[test]
    fn precondition_enforced() {
        assert!(incomplete_gamma_bound_check(1.0, 0, 0.5).is_err());
    }

    #[test]
    fn full_suite_passes() {
        for row in incomplete_gamma_suite().unwrap() {
            assert!(row.pass, "{row:?}");
            assert!(row.ratio <= 1.0 + 1e-12);
        }
        for row in exp_inequality_suite().unwrap() {
            assert!(row.pass, "{row:?}");
        }
    }

    #[test]
    fn quadratic_case_at_boundary() {
        // gamma = 1, x = 8: e^8 / 8 vs e^4.
        let rows = exp_inequality_check(1.0, 0.0).unwrap();
        let row = rows
            .iter()
            .find(|r| r.case == ExpInequalityCase::Quadratic)
            .unwrap();
        assert!((row.lhs - 8f64.exp() / 8.0).abs() < 1e-9);
        assert!((row.rhs - 4f64.exp()).abs() < 1e-12);
        assert!(row.pass);
    }

    #[test]
    fn boundary_equalities_are_exact() {
        // At x = y + ln2/gamma both comparisons hold with equality.
        for (gamma, y) in [(1.0f64, 0.5f64), (2.0, 1.0), (0.5, 0.0)] {
            let x = y + 2f64.ln() / gamma;
            let lhs = (gamma * x).exp() - (gamma * y).exp();
            let rhs = 0.5 * (gamma * x).exp();
            assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs.abs());
            let lhs_n = (-gamma * y).exp() - (-gamma * x).exp();
            let rhs_n = 0.5 * (-gamma * y).exp();
            assert!((lhs_n - rhs_n).abs() <= 4.0 * f64::EPSILON * rhs_n.abs());
        }
    }
}
