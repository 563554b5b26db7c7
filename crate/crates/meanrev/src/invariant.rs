//! Closed-form limit quantities by quadrature of the invariant measure.
//!
//! The stationary average
//!
//! ```text
//! w(k, l, m) = int f((k/m) y) exp(-2 (l/m) G(y)) dy / int exp(-2 (l/m) G(y)) dy
//! ```
//!
//! its one-sided brackets `w^{delta,+-}`, the speed-measure densities of the
//! squared sandwich diffusions, and the cumulative limit curve
//! `int_0^t H_s w_s ds` are all computed here. Improper integrals are
//! truncated with an explicit certificate built from the linear lower bound
//! `G(x) >= C x` that superlinear growth provides beyond a probed anchor.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{CoefficientPaths, ObservableFunction, ReversionFunction};
use crate::quad::{ratio_on_shared_panels, QuadratureSpec};
use crate::report::fmt_g17;

/// Boltzmann-type weight exp(-2 (l/m) G(y)). Underflows gracefully to 0.
pub fn stationary_weight(rf: &ReversionFunction, l_over_m: f64, y: f64) -> Result<f64> {
    if !(l_over_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "l/m must be positive, got {l_over_m}"
        )));
    }
    let w = (-2.0 * l_over_m * rf.antiderivative(y)).exp();
    if w.is_nan() {
        return Err(Error::MalformedFunction {
            name: format!("stationary weight of {}", rf.name),
            at: y,
        });
    }
    Ok(w)
}

/// Truncation certificate: a point beyond which the integrand tail provably
/// contributes less than the absolute tolerance.
#[derive(Debug, Clone, Copy)]
pub struct TailCut {
    pub cut: f64,
    /// Anchor point of the linear lower bound G(x) >= slope * x for x >= anchor.
    pub anchor: f64,
    pub slope: f64,
}

/// Bound int_R^inf coeff * (x^deg + 1) * exp(-2 rho G(x)) dx < abs_tol.
///
/// Because g is nondecreasing, G is convex with G(0) = 0, so G(x)/x is
/// nondecreasing and G(x) >= (G(a)/a) x for every x >= a. The exponential tail
/// integral is then bounded through the incomplete-gamma estimate
/// int_y^inf x^n e^{-gamma x} dx <= 3 n! gamma^{-1} y^n e^{-gamma y} for
/// y >= 1/gamma.
pub fn tail_cut(
    rf: &ReversionFunction,
    rho: f64,
    deg: f64,
    coeff: f64,
    abs_tol: f64,
) -> Result<TailCut> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exponent ratio must be positive, got {rho}"
        )));
    }
    let n = deg.ceil().max(0.0) as i32;
    let n_fact: f64 = (1..=n).map(|i| i as f64).product::<f64>().max(1.0);
    let mut best: Option<TailCut> = None;
    let mut anchor = 1.0f64;
    while anchor <= 1024.0 {
        let ga = rf.antiderivative(anchor);
        if !ga.is_finite() {
            return Err(Error::MalformedFunction {
                name: format!("G of {}", rf.name),
                at: anchor,
            });
        }
        if ga > 0.0 {
            let slope = ga / anchor;
            let gamma = 2.0 * rho * slope;
            let mut cut = anchor.max(1.0 / gamma).max(1.0);
            let bound = |r: f64| {
                coeff * (3.0 * n_fact * gamma.powi(-1) * r.powi(n) + gamma.recip()) * (-gamma * r).exp()
            };
            let mut ok = true;
            while bound(cut) >= abs_tol {
                cut *= 1.25;
                if cut > 1e9 {
                    ok = false;
                    break;
                }
            }
            if ok {
                match best {
                    Some(b) if b.cut <= cut => {}
                    _ => best = Some(TailCut { cut, anchor, slope }),
                }
            }
        }
        anchor *= 2.0;
    }
    best.ok_or_else(|| {
        Error::DivergentIntegral(format!(
            "no truncation certificate for {} with exponent ratio {rho} and degree {deg}; \
             the integrand tail cannot be certified below {abs_tol}",
            rf.name
        ))
    })
}

fn bracket_scaled(breakpoints: &[f64], alpha: f64) -> Vec<f64> {
    if alpha == 0.0 {
        return Vec::new();
    }
    breakpoints.iter().map(|b| b / alpha.abs()).collect()
}

/// Core ratio int_0^R f(alpha y) e^{-2 rho G(y)} dy / int_0^R e^{-2 rho G(y)} dy.
fn stationary_ratio(
    rf: &ReversionFunction,
    of: &ObservableFunction,
    alpha: f64,
    rho: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let coeff = of.c_f * alpha.abs().powf(of.q_prime).max(1.0);
    let cut = tail_cut(rf, rho, of.q_prime, coeff, spec.abs_tol)?;
    let rf_num = rf.clone();
    let rf_den = rf.clone();
    let of_num = of.clone();
    let num = move |y: f64| of_num.f(alpha * y) * (-2.0 * rho * rf_num.antiderivative(y)).exp();
    let den = move |y: f64| (-2.0 * rho * rf_den.antiderivative(y)).exp();
    let breaks = bracket_scaled(&of.breakpoints, alpha);
    let r = ratio_on_shared_panels(num, den, 0.0, cut.cut, &breaks, spec)?;
    if !r.ratio.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "stationary ratio is not finite: {}",
            r.ratio
        )));
    }
    Ok(r.ratio)
}

/// Stationary average w(k, l, m) of f((k/m) y) under the invariant density
/// proportional to exp(-2 (l/m) G(y)). Both integrands are even, so the ratio
/// is computed on the positive half line (doubling cancels).
pub fn limit_average(
    rf: &ReversionFunction,
    of: &ObservableFunction,
    k: f64,
    l: f64,
    m: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(k >= 0.0) || !(l > 0.0) || !(m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need k >= 0, l > 0, m > 0; got k = {k}, l = {l}, m = {m}"
        )));
    }
    stationary_ratio(rf, of, k / m, l / m, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketSide {
    Upper,
    Lower,
}

/// One-sided bracket of the stationary average:
/// upper uses f((k+delta) x / (m-delta)) with exponent (l-delta)/(m-delta),
/// lower uses f(k(1-delta) x / (m+delta)) with exponent (l+delta)/(m+delta).
/// For f nondecreasing on the positive half line these sandwich w(k, l, m).
pub fn limit_average_bracket(
    rf: &ReversionFunction,
    of: &ObservableFunction,
    k: f64,
    l: f64,
    m: f64,
    delta: f64,
    side: BracketSide,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(k >= 0.0) || !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need k >= 0 and delta >= 0; got k = {k}, delta = {delta}"
        )));
    }
    let (alpha, rho) = match side {
        BracketSide::Upper => {
            if !(l - delta > 0.0) || !(m - delta > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "upper bracket needs l - delta > 0 and m - delta > 0; got l = {l}, m = {m}, delta = {delta}"
                )));
            }
            ((k + delta) / (m - delta), (l - delta) / (m - delta))
        }
        BracketSide::Lower => {
            if !(l + delta > 0.0) || !(m + delta > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "lower bracket needs l + delta > 0 and m + delta > 0; got l = {l}, m = {m}, delta = {delta}"
                )));
            }
            (k * (1.0 - delta) / (m + delta), (l + delta) / (m + delta))
        }
    };
    stationary_ratio(rf, of, alpha, rho, spec)
}

/// Speed-measure density of the squared sandwich diffusion:
/// nu(y) = 1/2 y^{-1/2} exp(-2 rho [G(mu sqrt(y)) - G(mu)]) on y >= 0, where
/// (rho, mu) = ((l - delta)/(m - delta), m - delta) for the upper side and
/// ((l + delta)/(m + delta), m + delta) for the lower side.
pub fn speed_density_pm(
    rf: &ReversionFunction,
    l: f64,
    m: f64,
    delta: f64,
    side: BracketSide,
    y: f64,
) -> Result<f64> {
    if y < 0.0 {
        return Err(Error::Domain(format!(
            "speed density is supported on y >= 0, got {y}"
        )));
    }
    let (rho, mu) = speed_params(l, m, delta, side)?;
    if y == 0.0 {
        return Ok(f64::INFINITY);
    }
    let expo = -2.0 * rho * (rf.antiderivative(mu * y.sqrt()) - rf.antiderivative(mu));
    Ok(0.5 * y.powf(-0.5) * expo.exp())
}

fn speed_params(l: f64, m: f64, delta: f64, side: BracketSide) -> Result<(f64, f64)> {
    let (ll, mm) = match side {
        BracketSide::Upper => (l - delta, m - delta),
        BracketSide::Lower => (l + delta, m + delta),
    };
    if !(ll > 0.0) || !(mm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "shifted parameters must stay positive: l' = {ll}, m' = {mm}"
        )));
    }
    Ok((ll / mm, mm))
}

/// Total mass of the speed measure. The y^{-1/2} singularity at the origin is
/// removed exactly by the substitution x = sqrt(y), leaving
/// e^{2 rho G(mu)} int_0^inf exp(-2 rho G(mu x)) dx.
pub fn speed_mass_pm(
    rf: &ReversionFunction,
    l: f64,
    m: f64,
    delta: f64,
    side: BracketSide,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (rho, mu) = speed_params(l, m, delta, side)?;
    let cut = tail_cut(rf, rho, 0.0, 1.0, spec.abs_tol)?;
    let rf_c = rf.clone();
    let integrand = move |x: f64| (-2.0 * rho * rf_c.antiderivative(mu * x)).exp();
    // Substituted variable z = mu x keeps the certificate in the G scale.
    let upper = cut.cut / mu;
    let r = crate::quad::integrate(integrand, 0.0, upper, spec)?;
    Ok((2.0 * rho * rf.antiderivative(mu)).exp() * r.value)
}

/// Pointwise stationary averages along a coefficient path plus the cumulative
/// trapezoidal integral of H_s w_s.
#[derive(Debug, Clone)]
pub struct LimitCurve {
    pub times: Vec<f64>,
    pub w_values: Vec<f64>,
    pub rhs_integral: Vec<f64>,
}

impl LimitCurve {
    /// CSV with columns t, w, rhs_integral at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,w,rhs_integral\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_g17(self.times[i]),
                fmt_g17(self.w_values[i]),
                fmt_g17(self.rhs_integral[i])
            ));
        }
        out
    }
}

/// Evaluate the limit curve along sampled coefficients. Stationary averages
/// are cached per (K, L, M) triple, which collapses the cost for constant or
/// stepwise coefficient models.
pub fn limit_curve(
    rf: &ReversionFunction,
    of: &ObservableFunction,
    paths: &CoefficientPaths,
    spec: &QuadratureSpec,
) -> Result<LimitCurve> {
    let nodes = paths.grid.nodes();
    let mut cache: HashMap<(u64, u64, u64), f64> = HashMap::new();
    let mut w_values = Vec::with_capacity(nodes.len());
    for i in 0..nodes.len() {
        let key = (
            paths.k[i].to_bits(),
            paths.l[i].to_bits(),
            paths.m[i].to_bits(),
        );
        let w = match cache.get(&key) {
            Some(&w) => w,
            None => {
                let w = limit_average(rf, of, paths.k[i], paths.l[i], paths.m[i], spec)?;
                cache.insert(key, w);
                w
            }
        };
        w_values.push(w);
    }
    let mut rhs_integral = Vec::with_capacity(nodes.len());
    rhs_integral.push(0.0);
    let mut acc = 0.0;
    for i in 0..nodes.len() - 1 {
        let dt = nodes[i + 1] - nodes[i];
        acc += 0.5 * dt * (paths.h[i] * w_values[i] + paths.h[i + 1] * w_values[i + 1]);
        rhs_integral.push(acc);
    }
    Ok(LimitCurve {
        times: nodes.to_vec(),
        w_values,
        rhs_integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::model::{sample_coefficients, CoefficientModel, ObservableFunction, ReversionFunction};
    use crate::rng::SeededNoiseSource;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn weight_basics() {
        let rf = ReversionFunction::linear(); // G = y^2 / 2
        assert_eq!(stationary_weight(&rf, 1.0, 0.0).unwrap(), 1.0);
        let e = stationary_weight(&rf, 1.0, 1.0).unwrap();
        assert!((e - (-1.0f64).exp()).abs() < 1e-15);
        for y in [0.3, 1.7, 4.2] {
            let a = stationary_weight(&rf, 0.7, y).unwrap();
            let b = stationary_weight(&rf, 0.7, -y).unwrap();
            assert_eq!(a, b);
        }
        // Graceful underflow far in the tail.
        assert_eq!(stationary_weight(&rf, 1.0, 1e9).unwrap(), 0.0);
    }

    #[test]
    fn constant_observable_is_exact() {
        let rf = ReversionFunction::odd_power(3.0).unwrap();
        let of = ObservableFunction::constant(1.0);
        let w = limit_average(&rf, &of, 0.7, 1.3, 2.1, &spec()).unwrap();
        assert_eq!(w, 1.0);
    }

    #[test]
    fn gaussian_second_moment() {
        // g(x) = x, G = x^2/2, f = x^2, k = l = m = 1: density ~ e^{-y^2},
        // second moment 1/2.
        let rf = ReversionFunction::linear();
        let of = ObservableFunction::square();
        let w = limit_average(&rf, &of, 1.0, 1.0, 1.0, &spec()).unwrap();
        assert!((w - 0.5).abs() < 1e-10, "got {w}");
    }

    #[test]
    fn gaussian_general_parameters() {
        // Density ~ e^{-(l/m) y^2}: E[(k/m)^2 Y^2] = k^2 / (2 l m).
        let rf = ReversionFunction::linear();
        let of = ObservableFunction::square();
        for (k, l, m) in [(1.0, 2.0, 0.5), (0.7, 1.1, 1.9), (2.0, 0.6, 1.3)] {
            let w = limit_average(&rf, &of, k, l, m, &spec()).unwrap();
            let expected = k * k / (2.0 * l * m);
            assert!(
                (w - expected).abs() < 1e-9 * expected.max(1.0),
                "k={k} l={l} m={m}: {w} vs {expected}"
            );
        }
    }

    #[test]
    fn upper_bracket_gaussian_closed_form() {
        // w^{delta,+} for g(x)=x, f=x^2: ((k+d)/(m-d))^2 * (m-d)/(2(l-d))
        //                              = (k+d)^2 / (2 (l-d)(m-d)).
        let rf = ReversionFunction::linear();
        let of = ObservableFunction::square();
        let d = 0.1;
        let w = limit_average_bracket(&rf, &of, 1.0, 1.0, 1.0, d, BracketSide::Upper, &spec())
            .unwrap();
        let expected = (1.0 + d) * (1.0 + d) / (2.0 * (1.0 - d) * (1.0 - d));
        assert!((w - expected).abs() < 1e-9, "{w} vs {expected}");
        let wl = limit_average_bracket(&rf, &of, 1.0, 1.0, 1.0, d, BracketSide::Lower, &spec())
            .unwrap();
        let expected_l = (1.0 - d) * (1.0 - d) / (2.0 * (1.0 + d) * (1.0 + d));
        assert!((wl - expected_l).abs() < 1e-9, "{wl} vs {expected_l}");
    }

    #[test]
    fn brackets_converge_to_limit_as_delta_vanishes() {
        let rf = ReversionFunction::odd_power(3.0).unwrap();
        let of = ObservableFunction::square();
        let w = limit_average(&rf, &of, 1.0, 1.0, 1.0, &spec()).unwrap();
        let mut prev_gap = f64::INFINITY;
        for delta in [0.1, 0.01, 0.001] {
            let up =
                limit_average_bracket(&rf, &of, 1.0, 1.0, 1.0, delta, BracketSide::Upper, &spec())
                    .unwrap();
            let lo =
                limit_average_bracket(&rf, &of, 1.0, 1.0, 1.0, delta, BracketSide::Lower, &spec())
                    .unwrap();
            assert!(lo <= w + 1e-12 && w <= up + 1e-12, "ordering at {delta}");
            let gap = (up - w).max(w - lo);
            assert!(gap < prev_gap, "gap should shrink, {gap} vs {prev_gap}");
            prev_gap = gap;
        }
        assert!(prev_gap < 5e-3);
    }

    #[test]
    fn constant_observable_brackets_are_one() {
        let rf = ReversionFunction::odd_power(3.0).unwrap();
        let of = ObservableFunction::constant(1.0);
        for side in [BracketSide::Upper, BracketSide::Lower] {
            let w =
                limit_average_bracket(&rf, &of, 1.0, 1.0, 1.0, 0.1, side, &spec()).unwrap();
            assert_eq!(w, 1.0);
        }
    }

    #[test]
    fn speed_density_is_half_at_one() {
        // G(mu * 1) - G(mu) = 0 regardless of rf.
        for rf in [
            ReversionFunction::linear(),
            ReversionFunction::odd_power(3.0).unwrap(),
        ] {
            for side in [BracketSide::Upper, BracketSide::Lower] {
                let v = speed_density_pm(&rf, 1.0, 1.0, 0.1, side, 1.0).unwrap();
                assert!((v - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn speed_density_domain_and_singularity() {
        let rf = ReversionFunction::linear();
        assert!(speed_density_pm(&rf, 1.0, 1.0, 0.0, BracketSide::Upper, -0.5).is_err());
        let near0 = speed_density_pm(&rf, 1.0, 1.0, 0.0, BracketSide::Upper, 1e-12).unwrap();
        assert!(near0 > 1e5);
        // Integrable at 0: mass over [0, 1] finite (compare against direct
        // quadrature of the substituted form).
        let mass = speed_mass_pm(&rf, 1.0, 1.0, 0.0, BracketSide::Upper, &spec()).unwrap();
        assert!(mass.is_finite() && mass > 0.0);
    }

    #[test]
    fn speed_mass_linear_case_closed_form() {
        // g(x) = x, l = m = 1, delta = 0: nu(y) = 1/2 y^{-1/2} e^{1 - y}; substituting
        // x = sqrt(y) gives mass = e * int_0^inf e^{-x^2} dx = e sqrt(pi) / 2.
        let rf = ReversionFunction::linear();
        let mass = speed_mass_pm(&rf, 1.0, 1.0, 0.0, BracketSide::Upper, &spec()).unwrap();
        let expected = std::f64::consts::E * std::f64::consts::PI.sqrt() / 2.0;
        assert!((mass - expected).abs() < 1e-9, "{mass} vs {expected}");
    }

    #[test]
    fn limit_curve_constant_model() {
        let rf = ReversionFunction::linear();
        let of = ObservableFunction::square();
        let cm = CoefficientModel::unit(1.0);
        let grid = TimeGrid::uniform(1.0, 100).unwrap();
        let streams = SeededNoiseSource::new(1).path(0);
        let paths = sample_coefficients(&cm, &grid, &streams).unwrap();
        let curve = limit_curve(&rf, &of, &paths, &spec()).unwrap();
        assert_eq!(curve.rhs_integral[0], 0.0);
        assert!((curve.rhs_integral.last().unwrap() - 0.5).abs() < 1e-9);
        // H == 0 makes the integral identically zero.
        let cm0 = CoefficientModel::constant(0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0);
        let paths0 = sample_coefficients(&cm0, &grid, &streams).unwrap();
        let curve0 = limit_curve(&rf, &of, &paths0, &spec()).unwrap();
        assert!(curve0.rhs_integral.iter().all(|&v| v == 0.0));
        // f == 1 gives rhs_integral(t) = t under the trapezoid rule.
        let of1 = ObservableFunction::constant(1.0);
        let curve1 = limit_curve(&rf, &of1, &paths, &spec()).unwrap();
        for (i, &t) in curve1.times.iter().enumerate() {
            assert!((curve1.rhs_integral[i] - t).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_has_headers_and_full_precision() {
        let curve = LimitCurve {
            times: vec![0.0, 0.5],
            w_values: vec![0.5, 0.5],
            rhs_integral: vec![0.0, 0.25],
        };
        let csv = curve.to_csv();
        assert!(csv.starts_with("t,w,rhs_integral\n"));
        assert!(csv.contains("2.5000000000000000e-1"));
    }

    #[test]
    fn divergent_numerator_is_detected() {
        // f growing like e^{x^2} cannot be certified against G = x^2/2 with
        // rho small: the tail-cut search must fail rather than return junk.
        let rf = ReversionFunction::linear();
        let f: crate::model::RealFn = std::sync::Arc::new(|x: f64| (x * x).exp());
        let of = ObservableFunction::new("explosive", f, 1.0, 200.0, 10.0).unwrap();
        let r = limit_average(&rf, &of, 1.0, 0.001, 1.0, &spec());
        assert!(r.is_err());
    }
}
