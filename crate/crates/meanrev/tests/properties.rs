//! Property tests for the structural invariants: evenness and scale behavior
//! of the stationary averages, truncation-certificate stability, the discrete
//! concatenation identity, and determinism of the simulators.

use proptest::prelude::*;

use meanrev::grid::TimeGrid;
use meanrev::invariant::{
    limit_average, limit_average_bracket, stationary_weight, tail_cut, BracketSide,
};
use meanrev::model::{
    sample_coefficients, CoefficientModel, ObservableFunction, ReversionFunction, ScalingConfig,
};
use meanrev::quad::{integrate, QuadratureSpec};
use meanrev::rng::SeededNoiseSource;
use meanrev::sde::{simulate_x, simulate_y_pm, SchemeSelector};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_is_even_and_bounded(power in 1.0f64..4.0, ratio in 0.1f64..5.0, y in -6.0f64..6.0) {
        let rf = ReversionFunction::odd_power(power).unwrap();
        let a = stationary_weight(&rf, ratio, y).unwrap();
        let b = stationary_weight(&rf, ratio, -y).unwrap();
        prop_assert_eq!(a, b);
        // Graceful underflow to exactly 0 is allowed far in the tails.
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn average_of_shifted_observable_shifts_by_the_constant(
        power in 1.0f64..3.5,
        k in 0.3f64..2.0,
        l in 0.3f64..2.0,
        m in 0.3f64..2.0,
        shift in -3.0f64..3.0,
    ) {
        let rf = ReversionFunction::odd_power(power).unwrap();
        let base = ObservableFunction::square();
        let shifted = {
            let f: meanrev::model::RealFn = std::sync::Arc::new(move |x: f64| x * x + shift);
            ObservableFunction::new("square_shifted", f, 1.0 + shift.abs(), 2.0, 10.0).unwrap()
        };
        let w = limit_average(&rf, &base, k, l, m, &spec()).unwrap();
        let ws = limit_average(&rf, &shifted, k, l, m, &spec()).unwrap();
        prop_assert!(((ws - shift) - w).abs() < 1e-8 * (1.0 + w.abs()),
            "shift invariance broke: {} vs {} + {}", ws, w, shift);
    }

    #[test]
    fn doubling_consistency(
        power in 1.0f64..3.5,
        k in 0.3f64..2.0,
        l in 0.3f64..2.0,
        m in 0.3f64..2.0,
    ) {
        // Half-line ratio equals the full-line ratio for even integrands.
        let rf = ReversionFunction::odd_power(power).unwrap();
        let of = ObservableFunction::square();
        let w = limit_average(&rf, &of, k, l, m, &spec()).unwrap();
        let rho = l / m;
        let alpha = k / m;
        let cut = tail_cut(&rf, rho, 2.0, alpha * alpha, 1e-12).unwrap().cut;
        let rf2 = rf.clone();
        let num = integrate(
            move |y: f64| (alpha * y) * (alpha * y) * (-2.0 * rho * rf.antiderivative(y)).exp(),
            -cut,
            cut,
            &spec(),
        )
        .unwrap();
        let den = integrate(
            move |y: f64| (-2.0 * rho * rf2.antiderivative(y)).exp(),
            -cut,
            cut,
            &spec(),
        )
        .unwrap();
        let direct = num.value / den.value;
        prop_assert!((direct - w).abs() <= 1e-9 * (1.0 + w.abs()),
            "full-line {} vs doubled half-line {}", direct, w);
    }

    #[test]
    fn truncation_certificate_is_stable(
        power in 1.0f64..3.5,
        rho in 0.3f64..2.0,
    ) {
        // Growing the certified cut by 50% moves the integral by less than
        // 10 * rel_tol relative.
        let rf = ReversionFunction::odd_power(power).unwrap();
        let cut = tail_cut(&rf, rho, 2.0, 1.0, 1e-12).unwrap().cut;
        let rf1 = rf.clone();
        let rf2 = rf.clone();
        let a = integrate(move |y: f64| y * y * (-2.0 * rho * rf1.antiderivative(y)).exp(), 0.0, cut, &spec()).unwrap();
        let b = integrate(move |y: f64| y * y * (-2.0 * rho * rf2.antiderivative(y)).exp(), 0.0, 1.5 * cut, &spec()).unwrap();
        prop_assert!((a.value - b.value).abs() <= 10.0 * 1e-10 * b.value.abs().max(1e-300),
            "cut {} -> {}: {} vs {}", cut, 1.5 * cut, a.value, b.value);
    }

    #[test]
    fn bracket_monotone_in_delta(
        power in prop::sample::select(vec![1.0f64, 2.0, 3.0]),
        k in 0.5f64..1.5,
        l in 0.6f64..1.5,
        m in 0.6f64..1.5,
    ) {
        // As delta decreases the upper bracket shrinks and the lower grows,
        // for an observable nondecreasing on the positive half line.
        let rf = ReversionFunction::odd_power(power).unwrap();
        let of = ObservableFunction::square();
        let deltas = [0.2, 0.1, 0.05];
        let mut prev_up = f64::INFINITY;
        let mut prev_lo = f64::NEG_INFINITY;
        for &d in &deltas {
            let up = limit_average_bracket(&rf, &of, k, l, m, d, BracketSide::Upper, &spec()).unwrap();
            let lo = limit_average_bracket(&rf, &of, k, l, m, d, BracketSide::Lower, &spec()).unwrap();
            prop_assert!(up <= prev_up + 1e-10, "upper bracket must shrink as delta drops");
            prop_assert!(lo >= prev_lo - 1e-10, "lower bracket must grow as delta drops");
            prev_up = up;
            prev_lo = lo;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulations_are_pure_functions_of_the_seed(
        seed in any::<u64>(),
        path_idx in 0u64..64,
        power in prop::sample::select(vec![1.0f64, 3.0]),
    ) {
        let rf = ReversionFunction::odd_power(power).unwrap();
        let grid = TimeGrid::uniform(1.0, 200).unwrap();
        let streams = SeededNoiseSource::new(seed).path(path_idx);
        let a = simulate_y_pm(&rf, 1.0, 1.0, 1.0, 0.1, BracketSide::Upper, &grid, &streams).unwrap();
        let b = simulate_y_pm(&rf, 1.0, 1.0, 1.0, 0.1, BracketSide::Upper, &grid, &streams).unwrap();
        prop_assert_eq!(&a.values, &b.values);
        prop_assert!(a.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn x_path_independent_of_other_paths(
        seed in any::<u64>(),
        eps in 0.05f64..0.5,
    ) {
        // The same path index gives the same trajectory regardless of which
        // other paths were simulated (counter-based streams do not share
        // state).
        let rf = ReversionFunction::linear();
        let cm = CoefficientModel::unit(0.5);
        let scaling = ScalingConfig::new(eps, 1.0, 2.0, 1.0).unwrap();
        let grid = TimeGrid::uniform(0.5, 100).unwrap();
        let scheme = SchemeSelector::drift_implicit();
        let source = SeededNoiseSource::new(seed);
        let direct = simulate_x(&cm, &rf, &scaling, &grid, &scheme, &source.path(7)).unwrap();
        for other in [0u64, 3, 11] {
            let _ = simulate_x(&cm, &rf, &scaling, &grid, &scheme, &source.path(other)).unwrap();
        }
        let again = simulate_x(&cm, &rf, &scaling, &grid, &scheme, &source.path(7)).unwrap();
        prop_assert_eq!(&direct.values, &again.values);
    }

    #[test]
    fn coefficient_sampling_is_pure(seed in any::<u64>()) {
        let mut cm = CoefficientModel::unit(1.0);
        cm.l = meanrev::model::ChannelSpec::ClippedOu {
            start: 1.0, mean: 1.0, rate: 2.0, vol: 0.3, floor: 0.4, ceil: 2.5,
        };
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        let streams = SeededNoiseSource::new(seed).path(0);
        let a = sample_coefficients(&cm, &grid, &streams).unwrap();
        let b = sample_coefficients(&cm, &grid, &streams).unwrap();
        prop_assert_eq!(a.l, b.l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn concatenation_identity_holds_for_random_paths(
        seed in any::<u64>(),
        k_steps in 2usize..20,
        m_factor in 0.3f64..0.9,
    ) {
        use meanrev::experiments::concatenation_identity_check;
        let rf = ReversionFunction::linear();
        let cm = CoefficientModel::unit(1.0);
        let eps = 0.1;
        let scaling = ScalingConfig::new(eps, 1.0, 2.0, 1.0).unwrap();
        let n = 400usize;
        let dt = 1.0 / n as f64;
        let grid = TimeGrid::uniform(1.0, n).unwrap();
        let streams = SeededNoiseSource::new(seed).path(0);
        let coeffs = sample_coefficients(&cm, &grid, &streams).unwrap();
        let path = simulate_x(&cm, &rf, &scaling, &grid, &SchemeSelector::drift_implicit(), &streams).unwrap();
        let of = ObservableFunction::square();
        let window = k_steps as f64 * dt;
        let t = ((m_factor * n as f64) as usize).max(k_steps) as f64 * dt;
        let dev = concatenation_identity_check(&path, &coeffs.h, &coeffs.k, &of, window, t).unwrap();
        prop_assert!(dev < 1e-10, "deviation {} for window {} t {}", dev, window, t);
    }
}
