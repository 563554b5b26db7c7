//! Noise-coupled comparisons: (a) the squared Bessel process dominates the
//! squared mean-reverting process when both square-root diffusions ride the
//! same sign-flipped increments, and (b) a drift-implicit coupled pair with
//! ordered drifts never crosses.
//!
//! Run with: cargo run -p meanrev --example comparison_coupling

use meanrev::grid::TimeGrid;
use meanrev::model::{CoefficientModel, ReversionFunction, ScalingConfig};
use meanrev::rng::SeededNoiseSource;
use meanrev::sde::{coupled_pair, integrate_path, simulate_x_timechanged, StateOutput};

fn main() {
    // (a) Squared-Bessel domination for the truncated cubic system.
    let rf = ReversionFunction::odd_power(3.0).unwrap();
    let trunc = rf.truncated(5.0).unwrap();
    let cm = CoefficientModel::unit(1.0);
    let scaling = ScalingConfig::new(0.1, 1.0, 2.0, 1.0).unwrap();
    let xi_grid = TimeGrid::uniform(10.0, 100_000).unwrap();
    let source = SeededNoiseSource::new(3);
    let mut dominated = 0u64;
    let mut total = 0u64;
    for p in 0..20u64 {
        let xt = simulate_x_timechanged(&cm, &trunc, &scaling, &xi_grid, &source.path(p)).unwrap();
        let db: Vec<f64> = xt
            .values
            .iter()
            .zip(&xt.noise_increments)
            .map(|(&x, &dw)| if x >= 0.0 { dw } else { -dw })
            .collect();
        let squared = integrate_path(
            &xi_grid,
            1.0,
            |_t, z: f64| {
                let s = z.max(0.0).sqrt();
                1.0 - 2.0 * s * trunc.g(s)
            },
            |_t, z: f64| 2.0 * z.max(0.0).sqrt(),
            StateOutput::PositivePart,
            &db,
        )
        .unwrap();
        let bessel = integrate_path(
            &xi_grid,
            1.0,
            |_t, _y| 1.0,
            |_t, y: f64| 2.0 * y.max(0.0).sqrt(),
            StateOutput::PositivePart,
            &db,
        )
        .unwrap();
        for (y, z) in bessel.iter().zip(&squared) {
            total += 1;
            if *y >= z - 1e-12 {
                dominated += 1;
            }
        }
    }
    println!(
        "squared Bessel >= squared mean-reverting process at {:.4} of {total} steps",
        dominated as f64 / total as f64
    );

    // (b) Coupled pair with ordered drifts: zero crossings of the ordering.
    let grid = TimeGrid::uniform(10.0, 100_000).unwrap();
    let noise = source.aux(0);
    let (low, high) = coupled_pair(
        |_t, y| 3.0 - 2.0 * y,
        |_t, y| 4.0 - 2.0 * y,
        &noise,
        |_t, y: f64| 2.0 * y.max(0.0).sqrt(),
        &grid,
        1.0,
        1.0,
    )
    .unwrap();
    let violations = low
        .values
        .iter()
        .zip(&high.values)
        .filter(|(l, h)| l > h)
        .count();
    println!(
        "coupled pair (drift offset +1, shared noise): ordering violations {violations} / {} steps",
        grid.steps()
    );
    println!(
        "terminal states: low {:.4}, high {:.4} (stationary means 1.5 and 2.0)",
        low.terminal(),
        high.terminal()
    );

    // Equal starts are allowed; misordered drifts or starts are rejected.
    let err = coupled_pair(
        |_t, y| 2.0 - y,
        |_t, y| 1.0 - y,
        &noise,
        |_t, y: f64| 2.0 * y.max(0.0).sqrt(),
        &grid,
        0.5,
        0.5,
    )
    .unwrap_err();
    println!("misordered drifts rejected: {err}");
}
