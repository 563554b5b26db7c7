//! Ergodic averages of the squared sandwich diffusions: the long-horizon time
//! average of f((k + delta) sqrt(Y+)) converges to the stationary bracket
//! average computed by quadrature of the speed measure.
//!
//! Run with: cargo run -p meanrev --example ergodic_average

use meanrev::experiments::ergodic_time_average;
use meanrev::invariant::BracketSide;
use meanrev::model::{ObservableFunction, ReversionFunction};
use meanrev::quad::QuadratureSpec;

fn main() {
    let spec = QuadratureSpec::default();
    let of = ObservableFunction::square();

    for (name, rf) in [
        ("linear", ReversionFunction::linear()),
        ("cubic", ReversionFunction::odd_power(3.0).unwrap()),
    ] {
        println!("{name} reversion, k = l = m = 1, delta = 0.05, upper side:");
        println!(
            "  {:>10}  {:>14}  {:>14}  {:>10}",
            "horizon", "time average", "target", "rel dev"
        );
        for horizon in [1e2, 1e3, 1e4] {
            let e = ergodic_time_average(
                &rf,
                &of,
                1.0,
                1.0,
                1.0,
                0.05,
                BracketSide::Upper,
                horizon,
                1e-3,
                5,
                &spec,
            )
            .unwrap();
            println!(
                "  {horizon:>10.0}  {:>14.6}  {:>14.6}  {:>10.4}",
                e.time_average,
                e.quadrature_target,
                (e.time_average - e.quadrature_target).abs() / e.quadrature_target
            );
        }
        println!();
    }

    // Both bracket sides, and a constant observable as the exact case.
    let rf = ReversionFunction::linear();
    let lower = ergodic_time_average(
        &rf, &of, 1.0, 1.0, 1.0, 0.05, BracketSide::Lower, 1e4, 1e-3, 5, &spec,
    )
    .unwrap();
    println!(
        "lower side: time average {:.6} vs target {:.6}",
        lower.time_average, lower.quadrature_target
    );
    let of1 = ObservableFunction::constant(1.0);
    let unit = ergodic_time_average(
        &rf, &of1, 1.0, 1.0, 1.0, 0.05, BracketSide::Upper, 1e2, 1e-3, 5, &spec,
    )
    .unwrap();
    println!(
        "constant observable: time average {} = target {} exactly",
        unit.time_average, unit.quadrature_target
    );
}
