//! One-sided brackets of the stationary average: the perturbed ratios
//! w^{delta,-} and w^{delta,+} sandwich w for observables nondecreasing on
//! the positive half line, and both converge to w as delta drops.
//!
//! Run with: cargo run -p meanrev --example bracket_sandwich

use meanrev::invariant::{limit_average, limit_average_bracket, BracketSide};
use meanrev::model::{ObservableFunction, ReversionFunction};
use meanrev::quad::QuadratureSpec;

fn main() {
    let spec = QuadratureSpec::default();
    let of = ObservableFunction::square();

    for rf in [
        ReversionFunction::linear(),
        ReversionFunction::odd_power(3.0).unwrap(),
    ] {
        let (k, l, m) = (1.0, 1.0, 1.0);
        let w = limit_average(&rf, &of, k, l, m, &spec).unwrap();
        println!("{}:  w = {w:.10}", rf.name);
        println!("  {:>8}  {:>14}  {:>14}  {:>12}", "delta", "lower", "upper", "gap");
        for delta in [0.2, 0.1, 0.05, 0.01, 0.001] {
            let lo =
                limit_average_bracket(&rf, &of, k, l, m, delta, BracketSide::Lower, &spec).unwrap();
            let up =
                limit_average_bracket(&rf, &of, k, l, m, delta, BracketSide::Upper, &spec).unwrap();
            assert!(lo <= w && w <= up, "sandwich must hold");
            println!(
                "  {delta:>8.3}  {lo:>14.10}  {up:>14.10}  {:>12.3e}",
                (up - lo)
            );
        }
        println!();
    }

    // The Gaussian case has closed-form brackets:
    // w^{delta,+} = (k + delta)^2 / (2 (l - delta)(m - delta)).
    let rf = ReversionFunction::linear();
    let delta = 0.1;
    let up = limit_average_bracket(&rf, &of, 1.0, 1.0, 1.0, delta, BracketSide::Upper, &spec)
        .unwrap();
    let exact = (1.0 + delta) * (1.0 + delta) / (2.0 * (1.0 - delta) * (1.0 - delta));
    println!("Gaussian upper bracket at delta = 0.1: {up:.12} (closed form {exact:.12})");
}
