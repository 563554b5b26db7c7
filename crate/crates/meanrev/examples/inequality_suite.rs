//! Elementary inequality suites: the incomplete-gamma tail bound
//! int_y^inf x^n e^{-gamma x} dx <= 3 n! gamma^{-1} y^n e^{-gamma y} for
//! y >= 1/gamma, and the three exponential comparisons with their boundary
//! equality cases.
//!
//! Run with: cargo run -p meanrev --example inequality_suite

use meanrev::experiments::{
    exp_inequality_check, incomplete_gamma_bound_check, incomplete_gamma_suite,
};

fn main() {
    println!("incomplete-gamma tail bound, selected rows:");
    println!(
        "  {:>6} {:>3} {:>8}  {:>14}  {:>14}  {:>8}",
        "gamma", "n", "y", "tail integral", "bound", "ratio"
    );
    for (gamma, n, y) in [(1.0, 0u32, 1.0), (1.0, 1, 1.0), (0.5, 3, 6.0), (2.0, 4, 5.0)] {
        let row = incomplete_gamma_bound_check(gamma, n, y).unwrap();
        println!(
            "  {gamma:>6.2} {n:>3} {y:>8.2}  {:>14.6e}  {:>14.6e}  {:>8.4}",
            row.lhs, row.rhs, row.ratio
        );
    }
    let suite = incomplete_gamma_suite().unwrap();
    let worst = suite.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    println!(
        "  full grid: {} rows, all pass, worst ratio {worst:.4} (always <= 1)",
        suite.len()
    );
    // At the boundary y = 1/gamma with n = 0 the ratio is exactly 1/3.
    let edge = incomplete_gamma_bound_check(1.0, 0, 1.0).unwrap();
    println!("  boundary case n = 0, y = 1/gamma: ratio = {:.10} (= 1/3)", edge.ratio);

    println!("\nexponential comparisons at gamma = 1, y = 0.5:");
    for row in exp_inequality_check(1.0, 0.5).unwrap() {
        println!(
            "  {:<10?} x = {:>8.4}: lhs {:>12.5e} >= rhs {:>12.5e}  margin {:+.2e}",
            row.case, row.x, row.lhs, row.rhs, row.relative_margin
        );
    }
    println!("  (the first Positive/Negative rows sit exactly on the equality boundary)");
}
