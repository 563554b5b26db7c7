//! Maximal inequality for square-root processes: for CIR with
//! 2 nu theta / sigma^2 < 1 the expected running maximum of Y^n is bounded by
//! C1 + C2 log(T v 1)^n with fully explicit constants. The Monte Carlo
//! estimate sits far below the bound — the point of the check is that a
//! violation would expose an implementation bug.
//!
//! Run with: cargo run -p meanrev --example cir_bound

use meanrev::experiments::{cir_constants, cir_max_bound_check};
use meanrev::sde::CirParams;

fn main() {
    // Hand-checkable instance: n = 0, y0 = 1, gamma = sigma = 1 gives
    // C1 = 4 * 54 = 216 and C2 = 54.
    let c = cir_constants(1.0, 1.0, 1.0, 0);
    println!("constants at (y0, gamma, sigma, n) = (1, 1, 1, 0): C1 = {}, C2 = {}", c.c1, c.c2);

    println!("\nC1 growth in the moment order n (y0 = 1, gamma = 0.5, sigma = 2):");
    for n in 0..=4 {
        let c = cir_constants(1.0, 0.5, 2.0, n);
        println!("  n = {n}: C1 = {:>12.4e}  C2 = {:>12.4e}", c.c1, c.c2);
    }

    println!("\nMonte Carlo maximal-bound checks (T = 100, dt = 0.01, 500 paths):");
    println!(
        "  {:>26}  {:>2}  {:>10}  {:>12}  {:>10}",
        "(nu, theta, sigma, y0)", "n", "E[max Y^n]", "bound", "slack"
    );
    for (nu, theta, sigma, y0) in [(1.0, 0.25, 2.0, 1.0), (2.0, 0.2, 1.0, 0.5)] {
        for n in [1u32, 2] {
            let params = CirParams::new(nu, theta, sigma, y0).unwrap();
            let report = cir_max_bound_check(&params, n, 100.0, 0.01, 500, 17).unwrap();
            println!(
                "  ({nu:>4.2}, {theta:>4.2}, {sigma:>4.2}, {y0:>4.2})  {n:>2}  {:>10.4}  {:>12.4e}  {:>10.1}  {}",
                report.mc_estimate,
                report.bound,
                report.slack_ratio,
                if report.pass { "pass" } else { "FAIL" }
            );
        }
    }

    // The hypothesis 2 nu theta / sigma^2 < 1 is enforced at construction.
    let err = CirParams::new(1.0, 1.0, 1.0, 1.0).unwrap_err();
    println!("\nrejected parameters: {err}");
}
