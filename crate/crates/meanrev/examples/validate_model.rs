//! Validate model ingredients against the structural assumptions: oddness and
//! monotonicity of the reversion function, consistency of its antiderivative,
//! the superlinear growth floor, evenness and polynomial growth of the
//! observable, and positivity of the coefficient channels.
//!
//! Run with: cargo run -p meanrev --example validate_model

use std::sync::Arc;

use meanrev::model::{
    validate_model, CoefficientModel, ObservableFunction, RealFn, ReversionFunction,
};

fn print_report(name: &str, report: &meanrev::model::ValidationReport) {
    println!("== {name} ==");
    for check in &report.checks {
        println!(
            "  {:<42} {}  (worst margin {:+.3e} at {:.3e})",
            check.name,
            if check.passed { "ok  " } else { "FAIL" },
            check.worst_margin,
            check.worst_location
        );
    }
    for warning in &report.warnings {
        println!("  warning: {warning}");
    }
    println!(
        "  => {}\n",
        if report.passed() { "all checks passed" } else { "validation FAILED" }
    );
}

fn main() {
    // A cubic reversion with its closed-form antiderivative: passes everything.
    let rf = ReversionFunction::odd_power(3.0).unwrap();
    let of = ObservableFunction::square();
    let cm = CoefficientModel::unit(1.0).with_kappa(0.25);
    let report = validate_model(&rf, &of, &cm).unwrap();
    print_report("odd_power(3) / square / constant channels", &report);

    // An even "reversion" function cannot be odd; the report pinpoints it.
    let g: RealFn = Arc::new(|x: f64| x * x);
    let bad = ReversionFunction::new("x_squared", g, None, 2.0, 0.5, 10.0).unwrap();
    let report = validate_model(&bad, &of, &cm).unwrap();
    print_report("x^2 pretending to be a reversion function", &report);

    // Stochastic coefficient channels validate structurally but flag the
    // moment assumptions as the caller's responsibility.
    let mut stochastic = CoefficientModel::unit(1.0).with_kappa(0.25);
    stochastic.l = meanrev::model::ChannelSpec::ClippedOu {
        start: 1.0,
        mean: 1.0,
        rate: 2.0,
        vol: 0.3,
        floor: 0.5,
        ceil: 2.0,
    };
    let report = validate_model(&rf, &of, &stochastic).unwrap();
    print_report("clipped Ornstein-Uhlenbeck L channel", &report);
}
