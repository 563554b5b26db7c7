//! Speed-measure densities of the squared sandwich diffusions: the density
//! nu(y) = 1/2 y^{-1/2} exp(-2 rho [G(mu sqrt(y)) - G(mu)]) carries an
//! integrable inverse-square-root singularity at the origin; its total mass
//! is computed after the exact substitution x = sqrt(y).
//!
//! Run with: cargo run -p meanrev --example speed_measure

use meanrev::invariant::{speed_density_pm, speed_mass_pm, BracketSide};
use meanrev::model::ReversionFunction;
use meanrev::quad::QuadratureSpec;

fn main() {
    let spec = QuadratureSpec::default();
    let rf = ReversionFunction::linear();
    let (l, m, delta) = (1.0, 1.0, 0.1);

    println!("speed density, linear reversion, l = m = 1, delta = 0.1:");
    println!("  {:>10}  {:>16}  {:>16}", "y", "upper side", "lower side");
    for y in [1e-6, 0.01, 0.25, 1.0, 2.0, 4.0] {
        let up = speed_density_pm(&rf, l, m, delta, BracketSide::Upper, y).unwrap();
        let lo = speed_density_pm(&rf, l, m, delta, BracketSide::Lower, y).unwrap();
        println!("  {y:>10.2e}  {up:>16.8e}  {lo:>16.8e}");
    }
    println!("  (value at y = 1 is exactly 1/2 on both sides: the exponent vanishes)");

    // Total mass for the linear case at delta = 0 has the closed form
    // e * sqrt(pi) / 2 after substituting x = sqrt(y).
    let mass = speed_mass_pm(&rf, 1.0, 1.0, 0.0, BracketSide::Upper, &spec).unwrap();
    let exact = std::f64::consts::E * std::f64::consts::PI.sqrt() / 2.0;
    println!("\ntotal mass at delta = 0: {mass:.12} (closed form {exact:.12})");

    // Superlinear reversion keeps the mass finite as well.
    let cubic = ReversionFunction::odd_power(3.0).unwrap();
    for side in [BracketSide::Upper, BracketSide::Lower] {
        let mass = speed_mass_pm(&cubic, l, m, delta, side, &spec).unwrap();
        println!("cubic reversion, {side:?} side: total mass {mass:.10}");
    }
}
