//! Stationary averages by quadrature of the invariant measure: the ratio
//!
//!   w(k, l, m) = int f((k/m) y) exp(-2 (l/m) G(y)) dy
//!              / int            exp(-2 (l/m) G(y)) dy
//!
//! has closed forms for linear reversion (Gaussian moments) and reduces to a
//! Gamma-function ratio for cubic reversion; both are reproduced to high
//! accuracy here.
//!
//! Run with: cargo run -p meanrev --example limit_average

use meanrev::invariant::limit_average;
use meanrev::model::{ObservableFunction, ReversionFunction};
use meanrev::quad::QuadratureSpec;

fn main() {
    let spec = QuadratureSpec::default();
    let of = ObservableFunction::square();

    // Linear reversion: the invariant density is Gaussian and
    // w(k, l, m) = k^2 / (2 l m).
    let linear = ReversionFunction::linear();
    println!("linear reversion (Gaussian closed form k^2 / (2 l m)):");
    for (k, l, m) in [(1.0, 1.0, 1.0), (0.7, 1.3, 0.9), (2.0, 0.5, 1.5)] {
        let w = limit_average(&linear, &of, k, l, m, &spec).unwrap();
        let exact = k * k / (2.0 * l * m);
        println!(
            "  (k, l, m) = ({k:.1}, {l:.1}, {m:.1}):  w = {w:.12}   exact = {exact:.12}   |diff| = {:.2e}",
            (w - exact).abs()
        );
    }

    // Cubic reversion at unit parameters: density ~ exp(-y^4 / 2), second
    // moment sqrt(2) Gamma(3/4) / Gamma(1/4) = 0.477988...
    let cubic = ReversionFunction::odd_power(3.0).unwrap();
    let w = limit_average(&cubic, &of, 1.0, 1.0, 1.0, &spec).unwrap();
    println!("\ncubic reversion, unit parameters:");
    println!("  w = {w:.12}   (reference 0.477988797540...)");

    // A constant observable integrates to itself: numerator and denominator
    // share one quadrature panel set, so f = 1 returns 1.0 to the last bit
    // and other constants come back within an ulp.
    let of_one = ObservableFunction::constant(1.0);
    let w1 = limit_average(&cubic, &of_one, 1.0, 1.0, 1.0, &spec).unwrap();
    let of_const = ObservableFunction::constant(3.25);
    let w = limit_average(&cubic, &of_const, 1.0, 1.0, 1.0, &spec).unwrap();
    println!("\nconstant observables:");
    println!("  f = 1:    w = {w1}   (bit-exact: {})", w1 == 1.0);
    println!("  f = 3.25: w = {w}   (|diff| = {:.1e})", (w - 3.25).abs());

    // A jump observable: panels align with the declared breakpoints, so the
    // indicator mass is the invariant probability of the window.
    let box_of = ObservableFunction::indicator(1.0).unwrap();
    let w = limit_average(&linear, &box_of, 1.0, 1.0, 1.0, &spec).unwrap();
    // For the standard Gaussian with variance 1/2 this is erf(1).
    println!("\nindicator observable on [-1, 1], linear reversion:");
    println!("  w = {w:.12}   (erf(1) = 0.842700792950...)");
}
