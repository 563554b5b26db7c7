//! Numerical laboratory for diffusions with fast nonlinear mean reversion.
//!
//! The crate simulates the family
//!
//! ```text
//! dX_t = ( b_t - (c_t L_t / eps) g(M_t X_t / eps) ) dt + sqrt(c_t) dW_t
//! ```
//!
//! for odd, nondecreasing, superlinearly growing reversion functions `g`,
//! computes the stationary-average limits of integral functionals
//! `int_0^t H_s f(K_s X_s / eps) ds` by quadrature of the invariant measure
//! `exp(-2 (L/M) G(y)) dy`, and runs desk-scale experiments that check the
//! convergence statements, moment bounds, maximal inequalities and coupling
//! properties this limit theory rests on.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability (model validation, invariant-measure quadrature, stiff
//! schemes, time change, limit convergence, ergodic averages, CIR maximal
//! bounds, coupled comparisons, the inequality suites, and the config-driven
//! runner).

// Numerics idioms kept on purpose: `!(x > 0.0)` rejects NaN alongside the
// out-of-range values, tabulated rational-approximation constants carry their
// full published digits, and index loops mirror the discrete formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::too_many_arguments)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod invariant;
pub mod model;
pub mod quad;
pub mod report;
pub mod rng;
pub mod runner;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
