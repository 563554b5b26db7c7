//! Experiments that turn simulations and quadrature into verdicts: the
//! limit functionals and their errors, local-window and ergodic averages,
//! CIR maximal bounds, moment-growth envelopes, the elementary inequality
//! suites, and the discrete concatenation identity.

mod cir;
mod functionals;
mod inequalities;
mod studies;

pub use cir::*;
pub use functionals::*;
pub use inequalities::*;
pub use studies::*;
