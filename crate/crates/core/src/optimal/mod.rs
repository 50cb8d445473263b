//! The globally optimal design: the SINR-only and energy-only extreme
//! problems, the minimum-power subproblem, bounds on the optimum, and the
//! golden-section search that ties them together.

mod bounds;
mod goa;
mod op2;
mod op3;
mod op4;
mod sdp;

pub use op2::{solve_op2, Op2Solution};
pub use op3::{solve_op3, Op3Solution};
pub use op4::{solve_op4, Op4Solution, Op4Status};
pub use bounds::{compute_bounds, compute_bounds_with_work, BoundsReport, BoundsWork};
pub use goa::{goa, iteration_bound, GoaIteration, GoaOptions, GoaOutcome, GoaTrace, GOLDEN};
