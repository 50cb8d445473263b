//! The guide's chapters as doc comments, so `cargo test --doc` runs every
//! snippet in the book.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/system-model.md")]
pub mod system_model {}
#[doc = include_str!("../../../book/src/cone-solver.md")]
pub mod cone_solver {}
#[doc = include_str!("../../../book/src/optimal.md")]
pub mod optimal {}
#[doc = include_str!("../../../book/src/suboptimal.md")]
pub mod suboptimal {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
