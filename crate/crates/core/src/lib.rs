pub mod cone;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod optimal;
pub mod subopt;

pub use error::{Error, Result};
