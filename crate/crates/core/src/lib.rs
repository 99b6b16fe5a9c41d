pub mod cli;
pub mod constructible;
pub mod engine;
pub mod padic;
pub mod error;
pub mod poly;
pub mod presburger;
pub mod rectilinear;
pub mod ring;
pub mod scalar;
mod syntax;

pub use error::{Error, Result};
pub use poly::Poly;
pub use presburger::{Formula, LinearTerm};
pub use ring::{AElement, FixedQ};

/// Exact scalar used for zero tests and fixed-`q` evaluation.
pub type Exact = num_rational::BigRational;
/// Floating scalar used by the numeric oracles.
pub type Float = f64;
