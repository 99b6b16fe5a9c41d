//! Exact arithmetic in `A = Z[L, L^-1, 1/(1 - L^-i)]` and its images at rational `q > 1`.

mod aelement;
mod upoly;

pub use aelement::{AElement, FixedQ};
#[allow(unused_imports)]
pub(crate) use aelement::{bigint_from_json, bigint_json, parse_aelement};
pub use upoly::{cyclotomic, UPoly};
