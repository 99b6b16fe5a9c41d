//! Summation, loci and interpolation for constructible functions.

mod closed;
mod expand;
mod interp;
mod locus;
mod sum;

pub use closed::{sum_finite_range, sum_geometric_closed_form};
pub use expand::{merge_monomials, MergedMonomial, MergedMonomialForm};
pub use locus::{compute_locus, LocusKind, LocusResult};
pub use sum::{sum_over_lattice, SumResult};
pub use interp::interpolate;
pub(crate) use locus::{eventually_zero, iva_terms};
