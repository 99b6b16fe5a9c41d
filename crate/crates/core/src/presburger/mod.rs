//! Presburger arithmetic: formulas, quantifier elimination, evaluation.

mod eval;
mod formula;
mod linear;
mod piecewise;
mod qe;
mod simplify;

pub use eval::{evaluate, evaluate_formula, evaluate_in_box, Env};
pub use formula::{parse_formula, parse_formula_in, Formula};
pub use linear::LinearTerm;
pub use piecewise::{
    check_piecewise, definable_choice, extract_piecewise_affine, AffinePiece, PiecewiseAffine,
};
pub use qe::{
    eliminate_quantifiers, eliminate_quantifiers_with, equivalent, is_satisfiable,
    is_satisfiable_with, is_valid, QeConfig,
};
pub use simplify::{nnf, simplify};

#[allow(unused_imports)]
pub(crate) use eval::{eval_qf, search_box};
#[allow(unused_imports)]
pub(crate) use formula::{check_declared, parse_formula_at, parse_linterm};
