//! Exact arithmetic: rationals, sparse multivariate polynomials, rational
//! functions, fraction-free linear algebra and Laurent expansion in `eps`.

mod gcd;
mod laurent;
mod linalg;
mod mpoly;
mod ratfunc;
pub mod univariate;
mod vars;

pub use gcd::{gcd, gcd_many, lcm};
pub use laurent::{laurent_expand_eps, LaurentExpansion};
pub use linalg::{bareiss_gauss_jordan, det, linsolve_fraction_field, BareissResult};
pub use mpoly::{fmt_q, pow_q, q, qf, table, MPoly, Monomial, Q};
pub use ratfunc::RatFunc;
pub use vars::{is_reserved, Role, VarTable, Vars, EPS, X, Y};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgError {
    #[error("variable-table mismatch: {0} vs {1}")]
    TableMismatch(String, String),
    #[error("negative power {0}")]
    NegativePower(i64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("singular matrix (determinant is identically zero)")]
    Singular,
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("expression depends on state variables x, y")]
    StateDependent,
    #[error("denominator has no well-defined leading eps-order: {0}")]
    LaurentUndefined(String),
}
