//! Exponential-polynomial algebra.
//!
//! Every function the solvers touch (initial data, series coefficients,
//! vorticity components, forcing curls) is an [`ExpPoly`]: a finite sum of
//! complex multiples of `monomial · exp(linear form)` in `(x, y, z, t)`. The
//! set is closed under sums, products, derivatives and, on Laplacian
//! eigen-atoms, under the heat semigroup.

mod calculus;
mod display;
mod parse;
mod poly;

pub use calculus::{laplacian_eigenvalue, second_derivative_eigenvalue, VectorField};
pub use display::{atom_to_display, format_complex, to_display};
pub(crate) use display::format_real;
pub use parse::{parse, ParseError, ParseErrorKind};
pub use poly::{
    Atom, ExpPoly, LinearForm, Point, Powers, Var, DEFAULT_ATOM_CAP, MERGE_TOLERANCE,
};

pub use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("atom count {atoms} exceeds the cap of {cap}")]
    AtomOverflow { atoms: usize, cap: usize },
    #[error("{atom} is not a Laplacian eigenfunction")]
    NonEigenAtom { atom: String },
}
