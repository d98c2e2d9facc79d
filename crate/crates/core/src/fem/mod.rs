//! P1 finite elements for `-Δu = f` with homogeneous Dirichlet data.

mod field;
pub(crate) mod quad;
mod solve;
mod source;
mod sparse;

pub use field::ScalarField;
pub use quad::{integrate_over_mesh, TRI_RULE};
pub use solve::{solve_poisson, solve_poisson_with, Solution, SolveOptions, SolveStats};
pub use source::SourceTerm;
pub use sparse::{conjugate_gradient, CgOutcome, CsrMatrix};
