//! Numerical laboratory for the Dirichlet Poisson problem on Reifenberg-flat
//! planar domains.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: polygonal domains, fractal generation, flatness certification
//! - [`mesh`]: background-grid triangulation and local refinement
//! - [`fem`]: P1 finite elements with a Jacobi-preconditioned CG solver
//! - [`functional`]: ball integrals, the monotone functional and its companions
//! - [`eigen`]: Dirichlet eigenvalues of spherical caps and the flatness threshold
//! - [`exponents`]: integrability/Hölder exponent arithmetic
//! - [`analysis`]: decay, Campanato, Poincaré and Hölder fits
//! - [`oracle`]: analytic and brute-force references, independent of the above
//! - [`pipeline`]: configuration-driven experiment runs used by the CLI

pub mod analysis;
pub mod eigen;
pub mod error;
pub mod exponents;
pub mod fem;
pub mod functional;
pub mod geometry;
pub mod mesh;
pub mod oracle;
pub mod pipeline;
pub mod point;
pub mod rng;
pub(crate) mod sum;

pub use error::{Error, Result};
pub use point::Point;
