//! Independent references for the solver and the integral functionals.
//!
//! Nothing here depends on the modules it is used to check: the only crate
//! import is [`Point`](crate::point::Point). A unit test below enforces that.

mod quadrature;
mod radial;
mod series;

pub use quadrature::{adaptive_simpson, brute_quadrature, BallRegion, QuadratureEstimate};
pub use radial::{radial_poisson, RadialSolution};
pub use series::{square_series_solution, SeriesValue};

/// Leading exponent `π / ω` of the Dirichlet solution in a wedge of opening `ω`.
pub fn wedge_exponent(opening: f64) -> f64 {
    std::f64::consts::PI / opening
}

#[cfg(test)]
mod tests {
    #[test]
    fn imports_nothing_it_certifies() {
        let sources = [
            include_str!("mod.rs"),
            include_str!("quadrature.rs"),
            include_str!("radial.rs"),
            include_str!("series.rs"),
        ];
        let banned = ["geometry", "mesh", "fem", "functional", "analysis", "eigen", "exponents"];
        for src in sources {
            for line in src.lines().filter(|l| l.trim_start().starts_with("use ")) {
                for b in banned {
                    assert!(!line.contains(&format!("crate::{b}")), "oracle imports {b}: {line}");
                    assert!(!line.contains(&format!("super::super::{b}")), "oracle imports {b}: {line}");
                }
            }
        }
    }

    #[test]
    fn re_entrant_corner_exponent() {
        assert!((super::wedge_exponent(1.5 * std::f64::consts::PI) - 2.0 / 3.0).abs() < 1e-15);
    }
}
