use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::point::Point;
use crate::{Error, Result};

/// Right-hand side `f` of the Poisson problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceTerm {
    Constant { value: f64 },
    /// `f(x) = |x - center|^(-s)`.
    RadialPower { center: Point, s: f64 },
    /// `height * (1 - |x - center|^2 / radius^2)^2` inside the ball, zero outside.
    Bump { center: Point, radius: f64, height: f64 },
}

impl SourceTerm {
    pub fn constant(value: f64) -> Self {
        SourceTerm::Constant { value }
    }

    pub fn zero() -> Self {
        SourceTerm::Constant { value: 0.0 }
    }

    pub fn radial_power(center: Point, s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::invalid("radial power exponent must be finite and >= 0"));
        }
        Ok(SourceTerm::RadialPower { center, s })
    }

    pub fn bump(center: Point, radius: f64, height: f64) -> Result<Self> {
        if !(radius > 0.0) || !height.is_finite() {
            return Err(Error::invalid("bump needs a positive radius and finite height"));
        }
        Ok(SourceTerm::Bump { center, radius, height })
    }

    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            SourceTerm::Constant { value } => value,
            SourceTerm::RadialPower { center, s } => {
                if s == 0.0 {
                    1.0
                } else {
                    p.dist(center).powf(-s)
                }
            }
            SourceTerm::Bump { center, radius, height } => {
                let q = p.dist(center) / radius;
                if q >= 1.0 {
                    0.0
                } else {
                    height * (1.0 - q * q).powi(2)
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SourceTerm::Constant { value } if *value == 0.0)
            || matches!(self, SourceTerm::Bump { height, .. } if *height == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        match *self {
            SourceTerm::Constant { value } => value >= 0.0,
            SourceTerm::RadialPower { .. } => true,
            SourceTerm::Bump { height, .. } => height >= 0.0,
        }
    }

    /// Point where `f` blows up, if any.
    pub fn singularity(&self) -> Option<Point> {
        match *self {
            SourceTerm::RadialPower { center, s } if s > 0.0 => Some(center),
            _ => None,
        }
    }

    pub(crate) fn with_center(&self, c: Point) -> Self {
        match *self {
            SourceTerm::RadialPower { s, .. } => SourceTerm::RadialPower { center: c, s },
            SourceTerm::Bump { radius, height, .. } => SourceTerm::Bump { center: c, radius, height },
            ref other => other.clone(),
        }
    }

    /// Checks that `f ∈ L^q` on a bounded planar domain (`s q < 2`).
    pub fn check_integrability(&self, q: f64) -> Result<()> {
        if let SourceTerm::RadialPower { s, .. } = *self {
            let finite = if q.is_infinite() { s == 0.0 } else { s * q < 2.0 };
            if !finite {
                return Err(Error::invalid(format!(
                    "|x|^-{s} is not in L^{q} near its centre (needs s q < 2)"
                )));
            }
        }
        Ok(())
    }

    /// Closed-form `‖f‖_{L^q(B(center, radius))}` for a ball centred at the
    /// source centre (any centre for constants); `None` when no closed form applies.
    pub fn lq_norm_on_ball(&self, q: f64, radius: f64) -> Option<f64> {
        let area = PI * radius * radius;
        match *self {
            SourceTerm::Constant { value } => Some(if q.is_infinite() {
                value.abs()
            } else {
                value.abs() * area.powf(1.0 / q)
            }),
            SourceTerm::RadialPower { s, .. } => {
                if q.is_infinite() {
                    return (s == 0.0).then_some(1.0);
                }
                let e = 2.0 - s * q;
                (e > 0.0).then(|| (2.0 * PI * radius.powf(e) / e).powf(1.0 / q))
            }
            SourceTerm::Bump { radius: b, height, .. } => {
                if q.is_infinite() {
                    return Some(height.abs());
                }
                // ∫ (1 - ρ²/b²)^{2q} 2πρ dρ = π b² / (2q + 1) over the bump support.
                (radius >= b).then(|| height.abs() * (PI * b * b / (2.0 * q + 1.0)).powf(1.0 / q))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_power_values() {
        let f = SourceTerm::radial_power(Point::ORIGIN, 0.5).unwrap();
        assert!((f.eval(Point::new(4.0, 0.0)) - 0.5).abs() < 1e-15);
        assert_eq!(f.singularity(), Some(Point::ORIGIN));
        assert!(f.check_integrability(3.5).is_ok());
        assert!(f.check_integrability(4.0).is_err());
    }

    #[test]
    fn closed_form_norms() {
        let one = SourceTerm::constant(2.0);
        assert!((one.lq_norm_on_ball(1.0, 1.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        let f = SourceTerm::radial_power(Point::ORIGIN, 0.5).unwrap();
        // ∫_{B_1} |x|^{-1/2} = 4π/3.
        assert!((f.lq_norm_on_ball(1.0, 1.0).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(f.lq_norm_on_ball(4.0, 1.0).is_none());
    }

    #[test]
    fn bump_support() {
        let b = SourceTerm::bump(Point::ORIGIN, 0.5, 3.0).unwrap();
        assert_eq!(b.eval(Point::ORIGIN), 3.0);
        assert_eq!(b.eval(Point::new(0.6, 0.0)), 0.0);
    }
}
