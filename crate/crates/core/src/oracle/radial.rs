use std::sync::Arc;

use super::quadrature::adaptive_simpson;

const TOL: f64 = 1e-13;

/// Radial solution of `-(ρ^{N-1} u')' = ρ^{N-1} f(ρ)` on `(0, R)` with
/// `u'(0) = 0` and `u(R) = 0`.
#[derive(Clone)]
pub struct RadialSolution {
    n: u32,
    radius: f64,
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Constant(f64),
    General(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Closed form when `f` is constant, nested adaptive quadrature otherwise.
pub fn radial_poisson(
    n: u32,
    radius: f64,
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    constant: Option<f64>,
) -> RadialSolution {
    assert!(n == 2 || n == 3, "radial oracle supports N = 2, 3");
    assert!(radius > 0.0);
    let kind = match constant {
        Some(c) => Kind::Constant(c),
        None => Kind::General(Arc::new(f)),
    };
    RadialSolution { n, radius, kind }
}

impl RadialSolution {
    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn f(&self, rho: f64) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::General(f) => f(rho),
        }
    }

    /// `∫_0^ρ t^{N-1} f(t) dt`, with `t = τ²` to soften the origin.
    pub fn flux(&self, rho: f64) -> f64 {
        let n = self.n as i32;
        match &self.kind {
            Kind::Constant(c) => c * rho.powi(n) / n as f64,
            Kind::General(f) => {
                let g = |tau: f64| {
                    let t = tau * tau;
                    if t == 0.0 {
                        return 0.0;
                    }
                    2.0 * tau * t.powi(n - 1) * f(t)
                };
                adaptive_simpson(&g, 0.0, rho.sqrt(), TOL, 40)
            }
        }
    }

    pub fn du(&self, rho: f64) -> f64 {
        match &self.kind {
            Kind::Constant(c) => -c * rho / self.n as f64,
            Kind::General(_) => {
                if rho == 0.0 {
                    0.0
                } else {
                    -self.flux(rho) / rho.powi(self.n as i32 - 1)
                }
            }
        }
    }

    /// `u(ρ)` through the radial Green's function, one quadrature per call:
    /// `G(ρ, t) = ln(R / max(ρ, t))` for `N = 2`, `1/max(ρ, t) - 1/R` for `N = 3`.
    pub fn u(&self, rho: f64) -> f64 {
        let r = self.radius;
        match &self.kind {
            Kind::Constant(c) => c * (r * r - rho * rho) / (2.0 * self.n as f64),
            Kind::General(f) => {
                let n = self.n as i32;
                let green = |t: f64| match n {
                    2 => (r / t).ln(),
                    _ => 1.0 / t - 1.0 / r,
                };
                // Outer part: ∫_ρ^R t^{N-1} f(t) G(t) dt, again with t = τ².
                let outer = |tau: f64| {
                    let t = tau * tau;
                    if t == 0.0 {
                        return 0.0;
                    }
                    2.0 * tau * t.powi(n - 1) * f(t) * green(t)
                };
                let tail = adaptive_simpson(&outer, rho.sqrt(), r.sqrt(), TOL, 40);
                if rho == 0.0 {
                    return tail;
                }
                self.flux(rho) * green(rho) + tail
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_source_closed_forms() {
        let d2 = radial_poisson(2, 1.0, |_| 1.0, Some(1.0));
        assert_eq!(d2.u(0.0), 0.25);
        assert!((d2.u(0.5) - 0.1875).abs() < 1e-15);
        let d3 = radial_poisson(3, 1.0, |_| 1.0, Some(1.0));
        assert!((d3.u(0.0) - 1.0 / 6.0).abs() < 1e-15);
        let zero = radial_poisson(2, 1.0, |_| 0.0, Some(0.0));
        assert_eq!(zero.u(0.3), 0.0);
    }

    #[test]
    fn numeric_path_matches_closed_forms() {
        let num = radial_poisson(2, 1.0, |_| 1.0, None);
        assert!((num.u(0.0) - 0.25).abs() < 1e-10);
        // f = ρ^{-1/2} in 2-D: u = (R^{3/2} - ρ^{3/2}) / (3/2)².
        let sing = radial_poisson(2, 1.0, |r: f64| r.powf(-0.5), None);
        for rho in [0.0f64, 0.1, 0.5, 0.9] {
            let exact = (1.0 - rho.powf(1.5)) / 2.25;
            assert!((sing.u(rho) - exact).abs() < 1e-9, "rho {rho}: {} vs {exact}", sing.u(rho));
        }
    }

    #[test]
    fn three_dimensional_polynomial_source() {
        // f = 1 + ρ² in 3-D: u = (1 - ρ²)/6 + (1 - ρ⁴)/20, u' = -(ρ/3 + ρ³/5).
        let sol = radial_poisson(3, 1.0, |r: f64| 1.0 + r * r, None);
        for k in 0..10 {
            let r = k as f64 / 10.0;
            let exact = (1.0 - r * r) / 6.0 + (1.0 - r.powi(4)) / 20.0;
            assert!((sol.u(r) - exact).abs() < 1e-11, "u at {r}");
            assert!((sol.du(r) + r / 3.0 + r.powi(3) / 5.0).abs() < 1e-11, "u' at {r}");
        }
    }
}
