//! Run configuration: one flat TOML table per pipeline stage.
//!
//! ```toml
//! pipeline = "holder"
//! seed = 7
//!
//! [domain]
//! kind = "koch"
//! bump = 0.03
//!
//! [mesh]
//! h = 0.01
//! ```
//!
//! Every key has a default, so an empty file is a valid configuration. Unknown
//! keys are rejected to catch typos.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fem::SourceTerm;
use crate::geometry::{generate_flat_fractal, PolygonalDomain};
use crate::point::Point;
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Pipeline name; the command line may override it.
    pub pipeline: Option<String>,
    pub seed: u64,
    pub domain: DomainConfig,
    pub mesh: MeshConfig,
    pub source: SourceConfig,
    pub solve: SolveConfig,
    pub flatness: FlatnessConfig,
    pub monotonicity: MonotonicityConfig,
    pub decay: DecayConfig,
    pub holder: HolderConfig,
    pub exponents: ExponentsConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    /// `square`, `disk`, `polygon`, `l-shape`, `koch` or `file`.
    pub kind: String,
    pub r0: f64,
    /// Sides of `disk`/`polygon` and of the `koch` base polygon.
    pub sides: usize,
    pub radius: f64,
    /// Koch base: `polygon` or `square`.
    pub base: String,
    pub bump: f64,
    pub depth: u32,
    /// Randomise Koch bump signs from the run seed.
    pub random_signs: bool,
    /// Domain file for `kind = "file"`.
    pub path: Option<String>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            kind: "koch".into(),
            r0: 0.5,
            sides: 12,
            radius: 1.0,
            base: "polygon".into(),
            bump: 0.03,
            depth: 3,
            random_signs: true,
            path: None,
        }
    }
}

impl DomainConfig {
    pub fn build(&self, seed: u64) -> Result<PolygonalDomain> {
        match self.kind.as_str() {
            "square" => PolygonalDomain::unit_square().with_r0(self.r0),
            "disk" => PolygonalDomain::disk(self.radius, self.sides, self.r0),
            "polygon" => PolygonalDomain::regular_polygon(self.sides, self.radius, self.r0),
            "l-shape" => PolygonalDomain::l_shape(self.r0),
            "koch" => {
                let base = match self.base.as_str() {
                    "polygon" => PolygonalDomain::regular_polygon(self.sides, self.radius, self.r0)?,
                    "square" => PolygonalDomain::unit_square().with_r0(self.r0)?,
                    other => return Err(Error::Parse(format!("unknown koch base {other:?}"))),
                };
                generate_flat_fractal(&base, self.bump, self.depth, self.random_signs.then_some(seed))
            }
            "file" => {
                let path = self.path.as_ref().ok_or_else(|| Error::Parse("domain.kind = \"file\" needs domain.path".into()))?;
                PolygonalDomain::read(Path::new(path))
            }
            other => Err(Error::Parse(format!("unknown domain kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub h: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { h: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    /// `constant`, `zero`, `radial_power` or `bump`.
    pub kind: String,
    pub value: f64,
    pub center_x: f64,
    pub center_y: f64,
    /// Exponent `s` of `|x - c|^{-s}`.
    pub exponent: f64,
    pub radius: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig { kind: "constant".into(), value: 1.0, center_x: 0.0, center_y: 0.0, exponent: 0.5, radius: 0.1 }
    }
}

impl SourceConfig {
    pub fn build(&self) -> Result<SourceTerm> {
        let c = Point::new(self.center_x, self.center_y);
        match self.kind.as_str() {
            "constant" => Ok(SourceTerm::constant(self.value)),
            "zero" => Ok(SourceTerm::zero()),
            "radial_power" => SourceTerm::radial_power(c, self.exponent),
            "bump" => SourceTerm::bump(c, self.radius, self.value),
            other => Err(Error::Parse(format!("unknown source kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub rel_tol: f64,
    pub max_iterations: usize,
    /// Point at which the report prints `u`.
    pub probe_x: f64,
    pub probe_y: f64,
    /// Largest accepted `|∫|∇u|² - ∫ f u| / ∫|∇u|²`.
    pub energy_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { rel_tol: 1e-10, max_iterations: 10_000, probe_x: 0.0, probe_y: 0.0, energy_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatnessConfig {
    /// Radii as fractions of `r0`.
    pub scales: Vec<f64>,
    pub centers: usize,
    pub angular_resolution: usize,
    /// Separation check: `r0` (best line at `r0` only) or `all` scales.
    pub separation: String,
    /// If set, require `eps_global <= eps_max(beta)`.
    pub beta: Option<f64>,
}

impl Default for FlatnessConfig {
    fn default() -> Self {
        FlatnessConfig {
            scales: vec![0.25, 0.5, 1.0],
            centers: 24,
            angular_resolution: 90,
            separation: "r0".into(),
            beta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonotonicityConfig {
    pub beta: f64,
    /// Boundary centres, evenly spaced along the outline.
    pub centers: usize,
    /// Relative slack of `check_monotone`.
    pub slack: f64,
    /// Dyadic radii run from `r_max * r0` down to `r_min_h * h`.
    pub r_max: f64,
    pub r_min_h: f64,
    pub psi_points: usize,
    /// Integrability of `u f`; `inf` for bounded data.
    pub p0: f64,
    pub require_monotone: bool,
}

impl Default for MonotonicityConfig {
    fn default() -> Self {
        MonotonicityConfig {
            beta: 1.2,
            centers: 5,
            slack: 0.05,
            r_max: 0.5,
            r_min_h: 4.0,
            psi_points: 64,
            p0: f64::INFINITY,
            require_monotone: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub beta: f64,
    pub boundary_centers: usize,
    /// Interior centres; empty means the vertex farthest from the boundary.
    pub interior_x: Vec<f64>,
    pub interior_y: Vec<f64>,
    pub radii: usize,
    /// Largest radius as a fraction of `r0`.
    pub r_max: f64,
    /// Accepted shortfall of the slope below `N - 2 + beta`.
    pub slack: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            beta: 1.2,
            boundary_centers: 3,
            interior_x: Vec::new(),
            interior_y: Vec::new(),
            radii: 6,
            r_max: 0.5,
            slack: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderConfig {
    /// Target Hölder exponent; the flatness threshold is taken at `beta = 2 alpha`.
    pub alpha: f64,
    /// Accepted shortfall of the fitted exponent below `alpha`.
    pub alpha_slack: f64,
    /// Centre of the fit region; defaults to the first outline vertex.
    pub center_x: Option<f64>,
    pub center_y: Option<f64>,
    /// Region radius as a fraction of `r0`.
    pub region: f64,
    pub pair_budget: usize,
    /// Bisection levels of mesh refinement toward the centre.
    pub refine_levels: usize,
    /// Require the flatness certificate `eps_global <= eps_max`.
    pub certify: bool,
    /// Require `alpha_hat >= alpha - alpha_slack`.
    pub assert_alpha: bool,
    /// If set, require `alpha_hat` to fall in `[lo, hi]`.
    pub alpha_range: Option<Vec<f64>>,
    /// Boundary centres of the Campanato sweep.
    pub campanato_centers: usize,
    pub campanato_radii: usize,
}

impl Default for HolderConfig {
    fn default() -> Self {
        HolderConfig {
            alpha: 0.6,
            alpha_slack: 0.1,
            center_x: None,
            center_y: None,
            region: 0.25,
            pair_budget: 4000,
            refine_levels: 3,
            certify: true,
            assert_alpha: true,
            alpha_range: None,
            campanato_centers: 5,
            campanato_radii: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentsConfig {
    pub n: Vec<u32>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Default for ExponentsConfig {
    fn default() -> Self {
        ExponentsConfig {
            n: vec![2, 3, 4, 5],
            q: vec![2.0, 4.0, 6.0],
            r: vec![1.0, 2.0, 3.0],
            p: vec![f64::INFINITY],
            alpha: vec![0.25, 0.5],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn round_trip_and_typos() {
        let c = Config::from_toml("pipeline = \"solve\"\nseed = 3\n[mesh]\nh = 0.02\n[monotonicity]\np0 = inf\n").unwrap();
        assert_eq!(c.mesh.h, 0.02);
        assert_eq!(c.seed, 3);
        assert!(c.monotonicity.p0.is_infinite());
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
        assert!(matches!(Config::from_toml("[mesh]\nhh = 1\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn builds_every_domain_kind() {
        for kind in ["square", "disk", "polygon", "l-shape", "koch"] {
            let d = DomainConfig { kind: kind.into(), ..Default::default() };
            d.build(1).unwrap();
        }
        assert!(DomainConfig { kind: "blob".into(), ..Default::default() }.build(1).is_err());
        assert!(DomainConfig { kind: "file".into(), ..Default::default() }.build(1).is_err());
    }
}
