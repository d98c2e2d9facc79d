//! Configuration-driven experiment runs.
//!
//! A run builds the domain, mesh and solution it needs, writes CSV tables and
//! mesh/solution files into the output directory and finishes with a
//! `report.md` that records the inputs, seed and version next to every check.
//! CSV outputs depend only on the configuration and seed, never on the number
//! of worker threads.

mod config;
mod report;
mod stages;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use config::{
    Config, DecayConfig, DomainConfig, ExponentsConfig, FlatnessConfig, HolderConfig, MeshConfig, MonotonicityConfig,
    SolveConfig, SourceConfig,
};
pub use report::{csv, Check, Report};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    GenerateDomain,
    CheckFlatness,
    Solve,
    Monotonicity,
    Decay,
    Holder,
    Exponents,
    All,
}

impl Pipeline {
    pub const ALL: [Pipeline; 8] = [
        Pipeline::GenerateDomain,
        Pipeline::CheckFlatness,
        Pipeline::Solve,
        Pipeline::Monotonicity,
        Pipeline::Decay,
        Pipeline::Holder,
        Pipeline::Exponents,
        Pipeline::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::GenerateDomain => "generate-domain",
            Pipeline::CheckFlatness => "check-flatness",
            Pipeline::Solve => "solve",
            Pipeline::Monotonicity => "monotonicity",
            Pipeline::Decay => "decay",
            Pipeline::Holder => "holder",
            Pipeline::Exponents => "exponents",
            Pipeline::All => "all",
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown pipeline {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub pipeline: Pipeline,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

impl RunOutcome {
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }
}

/// Runs `pipeline` (or the one named in the config) into `out`.
///
/// Failing checks do not abort the run; they are collected in the outcome and
/// the report. Errors are reserved for bad input and numerical breakdowns.
pub fn run_pipeline(config: &Config, pipeline: Option<Pipeline>, out: &Path) -> Result<RunOutcome> {
    let pipeline = match (pipeline, &config.pipeline) {
        (Some(p), _) => p,
        (None, Some(name)) => name.parse()?,
        (None, None) => return Err(Error::Parse("no pipeline named in the config or on the command line".into())),
    };
    stages::run(config, pipeline, out)
}
