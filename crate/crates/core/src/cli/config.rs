//! JSON run configuration.
//!
//! Powers are given in dB and lengths in metres; both are converted here to
//! the linear, normalized quantities the library works with. Lengths are
//! divided by the reference length `r0_m` (default 500 m).
//!
//! ```json
//! {
//!   "n_t": 4, "n_r": 100, "snr_db": 10, "nu": 3.7, "omega_db": 0,
//!   "alpha": 10, "spacing_t": 0.25, "spacing_r": 0.75,
//!   "topology": { "kind": "centralized", "d_m": 100 },
//!   "trials": 1000, "seed": 0
//! }
//! ```

use std::path::PathBuf;

use serde::Deserialize;

use crate::error::Error;
use crate::montecarlo::SweepAxis;
use crate::params::{db_to_linear, theta_from_spacing, validate, Scenario, SystemParams, Topology, UserPosition};

pub const DEFAULT_R0_M: f64 = 500.0;
pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_PRECISION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A single shape for every link, or one per receive antenna.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    One(f64),
    PerLink(Vec<f64>),
}

/// `d_k = first + step * (k - 1)` for `k = 1..=n_r`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearLayout {
    pub first: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedUser {
    pub r_u_m: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum UserSpec {
    Fixed(FixedUser),
    Keyword(UserKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserKeyword {
    Random,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TopologySpec {
    Centralized {
        d_m: f64,
    },
    Distributed {
        distances_m: Option<Vec<f64>>,
        linear_m: Option<LinearLayout>,
    },
    Circular {
        r_c_m: f64,
        r_a_m: f64,
        user: UserSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// One of `snr_db`, `r_a_m`, `d_m`, `spacing_t`, `spacing_r`, `n_r`.
    pub axis: String,
    pub grid: Option<Vec<f64>>,
    pub range: Option<GridRange>,
}

/// The JSON document as written by the user.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub snr_db: f64,
    pub nu: f64,
    #[serde(default)]
    pub omega_db: f64,
    pub alpha: AlphaSpec,
    pub theta_t: Option<f64>,
    pub spacing_t: Option<f64>,
    pub theta_r: Option<f64>,
    pub spacing_r: Option<f64>,
    pub r0_m: Option<f64>,
    pub topology: TopologySpec,
    #[serde(default)]
    pub reference_d_m: Vec<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub precision: Option<usize>,
    pub out: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
}

/// Resolved sweep: library axis, normalized grid, and the grid in the
/// units the user wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axis: SweepAxis,
    /// Name of the axis in the config, e.g. `r_a_m`.
    pub config_axis: String,
    pub grid: Vec<f64>,
    pub config_grid: Vec<f64>,
}

/// A configuration turned into library types.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub scenario: Scenario,
    pub r0_m: f64,
    pub references_m: Vec<f64>,
    pub trials: u64,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub precision: usize,
    pub out: Option<PathBuf>,
    pub sweep: Option<SweepPlan>,
}

/// Parses a configuration document. Syntax errors carry line and column.
pub fn parse(text: &str) -> Result<RunConfig, String> {
    serde_json::from_str(text).map_err(|e| format!("invalid configuration: {e}"))
}

fn theta(name: &str, theta: Option<f64>, spacing: Option<f64>, problems: &mut Vec<String>) -> f64 {
    match (theta, spacing) {
        (Some(_), Some(_)) => {
            problems.push(format!("give either theta_{name} or spacing_{name}, not both"));
            0.0
        }
        (Some(t), None) => t,
        (None, Some(s)) => {
            if !(s.is_finite() && s > 0.0) {
                problems.push(format!("spacing_{name} must be positive, got {s}"));
            }
            theta_from_spacing(s)
        }
        (None, None) => 0.0,
    }
}

fn grid_values(spec: &SweepSpec) -> Result<Vec<f64>, String> {
    match (&spec.grid, &spec.range) {
        (Some(g), None) => {
            if g.is_empty() {
                return Err("sweep grid is empty".into());
            }
            Ok(g.clone())
        }
        (None, Some(r)) => {
            if !(r.step.is_finite() && r.step > 0.0 && r.start.is_finite() && r.stop >= r.start) {
                return Err("sweep range needs start <= stop and a positive step".into());
            }
            let n = ((r.stop - r.start) / r.step + 1e-9).floor() as usize;
            if n > 100_000 {
                return Err("sweep range has too many points".into());
            }
            Ok((0..=n).map(|j| r.start + r.step * j as f64).collect())
        }
        _ => Err("sweep needs exactly one of grid or range".into()),
    }
}

fn sweep_plan(spec: &SweepSpec, r0: f64) -> Result<SweepPlan, String> {
    let config_grid = grid_values(spec)?;
    let (axis, scale) = match spec.axis.as_str() {
        "snr_db" => (SweepAxis::SnrDb, 1.0),
        "r_a_m" => (SweepAxis::RingRadius, 1.0 / r0),
        "d_m" => (SweepAxis::CentralDistance, 1.0 / r0),
        "spacing_t" => (SweepAxis::SpacingT, 1.0),
        "spacing_r" => (SweepAxis::SpacingR, 1.0),
        "n_r" => (SweepAxis::NumRx, 1.0),
        other => {
            return Err(format!(
                "unknown sweep axis '{other}', expected one of snr_db, r_a_m, d_m, spacing_t, spacing_r, n_r"
            ))
        }
    };
    Ok(SweepPlan {
        axis,
        config_axis: spec.axis.clone(),
        grid: config_grid.iter().map(|v| v * scale).collect(),
        config_grid,
    })
}

impl RunConfig {
    /// Converts units and validates. Every problem found is reported.
    pub fn resolve(&self) -> Result<Resolved, String> {
        let mut problems = Vec::new();
        let r0 = self.r0_m.unwrap_or(DEFAULT_R0_M);
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(format!("r0_m must be positive, got {r0}"));
        }
        let theta_t = theta("t", self.theta_t, self.spacing_t, &mut problems);
        let theta_r = theta("r", self.theta_r, self.spacing_r, &mut problems);
        let alpha = match &self.alpha {
            AlphaSpec::One(a) => vec![*a],
            AlphaSpec::PerLink(v) => v.clone(),
        };
        let params = SystemParams {
            n_t: self.n_t,
            n_r: self.n_r,
            snr: db_to_linear(self.snr_db),
            nu: self.nu,
            omega: db_to_linear(self.omega_db),
            alpha,
            theta_t,
            theta_r,
        };
        let topology = match &self.topology {
            TopologySpec::Centralized { d_m } => Topology::Centralized { d: d_m / r0 },
            TopologySpec::Distributed { distances_m, linear_m } => {
                let metres = match (distances_m, linear_m) {
                    (Some(d), None) => d.clone(),
                    (None, Some(l)) => (0..self.n_r).map(|k| l.first + l.step * k as f64).collect(),
                    _ => {
                        problems.push("distributed topology needs exactly one of distances_m or linear_m".into());
                        vec![1.0; self.n_r]
                    }
                };
                Topology::DistributedExplicit {
                    distances: metres.iter().map(|d| d / r0).collect(),
                }
            }
            TopologySpec::Circular { r_c_m, r_a_m, user } => Topology::Circular {
                r_c: r_c_m / r0,
                r_a: r_a_m / r0,
                user: match user {
                    UserSpec::Fixed(u) => UserPosition::Fixed {
                        r_u: u.r_u_m / r0,
                        phi: u.phi,
                    },
                    UserSpec::Keyword(UserKeyword::Random) => UserPosition::Random,
                },
            },
        };
        if let Some(d) = self.reference_d_m.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            problems.push(format!("reference distance must be positive, got {d}"));
        }
        if self.workers == Some(0) {
            problems.push("workers must be at least 1".into());
        }
        let precision = self.precision.unwrap_or(DEFAULT_PRECISION);
        if !(1..=17).contains(&precision) {
            problems.push(format!(
                "precision must lie in 1..=17 significant digits, got {precision}"
            ));
        }
        let sweep = match &self.sweep {
            Some(s) => match sweep_plan(s, r0) {
                Ok(p) => Some(p),
                Err(e) => {
                    problems.push(e);
                    None
                }
            },
            None => None,
        };
        let scenario = match validate(params, topology) {
            Ok(s) => Some(s),
            Err(Error::Validation(v)) => {
                problems.extend(v);
                None
            }
            Err(e) => {
                problems.push(e.to_string());
                None
            }
        };
        if !problems.is_empty() {
            return Err(problems.join("; "));
        }
        Ok(Resolved {
            scenario: scenario.expect("no problems means a scenario"),
            r0_m: r0,
            references_m: self.reference_d_m.clone(),
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
            seed: self.seed,
            workers: self.workers,
            format: self.format,
            precision,
            out: self.out.clone(),
            sweep,
        })
    }
}
