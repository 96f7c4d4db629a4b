//! System parameters and link topologies shared by every other module.
//!
//! All quantities are linear and dimensionless: SNR and shadowing power are
//! power ratios, distances are normalized by a reference length. Unit
//! conversion from dB and metres happens in the CLI.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative distance (w.r.t. the cell radius) inside which a user is treated
/// as sitting on the antenna ring.
pub const RING_GUARD: f64 = 1e-9;

/// Parameters of one point-to-point uplink.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    /// Number of transmit antennas at the user.
    pub n_t: usize,
    /// Number of receive antennas at the base station.
    pub n_r: usize,
    /// Average transmit SNR, linear.
    pub snr: f64,
    /// Path-loss exponent.
    pub nu: f64,
    /// Mean shadowing power, linear.
    pub omega: f64,
    /// Gamma shadowing shape, either one value for all links or one per
    /// receive antenna.
    pub alpha: Vec<f64>,
    /// Transmit-side exponential correlation coefficient.
    pub theta_t: f64,
    /// Receive-side correlation coefficient. Only co-located arrays use it.
    pub theta_r: f64,
}

impl SystemParams {
    /// Shadowing shape of the link to receive antenna `k`.
    pub fn alpha_for(&self, k: usize) -> f64 {
        if self.alpha.len() == 1 {
            self.alpha[0]
        } else {
            self.alpha[k]
        }
    }
}

/// Where the user sits in a circular cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum UserPosition {
    /// Polar coordinates relative to the cell center.
    Fixed { r_u: f64, phi: f64 },
    /// Uniform over the disc; drawn afresh for every Monte Carlo trial.
    Random,
}

/// Geometry of the link between the user and the receive antennas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Topology {
    /// Co-located receive array at distance `d`.
    Centralized { d: f64 },
    /// Receive antennas at explicit distances from the user, one per antenna.
    DistributedExplicit { distances: Vec<f64> },
    /// Receive antennas evenly spaced on a ring of radius `r_a` inside a cell
    /// of radius `r_c`. A ring of radius zero is a co-located array at the
    /// cell center and is treated as centralized.
    Circular { r_c: f64, r_a: f64, user: UserPosition },
}

/// Centralized (one path loss, one shadowing gain, correlated receive
/// array) or distributed (per-antenna path loss and shadowing, no receive
/// correlation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scheme {
    Centralized,
    Distributed,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Centralized => "C-MIMO",
            Scheme::Distributed => "D-MIMO",
        }
    }
}

impl Topology {
    pub fn scheme(&self) -> Scheme {
        match self {
            Topology::Centralized { .. } => Scheme::Centralized,
            Topology::DistributedExplicit { .. } => Scheme::Distributed,
            Topology::Circular { r_a, .. } if *r_a == 0.0 => Scheme::Centralized,
            Topology::Circular { .. } => Scheme::Distributed,
        }
    }
}

/// A validated `(SystemParams, Topology)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub params: SystemParams,
    pub topology: Topology,
}

impl Scenario {
    pub fn scheme(&self) -> Scheme {
        self.topology.scheme()
    }

    /// Same system with a different topology, re-validated.
    pub fn with_topology(&self, topology: Topology) -> Result<Scenario> {
        validate(self.params.clone(), topology)
    }

    /// Same topology with modified parameters, re-validated.
    pub fn with_params(&self, f: impl FnOnce(&mut SystemParams)) -> Result<Scenario> {
        let mut params = self.params.clone();
        f(&mut params);
        validate(params, self.topology.clone())
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn unit_interval(x: f64) -> bool {
    x.is_finite() && (0.0..1.0).contains(&x)
}

/// Checks every invariant and returns the pair unchanged when all hold.
///
/// On failure the error lists every violated invariant, not just the first.
pub fn validate(params: SystemParams, topology: Topology) -> Result<Scenario> {
    let mut violations = Vec::new();
    let p = &params;

    if p.n_t == 0 {
        violations.push("number of transmit antennas must be at least 1".to_string());
    }
    if p.n_r <= p.n_t {
        violations.push(format!(
            "receive antennas ({}) must outnumber transmit antennas ({})",
            p.n_r, p.n_t
        ));
    }
    if !positive(p.snr) {
        violations.push(format!("snr must be positive, got {}", p.snr));
    }
    if !(p.nu.is_finite() && p.nu > 2.0) {
        violations.push(format!("path-loss exponent must exceed 2, got {}", p.nu));
    }
    if !positive(p.omega) {
        violations.push(format!("shadowing power must be positive, got {}", p.omega));
    }
    if p.alpha.len() != 1 && p.alpha.len() != p.n_r {
        violations.push(format!(
            "shadowing shape must have length 1 or {}, got {}",
            p.n_r,
            p.alpha.len()
        ));
    }
    if let Some(a) = p.alpha.iter().find(|a| !(a.is_finite() && **a > 0.5)) {
        violations.push(format!("shadowing shape must exceed 0.5, got {a}"));
    }
    if !unit_interval(p.theta_t) {
        violations.push(format!("theta_t must lie in [0, 1), got {}", p.theta_t));
    }
    if !unit_interval(p.theta_r) {
        violations.push(format!("theta_r must lie in [0, 1), got {}", p.theta_r));
    }

    match &topology {
        Topology::Centralized { d } => {
            if !positive(*d) {
                violations.push(format!("distance must be positive, got {d}"));
            }
        }
        Topology::DistributedExplicit { distances } => {
            if distances.len() != p.n_r {
                violations.push(format!("expected {} antenna distances, got {}", p.n_r, distances.len()));
            }
            if let Some((k, d)) = distances.iter().enumerate().find(|(_, d)| !positive(**d)) {
                violations.push(format!("distance {} must be positive, got {d}", k + 1));
            }
        }
        Topology::Circular { r_c, r_a, user } => {
            if !positive(*r_c) {
                violations.push(format!("cell radius must be positive, got {r_c}"));
            }
            if !(r_a.is_finite() && *r_a >= 0.0) {
                violations.push(format!("ring radius must be non-negative, got {r_a}"));
            } else if r_a >= r_c {
                violations.push(format!("ring radius must be inside cell ({r_a} >= {r_c})"));
            }
            if let UserPosition::Fixed { r_u, phi } = user {
                if !positive(*r_u) || r_u > r_c {
                    violations.push(format!("user radius must lie in (0, {r_c}], got {r_u}"));
                } else if *r_a > 0.0 && (r_u - r_a).abs() <= RING_GUARD * r_c {
                    violations.push("user sits on the antenna ring".to_string());
                }
                if !(phi.is_finite() && (0.0..TAU).contains(phi)) {
                    violations.push(format!("user angle must lie in [0, 2pi), got {phi}"));
                }
            }
        }
    }

    if violations.is_empty() {
        Ok(Scenario { params, topology })
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Correlation coefficient `exp(-spacing / coherence)` from a spacing ratio.
pub fn theta_from_spacing(spacing_ratio: f64) -> f64 {
    (-spacing_ratio).exp()
}
