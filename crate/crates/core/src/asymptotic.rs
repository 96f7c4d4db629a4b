//! Large-array limits of the spectral efficiency.
//!
//! As `N_R` grows the target matrix becomes diagonal, with entry `i` equal to
//! `delta * l_t[i] * Omega` where `delta = sum_k d_k^-nu`. The rate then
//! splits into independent per-stream terms `log2(1 + A_i delta)` with
//! `A_i = (rho / N_T) l_t[i] Omega`. A co-located array has `delta = N_R d^-nu`.
//! Receive correlation never enters.

use std::f64::consts::LN_2;

use crate::channel::{link_distances, spectrum_of};
use crate::correlation::Spectrum;
use crate::error::{Error, Result};
use crate::params::{SystemParams, Topology, UserPosition};

/// `sum_k d_k^-nu`.
pub fn delta_sum(distances: &[f64], nu: f64) -> Result<f64> {
    if let Some(d) = distances.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::domain(format!("distance must be positive, got {d}")));
    }
    Ok(distances.iter().map(|d| d.powf(-nu)).sum())
}

/// Limit of the target matrix diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticDiag {
    entries: Vec<f64>,
}

impl AsymptoticDiag {
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Entry `i` is `delta * l_t[i] * omega`. Pass `N_R` copies of `d` for a
/// co-located array.
pub fn asymptotic_diag(lambda_t: &Spectrum, distances: &[f64], nu: f64, omega: f64) -> Result<AsymptoticDiag> {
    let delta = delta_sum(distances, nu)?;
    Ok(AsymptoticDiag {
        entries: lambda_t.values().iter().map(|l| delta * l * omega).collect(),
    })
}

/// Per-stream gains `A_i = (rho / N_T) l_t[i] Omega`, descending.
pub fn tx_gains(params: &SystemParams) -> Result<Vec<f64>> {
    let lambda_t = spectrum_of(params.theta_t, params.n_t)?;
    let scale = params.snr / params.n_t as f64 * params.omega;
    Ok(lambda_t.values().iter().map(|l| scale * l).collect())
}

/// `beta_i = N_R A_i`, the gains seen by a circular-cell user.
pub fn beta_coefficients(params: &SystemParams) -> Result<Vec<f64>> {
    let n_r = params.n_r as f64;
    Ok(tx_gains(params)?.into_iter().map(|a| n_r * a).collect())
}

fn rate_from_path_gain(params: &SystemParams, gain: f64) -> Result<f64> {
    Ok(tx_gains(params)?.iter().map(|a| (a * gain).ln_1p() / LN_2).sum())
}

/// Co-located array at distance `d`: `sum_i log2(1 + A_i N_R d^-nu)`.
pub fn se_cmimo_asymptotic(params: &SystemParams, d: f64) -> Result<f64> {
    let gain = delta_sum(&[d], params.nu)? * params.n_r as f64;
    rate_from_path_gain(params, gain)
}

/// Distributed array: `sum_i log2(1 + A_i delta)`.
pub fn se_dmimo_asymptotic(params: &SystemParams, distances: &[f64]) -> Result<f64> {
    rate_from_path_gain(params, delta_sum(distances, params.nu)?)
}

/// Which scheme has the larger large-array rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeOrdering {
    /// The co-located array is worse.
    CLess,
    Equal,
    /// The co-located array is better.
    CGreater,
}

impl SchemeOrdering {
    pub fn label(self) -> &'static str {
        match self {
            SchemeOrdering::CLess => "C<D",
            SchemeOrdering::Equal => "C=D",
            SchemeOrdering::CGreater => "C>D",
        }
    }
}

/// Relative tolerance for declaring the two path gains equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Compares `N_R d^-nu` against `delta`. The rates are monotone in the path
/// gain, so this decides the ordering at every SNR and correlation.
pub fn compare_schemes(n_r: usize, d: f64, nu: f64, delta: f64) -> Result<SchemeOrdering> {
    if !(d.is_finite() && d > 0.0 && delta.is_finite() && delta > 0.0 && nu.is_finite() && nu > 0.0 && n_r > 0) {
        return Err(Error::domain("scheme comparison needs positive inputs"));
    }
    let centralized = n_r as f64 * d.powf(-nu);
    let diff = centralized - delta;
    Ok(if diff.abs() <= TIE_TOLERANCE * centralized.max(delta) {
        SchemeOrdering::Equal
    } else if diff < 0.0 {
        SchemeOrdering::CLess
    } else {
        SchemeOrdering::CGreater
    })
}

/// Co-located distance at which both schemes tie: `(N_R / delta)^(1/nu)`.
pub fn crossover_distance(n_r: usize, nu: f64, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0 && nu > 0.0 && n_r > 0) {
        return Err(Error::domain("crossover distance needs positive inputs"));
    }
    Ok((n_r as f64 / delta).powf(1.0 / nu))
}

/// Total path gain `delta` (or `N_R d^-nu`) for a topology with a fixed user.
pub fn path_gain(params: &SystemParams, topology: &Topology) -> Result<f64> {
    if let Topology::Circular {
        user: UserPosition::Random,
        ..
    } = topology
    {
        return Err(Error::domain("a random user has no fixed path gain"));
    }
    delta_sum(&link_distances(topology, params.n_r)?, params.nu)
}

/// Large-array rate for either scheme with a fixed user.
pub fn se_asymptotic(params: &SystemParams, topology: &Topology) -> Result<f64> {
    rate_from_path_gain(params, path_gain(params, topology)?)
}

/// High-SNR form: `sum_i log2 l_t[i] + N_T log2((rho Omega / N_T) g)` with `g`
/// the total path gain of the topology.
pub fn se_high_snr(params: &SystemParams, topology: &Topology) -> Result<f64> {
    let gain = path_gain(params, topology)?;
    let lambda_t = spectrum_of(params.theta_t, params.n_t)?;
    let n_t = params.n_t as f64;
    let log_eigs: f64 = lambda_t.values().iter().map(|l| l.log2()).sum();
    Ok(log_eigs + n_t * (params.snr * params.omega / n_t * gain).log2())
}
