//! Channel realizations, the reduced `N_T x N_T` target matrix and
//! instantaneous spectral efficiency.
//!
//! The full channel is `H = D^(1/2) U_R (G o H_hat) U_T^H`, with `D` the
//! diagonal of path loss times shadowing, `G` the rank-one coupling matrix and
//! `H_hat` i.i.d. `CN(0, 1)`. The unitary factors drop out of
//! `det(I + rho/N_T H^H H)`, so the hot path works with
//!
//! ```text
//! M[i][j] = sqrt(l_t[i] l_t[j]) * sum_k l_r[k] D[k] conj(H_hat[k][i]) H_hat[k][j]
//! ```
//!
//! in `O(N_R N_T^2)` and never forms `H`. [`spectral_efficiency_direct`]
//! assembles `H` explicitly and serves as a cross-check at small sizes.

use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64;

use crate::circular::{sample_user_radius, user_antenna_distances, RingGeometry};
use crate::correlation::{coupling_matrix, eig_sym, eig_sym_with_vectors, exp_correlation, CouplingMatrix, Spectrum};
use crate::error::{Error, Result};
use crate::linalg::{ln_det_hpd, CMatrix};
use crate::params::{Scenario, Scheme, Topology, UserPosition, RING_GUARD};
use crate::stochastic::{sample_cscg, RandomStream, ShadowingDraw, ShadowingSampler};

/// Diagonal of path loss times shadowing, one entry per receive antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleDiag {
    gains: Vec<f64>,
}

impl LargeScaleDiag {
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// Distance from the user to each receive antenna.
///
/// A circular topology must carry a fixed user position; random users are
/// placed by [`ChannelModel::realize`].
pub fn link_distances(topology: &Topology, n_r: usize) -> Result<Vec<f64>> {
    match topology {
        Topology::Centralized { d } => Ok(vec![*d; n_r]),
        Topology::DistributedExplicit { distances } => {
            if distances.len() != n_r {
                return Err(Error::Dimension(format!(
                    "{} distances for {n_r} receive antennas",
                    distances.len()
                )));
            }
            Ok(distances.clone())
        }
        Topology::Circular { r_c, r_a, user } => match user {
            UserPosition::Fixed { r_u, phi } => {
                let g = RingGeometry::new(*r_c, *r_a, *r_u, *phi)?;
                user_antenna_distances(&g, n_r)
            }
            UserPosition::Random => Err(Error::domain("a random user position has no fixed link distances")),
        },
    }
}

/// Builds `D` from link distances and a shadowing draw, `gains[k] = d_k^-nu * phi_k`.
///
/// A draw of length one is shared by every link.
pub fn large_scale_diag(distances: &[f64], nu: f64, shadowing: &ShadowingDraw) -> Result<LargeScaleDiag> {
    if shadowing.len() != 1 && shadowing.len() != distances.len() {
        return Err(Error::Dimension(format!(
            "{} shadowing values for {} links",
            shadowing.len(),
            distances.len()
        )));
    }
    let gains = distances
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if !(d.is_finite() && d > 0.0) {
                Err(Error::domain(format!("distance must be positive, got {d}")))
            } else {
                Ok(d.powf(-nu) * shadowing.gain(k))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LargeScaleDiag { gains })
}

/// One draw of the channel: multipath, shadowing and the derived diagonal.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `N_R x N_T` i.i.d. unit-power complex Gaussian entries.
    pub h_hat: CMatrix,
    pub shadowing: ShadowingDraw,
    pub large_scale: LargeScaleDiag,
    pub coupling: CouplingMatrix,
    pub scheme: Scheme,
}

/// Hermitian positive-semidefinite `N_T x N_T` matrix whose log-determinant
/// gives the spectral efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMatrix {
    m: CMatrix,
}

impl TargetMatrix {
    /// Wraps a matrix after checking it is square and Hermitian to within
    /// `1e-12` of its largest entry.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Dimension(format!(
                "target matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if m.hermitian_defect() > 1e-12 * m.max_abs().max(1.0) {
            return Err(Error::domain("target matrix is not Hermitian"));
        }
        Ok(TargetMatrix { m })
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    /// Largest off-diagonal magnitude over the smallest diagonal entry.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let n = self.dim();
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off.max(self.m[(i, j)].norm());
                }
            }
        }
        let min_diag = self.diagonal().into_iter().fold(f64::INFINITY, f64::min);
        off / min_diag
    }
}

/// Reduced Gram matrix of a realization.
pub fn target_matrix(real: &ChannelRealization) -> Result<TargetMatrix> {
    let h = &real.h_hat;
    let (n_r, n_t) = (h.rows(), h.cols());
    let g = &real.coupling;
    if g.rows() != n_r || g.cols() != n_t || real.large_scale.len() != n_r {
        return Err(Error::Dimension(format!(
            "channel is {n_r}x{n_t}, coupling {}x{}, large-scale diagonal {}",
            g.rows(),
            g.cols(),
            real.large_scale.len()
        )));
    }
    let weights: Vec<f64> = g
        .rx_factor()
        .iter()
        .zip(real.large_scale.gains())
        .map(|(r, d)| r * r * d)
        .collect();
    let tx = g.tx_factor();

    let mut m = CMatrix::zeros(n_t, n_t);
    let mut acc = vec![Complex64::new(0.0, 0.0); n_t * n_t];
    for (k, &w) in weights.iter().enumerate() {
        let row = h.row(k);
        for i in 0..n_t {
            let hi = row[i].conj() * w;
            for j in i..n_t {
                acc[i * n_t + j] += hi * row[j];
            }
        }
    }
    for i in 0..n_t {
        for j in i..n_t {
            let v = acc[i * n_t + j] * (tx[i] * tx[j]);
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m[(i, i)].im = 0.0;
    }
    Ok(TargetMatrix { m })
}

/// `log2 det(I + c A)` for Hermitian PSD `A`, clamped at zero.
fn log2_det_shifted(a: &CMatrix, c: f64) -> Result<f64> {
    let n = a.rows();
    let mut shifted = a.scale(c);
    for i in 0..n {
        shifted[(i, i)] += Complex64::new(1.0, 0.0);
    }
    Ok((ln_det_hpd(&shifted)? / LN_2).max(0.0))
}

/// Spectral efficiency `log2 det(I + (snr / n_t) M)` in bit/s/Hz.
pub fn spectral_efficiency(m: &TargetMatrix, snr: f64, n_t: usize) -> Result<f64> {
    if m.dim() != n_t {
        return Err(Error::Dimension(format!(
            "target matrix is {0}x{0} but n_t = {n_t}",
            m.dim()
        )));
    }
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::domain(format!("snr must be positive, got {snr}")));
    }
    log2_det_shifted(m.matrix(), snr / n_t as f64)
}

/// Transmit and receive eigenvector matrices of the correlation model.
#[derive(Debug, Clone)]
pub struct Unitaries {
    /// `N_T x N_T`.
    pub u_t: CMatrix,
    /// `N_R x N_R`; ignored for distributed arrays.
    pub u_r: Option<CMatrix>,
}

/// Full `N_R x N_T` channel matrix of a realization.
pub fn channel_matrix(real: &ChannelRealization, unitaries: &Unitaries) -> Result<CMatrix> {
    let h = &real.h_hat;
    let (n_r, n_t) = (h.rows(), h.cols());
    let g = &real.coupling;
    if g.rows() != n_r || g.cols() != n_t || unitaries.u_t.rows() != n_t {
        return Err(Error::Dimension("unitary factors do not match the channel".into()));
    }
    let weighted = CMatrix::from_fn(n_r, n_t, |k, i| h[(k, i)] * g.get(k, i));
    let mut h0 = weighted.matmul(&unitaries.u_t.adjoint())?;
    if real.scheme == Scheme::Centralized {
        if let Some(u_r) = &unitaries.u_r {
            h0 = u_r.matmul(&h0)?;
        }
    }
    let gains = real.large_scale.gains();
    Ok(CMatrix::from_fn(n_r, n_t, |k, i| h0[(k, i)] * gains[k].sqrt()))
}

/// Spectral efficiency from the explicitly assembled channel,
/// `log2 det(I + (snr / N_T) H^H H)`.
pub fn spectral_efficiency_direct(real: &ChannelRealization, snr: f64, unitaries: &Unitaries) -> Result<f64> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::domain(format!("snr must be positive, got {snr}")));
    }
    let h = channel_matrix(real, unitaries)?;
    log2_det_shifted(&h.gram(), snr / h.cols() as f64)
}

/// Everything about a scenario that stays fixed across trials: spectra,
/// coupling matrix, shadowing samplers and, for fixed users, distances.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    scenario: Scenario,
    lambda_t: Spectrum,
    lambda_r: Spectrum,
    coupling: CouplingMatrix,
    shadowing: ShadowingSampler,
    distances: Option<Vec<f64>>,
}

impl ChannelModel {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let p = &scenario.params;
        let scheme = scenario.scheme();
        let lambda_t = spectrum_of(p.theta_t, p.n_t)?;
        let lambda_r = match scheme {
            Scheme::Centralized => spectrum_of(p.theta_r, p.n_r)?,
            Scheme::Distributed => Spectrum::ones(p.n_r),
        };
        let coupling = coupling_matrix(&lambda_r, &lambda_t)?;
        let shadowing = match scheme {
            Scheme::Centralized => ShadowingSampler::new(&p.alpha[..1], p.omega)?,
            Scheme::Distributed => ShadowingSampler::new(&p.alpha, p.omega)?,
        };
        let distances = match &scenario.topology {
            Topology::Circular {
                user: UserPosition::Random,
                ..
            } => None,
            topo => Some(link_distances(topo, p.n_r)?),
        };
        Ok(ChannelModel {
            scenario: scenario.clone(),
            lambda_t,
            lambda_r,
            coupling,
            shadowing,
            distances,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn lambda_t(&self) -> &Spectrum {
        &self.lambda_t
    }

    pub fn lambda_r(&self) -> &Spectrum {
        &self.lambda_r
    }

    /// Link distances for a fixed user, `None` when the user is random.
    pub fn distances(&self) -> Option<&[f64]> {
        self.distances.as_deref()
    }

    /// Draws one realization. The stream is consumed in a fixed order: user
    /// position (random users only), shadowing, then multipath row by row.
    pub fn realize(&self, stream: &mut RandomStream) -> Result<ChannelRealization> {
        let p = &self.scenario.params;
        let scheme = self.scenario.scheme();
        let random_distances;
        let distances = match &self.distances {
            Some(d) => d.as_slice(),
            None => {
                random_distances = self.random_user_distances(stream)?;
                random_distances.as_slice()
            }
        };
        let links = match scheme {
            Scheme::Centralized => 1,
            Scheme::Distributed => p.n_r,
        };
        let shadowing = self.shadowing.draw(stream, links);
        let h_hat = sample_cscg(stream, p.n_r, p.n_t);
        let large_scale = large_scale_diag(distances, p.nu, &shadowing)?;
        Ok(ChannelRealization {
            h_hat,
            shadowing,
            large_scale,
            coupling: self.coupling.clone(),
            scheme,
        })
    }

    fn random_user_distances(&self, stream: &mut RandomStream) -> Result<Vec<f64>> {
        let Topology::Circular { r_c, r_a, .. } = self.scenario.topology else {
            unreachable!("only circular topologies have random users");
        };
        let r_u = loop {
            let r = sample_user_radius(stream, r_c)?;
            if r_a == 0.0 || (r - r_a).abs() > RING_GUARD * r_c {
                break r;
            }
        };
        let phi = TAU * stream.uniform();
        let g = RingGeometry::new(r_c, r_a, r_u, phi)?;
        user_antenna_distances(&g, self.scenario.params.n_r)
    }

    /// Eigenvector matrices of the transmit and (co-located only) receive
    /// correlation.
    pub fn correlation_unitaries(&self) -> Result<Unitaries> {
        let p = &self.scenario.params;
        let to_complex = |v: Vec<f64>, n: usize| CMatrix::from_real(n, n, &v);
        let u_t = to_complex(
            eig_sym_with_vectors(&exp_correlation(p.theta_t, p.n_t)?)?.eigenvectors,
            p.n_t,
        )?;
        let u_r = match self.scenario.scheme() {
            Scheme::Centralized => Some(to_complex(
                eig_sym_with_vectors(&exp_correlation(p.theta_r, p.n_r)?)?.eigenvectors,
                p.n_r,
            )?),
            Scheme::Distributed => None,
        };
        Ok(Unitaries { u_t, u_r })
    }

    /// Spectral efficiency of one fresh realization.
    pub fn sample_spectral_efficiency(&self, stream: &mut RandomStream) -> Result<f64> {
        let real = self.realize(stream)?;
        let m = target_matrix(&real)?;
        spectral_efficiency(&m, self.scenario.params.snr, self.scenario.params.n_t)
    }
}

/// Eigenvalues of the exponential correlation matrix; the identity is
/// short-circuited so large uncorrelated arrays skip the eigensolver.
pub fn spectrum_of(theta: f64, n: usize) -> Result<Spectrum> {
    if theta == 0.0 {
        Ok(Spectrum::ones(n))
    } else {
        eig_sym(&exp_correlation(theta, n)?)
    }
}
