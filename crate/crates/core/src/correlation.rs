//! Exponential antenna correlation, its eigenvalue spectrum and the rank-one
//! coupling matrix of the unitary-independent-unitary channel form.
//!
//! The correlation matrix of an `n`-element array with coefficient `theta` is
//! the symmetric Toeplitz matrix `[theta^|k-l|]`. Its eigenvalues weight the
//! i.i.d. multipath entries; its eigenvectors only rotate the channel and
//! never change a determinant, so most callers ask for eigenvalues only.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Maximum number of cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Convergence threshold on `||offdiag(A)||_F / ||A||_F`.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Dense exponential correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    theta: f64,
    entries: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[k * self.n + l]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

/// Builds the `n x n` matrix with entry `(k, l)` equal to `theta^|k-l|`.
pub fn exp_correlation(theta: f64, n: usize) -> Result<CorrelationMatrix> {
    if !(theta.is_finite() && (0.0..1.0).contains(&theta)) {
        return Err(Error::domain(format!(
            "correlation coefficient must lie in [0, 1), got {theta}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("correlation matrix needs at least one antenna"));
    }
    // Powers are computed by repeated multiplication so that the diagonal
    // band of every row holds bit-identical values.
    let mut powers = Vec::with_capacity(n);
    let mut p = 1.0;
    for _ in 0..n {
        powers.push(p);
        p *= theta;
    }
    let mut entries = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            entries.push(powers[k.abs_diff(l)]);
        }
    }
    Ok(CorrelationMatrix { n, theta, entries })
}

/// Eigenvalues of a correlation matrix, sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Spectrum from arbitrary non-negative values. Values within `1e-12` below
    /// zero are treated as roundoff and clamped.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        for v in &mut values {
            if !v.is_finite() || *v < -1e-12 {
                return Err(Error::domain(format!("eigenvalue {v} is negative")));
            }
            *v = v.max(0.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum { eigenvalues: values })
    }

    /// Spectrum of an uncorrelated array.
    pub fn ones(n: usize) -> Self {
        Spectrum {
            eigenvalues: vec![1.0; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub spectrum: Spectrum,
    /// Column `j` (row-major `n x n`) is the unit eigenvector of the `j`-th
    /// entry of `spectrum`.
    pub eigenvectors: Vec<f64>,
}

/// Eigenvalues of a correlation matrix.
pub fn eig_sym(m: &CorrelationMatrix) -> Result<Spectrum> {
    let (values, _) = jacobi(m.as_slice(), m.dim(), false)?;
    Spectrum::from_values(values)
}

/// Eigenvalues and eigenvectors of a correlation matrix.
pub fn eig_sym_with_vectors(m: &CorrelationMatrix) -> Result<SymmetricEigen> {
    symmetric_eigen(m.as_slice(), m.dim())
}

/// Eigenvalues and eigenvectors of any real symmetric row-major matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    let (values, vectors) = jacobi(a, n, true)?;
    let vectors = vectors.expect("eigenvectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut sorted = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            sorted[r * n + dst] = vectors[r * n + src];
        }
    }
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    Ok(SymmetricEigen {
        spectrum: Spectrum { eigenvalues },
        eigenvectors: sorted,
    })
}

/// Cyclic Jacobi rotations. Returns eigenvalues in diagonal order and, if
/// requested, the accumulated rotation matrix.
fn jacobi(a: &[f64], n: usize, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if a.len() != n * n {
        return Err(Error::Dimension(format!("{} entries for a {n}x{n} matrix", a.len())));
    }
    let mut m = a.to_vec();
    let mut v = want_vectors.then(|| {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        id
    });

    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_TOLERANCE * total;

    for _sweep in 0..=JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * m[p * n + q] * m[p * n + q];
            }
        }
        if off.sqrt() <= threshold {
            let values = (0..n).map(|i| m[i * n + i]).collect();
            return Ok((values, v));
        }
        if _sweep == JACOBI_MAX_SWEEPS {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // A <- J^T A J, touching rows/columns p and q only.
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence {
        routine: "cyclic Jacobi eigensolver",
        iterations: JACOBI_MAX_SWEEPS,
    })
}

/// Limiting eigenvalue density of large exponential correlation matrices:
/// `(1 - theta^2) / (1 - 2 theta cos(2 pi x) + theta^2)` for `x` in `[0, 1]`.
///
/// The maximum, at `x = 0`, is `(1 + theta) / (1 - theta)`, which bounds
/// the spectrum of every finite-size matrix as well.
pub fn szego_eigen_density(theta: f64, x: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&theta));
    debug_assert!((0.0..=1.0).contains(&x));
    (1.0 - theta * theta) / (1.0 - 2.0 * theta * (TAU * x).cos() + theta * theta)
}

/// Upper bound `(1 + theta) / (1 - theta)` on the eigenvalues.
pub fn max_eigenvalue_bound(theta: f64) -> f64 {
    (1.0 + theta) / (1.0 - theta)
}

/// Distribution function of the limiting density: the fraction of
/// `x in [0, 1]` with `szego_eigen_density(theta, x) <= t`.
pub fn szego_cdf(theta: f64, t: f64) -> f64 {
    if theta == 0.0 {
        return if t >= 1.0 { 1.0 } else { 0.0 };
    }
    let lo = (1.0 - theta) / (1.0 + theta);
    let hi = max_eigenvalue_bound(theta);
    if t <= lo {
        return 0.0;
    }
    if t >= hi {
        return 1.0;
    }
    // The density decreases on [0, 1/2]; solve density(x0) = t there.
    let cos = (1.0 + theta * theta - (1.0 - theta * theta) / t) / (2.0 * theta);
    let x0 = cos.clamp(-1.0, 1.0).acos() / (2.0 * PI);
    1.0 - 2.0 * x0
}

/// Rank-one coupling matrix `g[k][i] = sqrt(lambda_r[k] * lambda_t[i])`.
///
/// Stored as its two factors; entries are formed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    sqrt_lambda_r: Vec<f64>,
    sqrt_lambda_t: Vec<f64>,
}

impl CouplingMatrix {
    /// Number of receive antennas.
    pub fn rows(&self) -> usize {
        self.sqrt_lambda_r.len()
    }

    /// Number of transmit antennas.
    pub fn cols(&self) -> usize {
        self.sqrt_lambda_t.len()
    }

    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.sqrt_lambda_r[k] * self.sqrt_lambda_t[i]
    }

    pub fn rx_factor(&self) -> &[f64] {
        &self.sqrt_lambda_r
    }

    pub fn tx_factor(&self) -> &[f64] {
        &self.sqrt_lambda_t
    }

    /// Row-major `rows x cols` entries.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for &r in &self.sqrt_lambda_r {
            out.extend(self.sqrt_lambda_t.iter().map(|&t| r * t));
        }
        out
    }

    /// Sum of squared entries.
    pub fn energy(&self) -> f64 {
        let r: f64 = self.sqrt_lambda_r.iter().map(|x| x * x).sum();
        let t: f64 = self.sqrt_lambda_t.iter().map(|x| x * x).sum();
        r * t
    }
}

/// Coupling matrix from receive and transmit spectra. Distributed arrays pass
/// [`Spectrum::ones`] on the receive side.
pub fn coupling_matrix(lambda_r: &Spectrum, lambda_t: &Spectrum) -> Result<CouplingMatrix> {
    let check = |s: &Spectrum| -> Result<Vec<f64>> {
        s.values()
            .iter()
            .map(|&x| {
                if x < 0.0 || !x.is_finite() {
                    Err(Error::domain(format!("eigenvalue {x} is negative")))
                } else {
                    Ok(x.sqrt())
                }
            })
            .collect()
    };
    Ok(CouplingMatrix {
        sqrt_lambda_r: check(lambda_r)?,
        sqrt_lambda_t: check(lambda_t)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_correlation_is_identity() {
        let m = exp_correlation(0.0, 4).unwrap();
        for k in 0..4 {
            for l in 0..4 {
                assert_eq!(m.get(k, l), if k == l { 1.0 } else { 0.0 });
            }
        }
        let s = eig_sym(&m).unwrap();
        assert!(s.values().iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn entries_are_powers_of_theta() {
        let theta = (-0.25f64).exp();
        let m = exp_correlation(theta, 2).unwrap();
        assert!((m.get(0, 1) - 0.778801).abs() < 1e-6);
        assert_eq!(m.get(1, 0), m.get(0, 1));
        let m = exp_correlation(0.5, 3).unwrap();
        assert_eq!(m.get(0, 2), 0.25);
    }

    #[test]
    fn rejects_unit_correlation() {
        assert!(exp_correlation(1.0, 3).is_err());
        assert!(exp_correlation(-0.1, 3).is_err());
        assert!(exp_correlation(0.5, 0).is_err());
    }

    #[test]
    fn two_by_two_eigenvalues_are_one_plus_minus_theta() {
        let s = eig_sym(&exp_correlation(0.5, 2).unwrap()).unwrap();
        assert!((s.values()[0] - 1.5).abs() < 1e-14);
        assert!((s.values()[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn spectrum_trace_and_bound() {
        let s = eig_sym(&exp_correlation(0.7, 8).unwrap()).unwrap();
        assert!((s.sum() - 8.0).abs() < 1e-10 * 8.0);
        assert!(s.max() < max_eigenvalue_bound(0.7));
        assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let m = exp_correlation(0.8, 6).unwrap();
        let e = eig_sym_with_vectors(&m).unwrap();
        let n = 6;
        let lam = e.spectrum.values();
        let v = &e.eigenvectors;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let back: f64 = (0..n).map(|j| v[r * n + j] * lam[j] * v[c * n + j]).sum();
                worst = worst.max((back - m.get(r, c)).abs());
            }
        }
        assert!(worst < 1e-9, "residual {worst}");
    }

    #[test]
    fn szego_density_values() {
        assert_eq!(szego_eigen_density(0.0, 0.3), 1.0);
        assert!((szego_eigen_density(0.5, 0.0) - 3.0).abs() < 1e-15);
        assert!((szego_eigen_density(0.5, 0.0) - max_eigenvalue_bound(0.5)).abs() < 1e-15);
    }

    #[test]
    fn szego_density_integrates_to_one() {
        // Periodic integrand: trapezoid rule converges geometrically.
        for theta in [0.0, 0.3, 0.78, 0.95] {
            let n = 4096;
            let integral: f64 = (0..n)
                .map(|j| szego_eigen_density(theta, j as f64 / n as f64))
                .sum::<f64>()
                / n as f64;
            assert!((integral - 1.0).abs() < 1e-8, "theta={theta}: {integral}");
        }
    }

    #[test]
    fn szego_cdf_is_monotone_distribution() {
        let theta = 0.6;
        let lo = (1.0 - theta) / (1.0 + theta);
        let hi = max_eigenvalue_bound(theta);
        assert_eq!(szego_cdf(theta, lo), 0.0);
        assert_eq!(szego_cdf(theta, hi), 1.0);
        // At t = 1 the level set is cos(2 pi x) = theta.
        let x0 = theta.acos() / TAU;
        assert!((szego_cdf(theta, 1.0) - (1.0 - 2.0 * x0)).abs() < 1e-14);
        let mut prev = 0.0;
        for j in 0..=100 {
            let t = lo + (hi - lo) * j as f64 / 100.0;
            let f = szego_cdf(theta, t);
            assert!(f >= prev);
            prev = f;
        }
    }

    #[test]
    fn coupling_matrix_entries() {
        let l = Spectrum::from_values(vec![1.5, 0.5]).unwrap();
        let g = coupling_matrix(&l, &l).unwrap();
        let expect = [1.5, 0.866, 0.866, 0.5];
        for (a, b) in g.to_dense().iter().zip(expect) {
            assert!((a - b).abs() < 5e-4);
        }
        assert!((g.energy() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn distributed_coupling_rows_repeat_tx_factor() {
        let lt = eig_sym(&exp_correlation(0.4, 3).unwrap()).unwrap();
        let g = coupling_matrix(&Spectrum::ones(5), &lt).unwrap();
        for k in 0..5 {
            for i in 0..3 {
                assert_eq!(g.get(k, i), lt.values()[i].sqrt());
            }
        }
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        assert!(Spectrum::from_values(vec![1.0, -0.1]).is_err());
        assert!(Spectrum::from_values(vec![1.0, -1e-14]).is_ok());
    }
}
