//! Seeded Monte Carlo estimation.
//!
//! Trial `t` of a run with seed `s` draws from `RandomStream::new(s, t)`.
//! Trials run on the current rayon pool; results are collected by index and
//! reduced in trial order with compensated summation, so the estimate does
//! not depend on the number of worker threads.

pub mod sweep;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotic::asymptotic_diag;
use crate::channel::{target_matrix, ChannelModel};
use crate::error::{Error, Result};
use crate::params::{Scenario, Topology, UserPosition};
use crate::stochastic::{GammaSampler, RandomStream};

pub use sweep::{sweep, Cell, Reference, SweepAxis, SweepOptions, SweepTable};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Mean spectral efficiency with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SEEstimate {
    /// Bits/s/Hz.
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; zero for a single trial.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl SEEstimate {
    /// Summary of per-trial samples, reduced in the given order.
    pub fn from_samples(samples: &[f64], seed: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("at least one trial is required"));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().copied().collect::<CompensatedSum>().total() / n;
        let std_error = if samples.len() > 1 {
            let ss = samples
                .iter()
                .map(|x| (x - mean).powi(2))
                .collect::<CompensatedSum>()
                .total();
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Ok(SEEstimate {
            mean,
            std_error,
            trials: samples.len() as u64,
            seed,
        })
    }
}

/// Evaluates `f` once per trial on that trial's stream, in parallel, and
/// returns the results in trial order. The first failing trial (by index)
/// is reported.
pub fn map_trials<T, F>(trials: u64, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RandomStream) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = (0..trials)
        .into_par_iter()
        .map(|t| f(&mut RandomStream::new(seed, t)))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(t, r)| {
            r.map_err(|e| Error::Trial {
                trial: t,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Spectral efficiency averaged over `trials` independent realizations.
pub fn run_trials(scenario: &Scenario, trials: u64, seed: u64) -> Result<SEEstimate> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let model = ChannelModel::new(scenario)?;
    let samples = map_trials(trials, seed, |s| model.sample_spectral_efficiency(s))?;
    SEEstimate::from_samples(&samples, seed)
}

/// How close the target matrix is to its diagonal limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetMatrixEstimate {
    /// `max_{i != j} |M_ij| / min_i M_ii` for each realization, in trial order.
    pub off_diagonal_ratios: Vec<f64>,
    pub median_off_diagonal_ratio: f64,
    /// Diagonal of `M` averaged over realizations.
    pub mean_diagonal: Vec<f64>,
    /// Large-array limit `delta * l_t[i] * Omega`; absent for a random user.
    pub limit_diagonal: Option<Vec<f64>>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Draws `trials` target matrices and summarizes their diagonal dominance.
pub fn estimate_target_matrix(scenario: &Scenario, trials: u64, seed: u64) -> Result<TargetMatrixEstimate> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let model = ChannelModel::new(scenario)?;
    let per_trial = map_trials(trials, seed, |s| {
        let m = target_matrix(&model.realize(s)?)?;
        Ok((m.off_diagonal_ratio(), m.diagonal()))
    })?;
    let n_t = scenario.params.n_t;
    let mean_diagonal = (0..n_t)
        .map(|i| per_trial.iter().map(|(_, d)| d[i]).collect::<CompensatedSum>().total() / trials as f64)
        .collect();
    let off_diagonal_ratios: Vec<f64> = per_trial.iter().map(|(r, _)| *r).collect();
    let limit_diagonal = match &scenario.topology {
        Topology::Circular {
            user: UserPosition::Random,
            ..
        } => None,
        _ => {
            let distances = model.distances().expect("fixed user has distances");
            let p = &scenario.params;
            Some(
                asymptotic_diag(model.lambda_t(), distances, p.nu, p.omega)?
                    .entries()
                    .to_vec(),
            )
        }
    };
    Ok(TargetMatrixEstimate {
        median_off_diagonal_ratio: median(&off_diagonal_ratios),
        off_diagonal_ratios,
        mean_diagonal,
        limit_diagonal,
    })
}

/// Law of the entries `p_k`, `q_k` in the weighted law-of-large-numbers check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryDistribution {
    /// `CN(0, 1)`, so `E|p|^2 = 1`.
    Cscg,
    /// `sqrt(phi) h` with `phi ~ Gamma(alpha, omega / alpha)` and `h ~ CN(0, 1)`,
    /// so `E|p|^2 = omega`.
    ShadowedCscg { alpha: f64, omega: f64 },
}

impl EntryDistribution {
    fn power(&self) -> f64 {
        match self {
            EntryDistribution::Cscg => 1.0,
            EntryDistribution::ShadowedCscg { omega, .. } => *omega,
        }
    }
}

/// Outcome of one weighted law-of-large-numbers draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LlnCheck {
    /// `(1/n) p^H p - (1/n) sum_k a_k E|p_k|^2`.
    pub self_product_error: f64,
    /// `|(1/n) p^H q|` for independent `p`, `q` with the same weights.
    pub cross_product_value: f64,
}

/// Draws weighted vectors `p_k = sqrt(a_k) x_k` and `q_k = sqrt(a_k) y_k` and
/// measures how far their normalized inner products are from the limits of
/// the weighted law of large numbers.
///
/// Every weight must satisfy `a_k^2 <= bound`.
pub fn lln_weighted_check(weights: &[f64], bound: f64, dist: EntryDistribution, seed: u64) -> Result<LlnCheck> {
    if weights.is_empty() {
        return Err(Error::domain("no weights supplied"));
    }
    if !(bound.is_finite() && bound > 0.0) {
        return Err(Error::domain(format!(
            "weight bound must be positive and finite, got {bound}"
        )));
    }
    if let Some(a) = weights
        .iter()
        .find(|a| !(a.is_finite() && **a >= 0.0 && *a * *a <= bound))
    {
        return Err(Error::domain(format!("weight {a} violates the bound a^2 <= {bound}")));
    }
    let shadow = match dist {
        EntryDistribution::Cscg => None,
        EntryDistribution::ShadowedCscg { alpha, omega } => Some(GammaSampler::new(alpha, omega / alpha)?),
    };
    let mut stream = RandomStream::new(seed, 0);
    let entry = |s: &mut RandomStream| -> Complex64 {
        let h = s.cscg();
        match &shadow {
            Some(g) => h * g.sample(s).sqrt(),
            None => h,
        }
    };
    let n = weights.len() as f64;
    let mut self_sum = CompensatedSum::default();
    let mut mean_sum = CompensatedSum::default();
    let mut cross_re = CompensatedSum::default();
    let mut cross_im = CompensatedSum::default();
    let mu = dist.power();
    for &a in weights {
        let x = entry(&mut stream);
        let y = entry(&mut stream);
        self_sum.add(a * x.norm_sqr());
        mean_sum.add(a * mu);
        let c = x.conj() * y * a;
        cross_re.add(c.re);
        cross_im.add(c.im);
    }
    Ok(LlnCheck {
        self_product_error: (self_sum.total() - mean_sum.total()) / n,
        cross_product_value: Complex64::new(cross_re.total(), cross_im.total()).norm() / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{theta_from_spacing, validate, SystemParams};

    fn scenario(n_r: usize) -> Scenario {
        let p = SystemParams {
            n_t: 2,
            n_r,
            snr: 10.0,
            nu: 3.7,
            omega: 1.0,
            alpha: vec![10.0],
            theta_t: theta_from_spacing(0.25),
            theta_r: theta_from_spacing(0.75),
        };
        validate(p, Topology::Centralized { d: 0.5 }).unwrap()
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.total() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn single_trial_is_deterministic() {
        let s = scenario(20);
        let a = run_trials(&s, 1, 42).unwrap();
        let b = run_trials(&s, 1, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.std_error, 0.0);
        assert_eq!(a.trials, 1);
    }

    #[test]
    fn worker_count_does_not_change_estimate() {
        let s = scenario(20);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_trials(&s, 257, 3)).unwrap();
        let b = four.install(|| run_trials(&s, 257, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_trials(&scenario(20), 0, 0).is_err());
    }

    #[test]
    fn failing_trial_reports_index() {
        let err = map_trials(10, 0, |s| {
            if s.stream_id() >= 6 {
                Err(Error::NotPositiveSemidefinite)
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Trial { trial: 6, .. }));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn std_error_halves_with_four_times_trials() {
        let s = scenario(20);
        let a = run_trials(&s, 500, 1).unwrap();
        let b = run_trials(&s, 2000, 2).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn lln_rejects_unbounded_weights() {
        assert!(lln_weighted_check(&[1.0, 5.0], 4.0, EntryDistribution::Cscg, 0).is_err());
        assert!(lln_weighted_check(&[1.0, f64::INFINITY], 4.0, EntryDistribution::Cscg, 0).is_err());
    }

    #[test]
    fn lln_unit_weights_converge() {
        let w = vec![1.0; 10_000];
        let c = lln_weighted_check(&w, 1.0, EntryDistribution::Cscg, 7).unwrap();
        assert!(c.self_product_error.abs() < 0.05);
        assert!(c.cross_product_value < 0.05);
    }

    #[test]
    fn target_matrix_limit_uses_all_links() {
        let est = estimate_target_matrix(&scenario(50), 50, 0).unwrap();
        let limit = est.limit_diagonal.unwrap();
        assert_eq!(limit.len(), 2);
        assert!((limit.iter().sum::<f64>() - 2.0 * 50.0 * 0.5f64.powf(-3.7)).abs() < 1e-9);
        assert_eq!(est.off_diagonal_ratios.len(), 50);
    }
}
