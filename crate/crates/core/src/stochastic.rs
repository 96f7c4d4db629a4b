//! Seedable random sources: complex Gaussian multipath and Gamma shadowing.
//!
//! Every Monte Carlo trial owns a [`RandomStream`] keyed by `(seed, trial)`.
//! Streams are ChaCha8 keystreams with the trial index as stream id, so a
//! trial's draws do not depend on which worker runs it or in what order.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Deterministic random source for one work unit.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_open_closed(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// One `CN(0, 1)` draw: independent real and imaginary parts of variance 1/2.
    pub fn cscg(&mut self) -> Complex64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    }
}

/// Matrix of i.i.d. unit-power circularly symmetric complex Gaussian entries,
/// filled row by row.
pub fn sample_cscg(stream: &mut RandomStream, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| stream.cscg())
}

/// Gamma variates by Marsaglia and Tsang's squeeze-rejection method.
///
/// Shapes below one are boosted: sample with shape `alpha + 1` and multiply
/// by `U^(1/alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSampler {
    shape: f64,
    scale: f64,
    d: f64,
    c: f64,
}

impl GammaSampler {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::domain(format!("gamma shape must be positive, got {shape}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::domain(format!("gamma scale must be positive, got {scale}")));
        }
        let boosted = if shape < 1.0 { shape + 1.0 } else { shape };
        let d = boosted - 1.0 / 3.0;
        Ok(GammaSampler {
            shape,
            scale,
            d,
            c: 1.0 / (9.0 * d).sqrt(),
        })
    }

    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        let g = loop {
            let (x, v) = loop {
                let x = stream.standard_normal();
                let v = 1.0 + self.c * x;
                if v > 0.0 {
                    break (x, v * v * v);
                }
            };
            let u = stream.uniform_open_closed();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + self.d * (1.0 - v + v.ln()) {
                break self.d * v;
            }
        };
        let g = if self.shape < 1.0 {
            g * stream.uniform_open_closed().powf(1.0 / self.shape)
        } else {
            g
        };
        g * self.scale
    }
}

/// Shadowing gains for one channel realization: one value for a co-located
/// array, one per receive antenna for a distributed one.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowingDraw {
    values: Vec<f64>,
}

impl ShadowingDraw {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("shadowing draw is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::domain(format!("shadowing gain must be positive, got {v}")));
        }
        Ok(ShadowingDraw { values })
    }

    /// Unit shadowing on `n` links.
    pub fn unit(n: usize) -> Self {
        ShadowingDraw { values: vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Gain of link `k`; a single shared value is broadcast.
    pub fn gain(&self, k: usize) -> f64 {
        if self.values.len() == 1 {
            self.values[0]
        } else {
            self.values[k]
        }
    }
}

fn check_shadowing(alpha: f64, omega: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.5) {
        return Err(Error::domain(format!("shadowing shape must exceed 0.5, got {alpha}")));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::domain(format!("shadowing power must be positive, got {omega}")));
    }
    Ok(())
}

/// One shadowing gain from `Gamma(alpha, omega / alpha)`: mean `omega`,
/// variance `omega^2 / alpha`.
pub fn sample_shadowing(stream: &mut RandomStream, alpha: f64, omega: f64) -> Result<f64> {
    check_shadowing(alpha, omega)?;
    Ok(GammaSampler::new(alpha, omega / alpha)?.sample(stream))
}

/// Per-link shadowing samplers for a shape vector of length 1 or `links`.
///
/// A broadcast shape and an explicit vector of equal values draw identical
/// sequences.
#[derive(Debug, Clone)]
pub struct ShadowingSampler {
    samplers: Vec<GammaSampler>,
}

impl ShadowingSampler {
    pub fn new(alpha: &[f64], omega: f64) -> Result<Self> {
        let samplers = alpha
            .iter()
            .map(|&a| {
                check_shadowing(a, omega)?;
                GammaSampler::new(a, omega / a)
            })
            .collect::<Result<Vec<_>>>()?;
        if samplers.is_empty() {
            return Err(Error::domain("no shadowing shape supplied"));
        }
        Ok(ShadowingSampler { samplers })
    }

    /// Draws `links` independent gains.
    pub fn draw(&self, stream: &mut RandomStream, links: usize) -> ShadowingDraw {
        let values = (0..links)
            .map(|k| {
                let s = if self.samplers.len() == 1 {
                    &self.samplers[0]
                } else {
                    &self.samplers[k]
                };
                s.sample(stream)
            })
            .collect();
        ShadowingDraw { values }
    }
}
