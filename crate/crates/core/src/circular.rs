//! Circular cells: a user somewhere in a disc of radius `r_c`, receive
//! antennas evenly spaced on a concentric ring of radius `r_a`.
//!
//! As the number of antennas grows, the normalized path-loss sum
//! `(1/N_R) sum_k d_k^-nu` tends to the ring average
//!
//! ```text
//! (1/2pi) int_0^2pi (r_u^2 + r_a^2 - 2 r_u r_a cos w)^(-nu/2) dw
//!     = |r_u^2 - r_a^2|^(-nu/2) P_{nu/2-1}((r_u^2 + r_a^2) / |r_u^2 - r_a^2|)
//! ```
//!
//! with `P_c` the Legendre function of the first kind. For `nu = 4` it is the
//! rational function `(r_u^2 + r_a^2) / |r_u^2 - r_a^2|^3`, which also makes
//! the average over a uniformly placed user available in closed form.

use std::f64::consts::{E, LN_2, PI, TAU};

use crate::asymptotic::beta_coefficients;
use crate::error::{Error, Result};
use crate::params::{SystemParams, RING_GUARD};
use crate::stochastic::RandomStream;

/// Positions in a circular cell. Antenna `k` (zero-based) sits at angle
/// `2 pi k / N_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingGeometry {
    pub r_c: f64,
    pub r_a: f64,
    pub r_u: f64,
    pub phi: f64,
}

impl RingGeometry {
    pub fn new(r_c: f64, r_a: f64, r_u: f64, phi: f64) -> Result<Self> {
        if !(r_c.is_finite() && r_c > 0.0) {
            return Err(Error::domain(format!("cell radius must be positive, got {r_c}")));
        }
        if !(r_a.is_finite() && (0.0..r_c).contains(&r_a)) {
            return Err(Error::domain(format!("ring radius must lie in [0, {r_c}), got {r_a}")));
        }
        if !(r_u.is_finite() && (0.0..=r_c).contains(&r_u)) {
            return Err(Error::domain(format!("user radius must lie in [0, {r_c}], got {r_u}")));
        }
        if !phi.is_finite() {
            return Err(Error::domain("user angle must be finite"));
        }
        Ok(RingGeometry { r_c, r_a, r_u, phi })
    }

    fn on_ring(&self) -> bool {
        self.r_a > 0.0 && (self.r_u - self.r_a).abs() <= RING_GUARD * self.r_c
    }
}

/// Distance from the user to each of `n_r` ring antennas, by the law of
/// cosines in the form `(r_u - r_a)^2 + 4 r_u r_a sin^2(dphi / 2)`.
pub fn user_antenna_distances(g: &RingGeometry, n_r: usize) -> Result<Vec<f64>> {
    if g.on_ring() {
        return Err(Error::domain("user sits on the antenna ring"));
    }
    let gap = (g.r_u - g.r_a).powi(2);
    let cross = 4.0 * g.r_u * g.r_a;
    Ok((0..n_r)
        .map(|k| {
            let angle = TAU * k as f64 / n_r as f64;
            let half = 0.5 * (angle - g.phi);
            (gap + cross * half.sin().powi(2)).sqrt()
        })
        .collect())
}

const QUAD_START_PANELS: usize = 256;
const QUAD_MAX_PANELS: usize = 1 << 20;
const QUAD_TOLERANCE: f64 = 1e-12;

/// Trapezoid rule for a smooth `2 pi`-periodic function, doubling the panel
/// count until successive estimates agree.
fn periodic_trapezoid(f: impl Fn(f64) -> f64, routine: &'static str) -> Result<f64> {
    let mut panels = QUAD_START_PANELS;
    let mut sum: f64 = (0..panels).map(|j| f(TAU * j as f64 / panels as f64)).sum();
    let mut estimate = sum / panels as f64;
    while panels < QUAD_MAX_PANELS {
        // Midpoints of the current panels are the new nodes.
        let fresh: f64 = (0..panels).map(|j| f(TAU * (j as f64 + 0.5) / panels as f64)).sum();
        sum += fresh;
        panels *= 2;
        let next = sum / panels as f64;
        if (next - estimate).abs() <= QUAD_TOLERANCE * next.abs() {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NoConvergence {
        routine,
        iterations: QUAD_MAX_PANELS,
    })
}

/// `ln(1 + e^z)` without overflow.
fn ln1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Legendre function of the first kind `P_c(x)` for real degree `c` and
/// `x >= 1`, from the Laplace integral
/// `(1/pi) int_0^pi (x + sqrt(x^2 - 1) cos t)^c dt`.
///
/// Moderate `x` uses the periodic trapezoid rule directly. For large `x` the
/// integrand develops a narrow feature near `t = pi`, so the integral is
/// rewritten with `tan(t/2) = (x + sqrt(x^2 - 1)) e^u` and integrated over
/// `u` on the real line, where it decays exponentially at both ends.
pub fn legendre_p(c: f64, x: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 1.0) {
        return Err(Error::domain(format!("Legendre argument must be >= 1, got {x}")));
    }
    if !c.is_finite() {
        return Err(Error::domain("Legendre degree must be finite"));
    }
    if x == 1.0 || c == 0.0 {
        return Ok(1.0);
    }
    // P_c = P_{-c-1}; fold the degree onto c >= -1/2.
    let c = if c < -0.5 { -c - 1.0 } else { c };
    let s = (x * x - 1.0).sqrt();
    if x <= 10.0 {
        let half = periodic_trapezoid(|t| (x + s * t.cos()).powf(c), "Legendre function quadrature")?;
        return Ok(half);
    }
    let l = (x + s).ln();
    let integrand =
        |u: f64| (u + (c + 1.0) * l + c * ln1p_exp(2.0 * u) - (c + 1.0) * ln1p_exp(2.0 * u + 2.0 * l)).exp();
    let lo = -l - 50.0;
    let hi = 50.0;
    let mut panels = 512usize;
    let mut prev = f64::NAN;
    while panels <= QUAD_MAX_PANELS {
        let h = (hi - lo) / panels as f64;
        let sum: f64 = (0..=panels)
            .map(|j| {
                let w = if j == 0 || j == panels { 0.5 } else { 1.0 };
                w * integrand(lo + h * j as f64)
            })
            .sum();
        let est = 2.0 / PI * h * sum;
        if (est - prev).abs() <= QUAD_TOLERANCE * est.abs() {
            return Ok(est);
        }
        prev = est;
        panels *= 2;
    }
    Err(Error::NoConvergence {
        routine: "Legendre function quadrature",
        iterations: QUAD_MAX_PANELS,
    })
}

fn check_ring_pair(r_u: f64, r_a: f64, nu: f64) -> Result<()> {
    if !(r_u.is_finite() && r_u >= 0.0 && r_a.is_finite() && r_a >= 0.0) {
        return Err(Error::domain("radii must be non-negative"));
    }
    if r_u == 0.0 && r_a == 0.0 {
        return Err(Error::domain("user coincides with the antennas"));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::domain(format!("path-loss exponent must be positive, got {nu}")));
    }
    if r_a > 0.0 && r_u > 0.0 && (r_u - r_a).abs() <= RING_GUARD * r_u.max(r_a) {
        return Err(Error::domain("user sits on the antenna ring"));
    }
    Ok(())
}

/// Closed-form ring average of `d^-nu`. Uses the rational form when `nu = 4`
/// and the Legendre form otherwise.
pub fn ring_distance_moment(r_u: f64, r_a: f64, nu: f64) -> Result<f64> {
    check_ring_pair(r_u, r_a, nu)?;
    if r_a == 0.0 {
        return Ok(r_u.powf(-nu));
    }
    if r_u == 0.0 {
        return Ok(r_a.powf(-nu));
    }
    if nu == 4.0 {
        return ring_distance_moment_rational(r_u, r_a);
    }
    ring_distance_moment_legendre(r_u, r_a, nu)
}

/// Ring average through the Legendre function, for any `nu`.
pub fn ring_distance_moment_legendre(r_u: f64, r_a: f64, nu: f64) -> Result<f64> {
    check_ring_pair(r_u, r_a, nu)?;
    let diff = ((r_u - r_a) * (r_u + r_a)).abs();
    let x = (r_u * r_u + r_a * r_a) / diff;
    Ok(diff.powf(-nu / 2.0) * legendre_p(nu / 2.0 - 1.0, x)?)
}

/// Ring average for `nu = 4`: `(r_u^2 + r_a^2) / |r_u^2 - r_a^2|^3`.
pub fn ring_distance_moment_rational(r_u: f64, r_a: f64) -> Result<f64> {
    check_ring_pair(r_u, r_a, 4.0)?;
    let diff = ((r_u - r_a) * (r_u + r_a)).abs();
    Ok((r_u * r_u + r_a * r_a) / (diff * diff * diff))
}

/// Ring average by direct periodic quadrature of the angular integral.
pub fn ring_distance_moment_quadrature(r_u: f64, r_a: f64, nu: f64) -> Result<f64> {
    check_ring_pair(r_u, r_a, nu)?;
    let gap = (r_u - r_a).powi(2);
    let cross = 4.0 * r_u * r_a;
    periodic_trapezoid(
        |w| (gap + cross * (0.5 * w).sin().powi(2)).powf(-nu / 2.0),
        "ring average quadrature",
    )
}

fn log2_one_plus_sum(betas: &[f64], gain: f64) -> f64 {
    betas.iter().map(|b| (b * gain).ln_1p() / LN_2).sum()
}

/// Co-located array at the cell center: `sum_i log2(1 + beta_i r_u^-nu)`.
pub fn se_circular_cmimo(params: &SystemParams, r_u: f64) -> Result<f64> {
    if !(r_u.is_finite() && r_u > 0.0) {
        return Err(Error::domain(format!("user radius must be positive, got {r_u}")));
    }
    Ok(log2_one_plus_sum(&beta_coefficients(params)?, r_u.powf(-params.nu)))
}

/// Ring array: `sum_i log2(1 + beta_i * ring_distance_moment(r_u, r_a, nu))`.
pub fn se_circular_dmimo(params: &SystemParams, r_u: f64, r_a: f64) -> Result<f64> {
    let moment = ring_distance_moment(r_u, r_a, params.nu)?;
    Ok(log2_one_plus_sum(&beta_coefficients(params)?, moment))
}

/// User radius with density `2x / r_c^2` on `(0, r_c]`.
pub fn sample_user_radius(stream: &mut RandomStream, r_c: f64) -> Result<f64> {
    if !(r_c.is_finite() && r_c > 0.0) {
        return Err(Error::domain(format!("cell radius must be positive, got {r_c}")));
    }
    Ok(r_c * stream.uniform_open_closed().sqrt())
}

fn require_urban(params: &SystemParams) -> Result<()> {
    if params.nu != 4.0 {
        return Err(Error::domain(format!(
            "the user-averaged closed form requires nu = 4, got {}",
            params.nu
        )));
    }
    Ok(())
}

/// Ring radii this close below `r_c` take the `r_a -> r_c` limit of the edge
/// term.
const EDGE_TOLERANCE: f64 = 1e-12;

/// Average rate over a user placed uniformly in the cell, high-SNR form,
/// for the urban exponent `nu = 4`:
///
/// ```text
/// 2 N_T log2 e - 4 N_T (a/c) log2 a - 3 N_T (1 - a/c) log2(c - a)
///     + N_T (1 + a/c) log2(c + a) + sum_i log2 beta_i
/// ```
///
/// with `a = r_a^2`, `c = r_c^2`. At `r_a = 0` this is the co-located value
/// `2 N_T log2(e / r_c^2) + sum_i log2 beta_i`.
pub fn avg_se_urban(params: &SystemParams, r_c: f64, r_a: f64) -> Result<f64> {
    require_urban(params)?;
    if !(r_c.is_finite() && r_c > 0.0) {
        return Err(Error::domain(format!("cell radius must be positive, got {r_c}")));
    }
    if !(r_a.is_finite() && (0.0..r_c).contains(&r_a)) {
        return Err(Error::domain(format!("ring radius must lie in [0, {r_c}), got {r_a}")));
    }
    let n_t = params.n_t as f64;
    let a = r_a * r_a;
    let c = r_c * r_c;
    let ratio = a / c;
    let ring_term = if a == 0.0 { 0.0 } else { -4.0 * n_t * ratio * a.log2() };
    let edge_term = if r_a >= r_c - EDGE_TOLERANCE {
        0.0
    } else {
        -3.0 * n_t * (1.0 - ratio) * (c - a).log2()
    };
    let outer_term = n_t * (1.0 + ratio) * (c + a).log2();
    let betas: f64 = beta_coefficients(params)?.iter().map(|b| b.log2()).sum();
    Ok(2.0 * n_t * E.log2() + ring_term + edge_term + outer_term + betas)
}

/// Co-located counterpart of [`avg_se_urban`].
pub fn avg_se_urban_cmimo(params: &SystemParams, r_c: f64) -> Result<f64> {
    require_urban(params)?;
    if !(r_c.is_finite() && r_c > 0.0) {
        return Err(Error::domain(format!("cell radius must be positive, got {r_c}")));
    }
    let n_t = params.n_t as f64;
    let betas: f64 = beta_coefficients(params)?.iter().map(|b| b.log2()).sum();
    Ok(2.0 * n_t * (E / (r_c * r_c)).log2() + betas)
}

/// Analytic derivative of [`avg_se_urban`] with respect to `r_a`:
/// `(2 r_a / r_c^2) N_T [log2(c + a) + 3 log2(c - a) - 4 log2 a]`.
pub fn avg_se_urban_derivative(params: &SystemParams, r_c: f64, r_a: f64) -> Result<f64> {
    require_urban(params)?;
    if !(r_a > 0.0 && r_a < r_c) {
        return Err(Error::domain(format!("ring radius must lie in (0, {r_c}), got {r_a}")));
    }
    let a = r_a * r_a;
    let c = r_c * r_c;
    let n_t = params.n_t as f64;
    Ok(2.0 * r_a / c * n_t * ((c + a).log2() + 3.0 * (c - a).log2() - 4.0 * a.log2()))
}

/// Optimal ring radius for the user-averaged rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingOptimum {
    pub r_a_opt: f64,
    /// Root of `chi (chi - 2)^3 = 1` on `(2, inf)`, with `chi = r_c^2 / r_a^2 + 1`.
    pub chi0: f64,
    /// Whether the derivative changes sign from positive to negative at the root.
    pub is_maximum: bool,
}

fn chi_polynomial(chi: f64) -> f64 {
    chi * (chi - 2.0).powi(3) - 1.0
}

/// Root of `chi (chi - 2)^3 - 1` by bisection on `(2, 10]` and one Newton step.
pub fn chi_root() -> f64 {
    let (mut lo, mut hi) = (2.0f64, 10.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if chi_polynomial(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let chi = 0.5 * (lo + hi);
    let slope = (chi - 2.0).powi(3) + 3.0 * chi * (chi - 2.0).powi(2);
    chi - chi_polynomial(chi) / slope
}

/// Ring radius maximizing the user-averaged rate in a cell of radius `r_c`.
/// Independent of SNR, shadowing, correlation and antenna counts.
pub fn optimal_ring_radius(r_c: f64) -> Result<RingOptimum> {
    if !(r_c.is_finite() && r_c > 0.0) {
        return Err(Error::domain(format!("cell radius must be positive, got {r_c}")));
    }
    let chi0 = chi_root();
    let r_a_opt = r_c / (chi0 - 1.0).sqrt();
    // Sign of the bracketed factor of the derivative just below and above.
    let factor = |r_a: f64| {
        let a = r_a * r_a;
        let c = r_c * r_c;
        (c + a).ln() + 3.0 * (c - a).ln() - 4.0 * a.ln()
    };
    let is_maximum = factor(r_a_opt * (1.0 - 1e-4)) > 0.0 && factor(r_a_opt * (1.0 + 1e-4)) < 0.0;
    Ok(RingOptimum {
        r_a_opt,
        chi0,
        is_maximum,
    })
}

/// Grid search for the ring radius maximizing [`avg_se_urban`] over
/// `r_a = step, 2 step, ..., <= 0.99 r_c`, with `step` relative to `r_c`.
pub fn brute_force_ring_radius(params: &SystemParams, r_c: f64, step: f64) -> Result<f64> {
    if !(step > 0.0 && step < 0.99) {
        return Err(Error::domain(format!("grid step must lie in (0, 0.99), got {step}")));
    }
    let points = (0.99 / step + 1e-9).floor() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 1..=points {
        let r_a = step * j as f64 * r_c;
        let v = avg_se_urban(params, r_c, r_a)?;
        if v > best.0 {
            best = (v, r_a);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::theta_from_spacing;

    fn urban(n_t: usize, snr: f64) -> SystemParams {
        SystemParams {
            n_t,
            n_r: 100,
            snr,
            nu: 4.0,
            omega: 1.0,
            alpha: vec![2.0],
            theta_t: theta_from_spacing(0.25),
            theta_r: theta_from_spacing(0.75),
        }
    }

    // Independent oracle: 2F1(-c, c+1; 1; (1-x)/2), convergent for x < 3.
    fn legendre_series(c: f64, x: f64) -> f64 {
        let z = (1.0 - x) / 2.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..2000 {
            let n = n as f64;
            term *= (-c + n) * (c + 1.0 + n) / ((n + 1.0) * (n + 1.0)) * z;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    }

    // Second oracle valid for all x >= 1: ((x+1)/2)^c 2F1(-c, -c; 1; (x-1)/(x+1)).
    fn legendre_series_outer(c: f64, x: f64) -> f64 {
        let w = (x - 1.0) / (x + 1.0);
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..2_000_000 {
            let n = n as f64;
            term *= (-c + n) * (-c + n) / ((n + 1.0) * (n + 1.0)) * w;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        ((x + 1.0) / 2.0).powf(c) * sum
    }

    #[test]
    fn collapsed_ring_and_centered_user() {
        let g = RingGeometry::new(1.0, 0.0, 0.4, 1.0).unwrap();
        assert!(user_antenna_distances(&g, 7).unwrap().iter().all(|&d| d == 0.4));
        let g = RingGeometry::new(1.0, 0.3, 0.0, 0.0).unwrap();
        assert!(user_antenna_distances(&g, 7)
            .unwrap()
            .iter()
            .all(|&d| (d - 0.3).abs() < 1e-15));
    }

    #[test]
    fn collinear_antenna_distance() {
        let g = RingGeometry::new(1.0, 0.2, 0.5, 0.0).unwrap();
        let d = user_antenna_distances(&g, 8).unwrap();
        assert!((d[0] - 0.3).abs() < 1e-15);
        // Antenna opposite the user.
        assert!((d[4] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn law_of_cosines_matches_cartesian_distance() {
        let g = RingGeometry::new(1.0, 0.6, 0.35, 2.1).unwrap();
        let d = user_antenna_distances(&g, 13).unwrap();
        for (k, dk) in d.iter().enumerate() {
            let a = TAU * k as f64 / 13.0;
            let (ax, ay) = (0.6 * a.cos(), 0.6 * a.sin());
            let (ux, uy) = (0.35 * 2.1f64.cos(), 0.35 * 2.1f64.sin());
            assert!((dk - ((ax - ux).powi(2) + (ay - uy).powi(2)).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn user_on_ring_rejected() {
        let g = RingGeometry::new(1.0, 0.5, 0.5, 0.0).unwrap();
        assert!(user_antenna_distances(&g, 4).is_err());
        assert!(ring_distance_moment(0.5, 0.5, 3.7).is_err());
    }

    #[test]
    fn legendre_trivial_values() {
        assert_eq!(legendre_p(0.85, 1.0).unwrap(), 1.0);
        for x in [1.2, 3.0, 9.0, 40.0, 1e4] {
            let p1 = legendre_p(1.0, x).unwrap();
            assert!((p1 - x).abs() < 1e-10 * x, "x={x}: {p1}");
        }
        assert!(legendre_p(0.5, 0.9).is_err());
    }

    #[test]
    fn legendre_matches_hypergeometric_series() {
        let p = legendre_p(0.85, 1.5).unwrap();
        let s = legendre_series(0.85, 1.5);
        assert!((p - s).abs() < 1e-8 * s, "{p} vs {s}");
        for (c, x) in [
            (0.25, 1.1),
            (0.85, 2.5),
            (1.5, 2.0),
            (-0.3, 2.9),
            (0.85, 8.0),
            (0.85, 10.5),
            (0.65, 25.0),
            (1.5, 300.0),
        ] {
            let p = legendre_p(c, x).unwrap();
            let s = if x < 3.0 {
                legendre_series(c, x)
            } else {
                legendre_series_outer(c, x)
            };
            assert!((p - s).abs() < 1e-9 * s.abs(), "c={c} x={x}: {p} vs {s}");
        }
    }

    #[test]
    fn legendre_degree_reflection() {
        for x in [1.5, 20.0] {
            let a = legendre_p(0.85, x).unwrap();
            let b = legendre_p(-1.85, x).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn legendre_branches_agree_at_switch() {
        // Both representations straddle x = 10.
        let lo = legendre_p(0.85, 10.0).unwrap();
        let hi = legendre_p(0.85, 10.0 + 1e-12).unwrap();
        assert!((lo - hi).abs() < 1e-10 * lo);
    }

    #[test]
    fn ring_moment_limits() {
        assert_eq!(ring_distance_moment(0.5, 0.0, 3.7).unwrap(), 0.5f64.powf(-3.7));
        let near = ring_distance_moment(0.5, 1e-4, 3.7).unwrap();
        assert!((near / 0.5f64.powf(-3.7) - 1.0).abs() < 1e-6);
        let r = ring_distance_moment(0.5, 0.2, 4.0).unwrap();
        let expect = (0.25 + 0.04) / (0.25f64 - 0.04).powi(3);
        assert!((r - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn ring_moment_matches_quadrature() {
        let closed = ring_distance_moment(0.5, 0.2, 3.7).unwrap();
        let quad = ring_distance_moment_quadrature(0.5, 0.2, 3.7).unwrap();
        assert!((closed - quad).abs() < 1e-10 * quad, "{closed} vs {quad}");
        let rational = ring_distance_moment_rational(0.3, 0.7).unwrap();
        let legendre = ring_distance_moment_legendre(0.3, 0.7, 4.0).unwrap();
        assert!((rational - legendre).abs() < 1e-10 * rational);
    }

    #[test]
    fn riemann_sum_converges_to_ring_moment() {
        let (r_u, r_a, nu) = (0.5, 0.2, 3.7);
        let exact = ring_distance_moment(r_u, r_a, nu).unwrap();
        let g = RingGeometry::new(1.0, r_a, r_u, 0.3).unwrap();
        let mut errors = Vec::new();
        for n in [4usize, 8, 16] {
            let d = user_antenna_distances(&g, n).unwrap();
            let avg = d.iter().map(|x| x.powf(-nu)).sum::<f64>() / n as f64;
            errors.push((avg - exact).abs());
        }
        // Geometric convergence of the equispaced rule.
        assert!(errors[1] < errors[0] * 0.5 && errors[2] < errors[1] * 0.5, "{errors:?}");
    }

    #[test]
    fn collapsed_ring_matches_colocated_rate() {
        let p = urban(4, 10.0);
        let c = se_circular_cmimo(&p, 0.5).unwrap();
        let d = se_circular_dmimo(&p, 0.5, 0.0).unwrap();
        assert_eq!(c, d);
        let tiny = se_circular_dmimo(&p, 0.5, 1e-6).unwrap();
        assert!((tiny - c).abs() < 1e-9 * c);
    }

    #[test]
    fn unit_beta_at_unit_radius() {
        // beta_i = 1 for every i when the transmit array is uncorrelated and
        // N_R rho Omega / N_T = 1.
        let mut p = urban(3, 3.0 / 100.0);
        p.theta_t = 0.0;
        p.nu = 3.7;
        assert!((se_circular_cmimo(&p, 1.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn user_radius_support_and_moments() {
        let mut s = RandomStream::new(21, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_user_radius(&mut s, 2.0).unwrap()).collect();
        assert!(xs.iter().all(|&x| x > 0.0 && x <= 2.0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        // Var = r_c^2 / 2 - (2 r_c / 3)^2 = r_c^2 / 18.
        let se = (4.0f64 / 18.0 / n as f64).sqrt();
        assert!((mean - 4.0 / 3.0).abs() < 3.0 * se);
        let inner = xs.iter().filter(|&&x| x <= 1.0).count() as f64 / n as f64;
        assert!((inner - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }

    #[test]
    fn average_rate_reduces_to_colocated_value() {
        let p = urban(2, 1000.0);
        let d = avg_se_urban(&p, 1.0, 0.0).unwrap();
        let c = avg_se_urban_cmimo(&p, 1.0).unwrap();
        assert!((d - c).abs() < 1e-10 * c.abs());
        let near = avg_se_urban(&p, 1.0, 1e-7).unwrap();
        assert!((near - c).abs() < 1e-9);
    }

    #[test]
    fn average_rate_requires_urban_exponent() {
        let mut p = urban(1, 10.0);
        p.nu = 3.7;
        assert!(avg_se_urban(&p, 1.0, 0.5).is_err());
        let p = urban(1, 10.0);
        assert!(avg_se_urban(&p, 1.0, 1.0).is_err());
        assert!(avg_se_urban(&p, 1.0, 1.0 - 5e-13).unwrap().is_finite());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = urban(2, 100.0);
        for r_a in [0.2, 0.5, 0.76, 0.9] {
            let h = 1e-6;
            let fd = (avg_se_urban(&p, 1.0, r_a + h).unwrap() - avg_se_urban(&p, 1.0, r_a - h).unwrap()) / (2.0 * h);
            let an = avg_se_urban_derivative(&p, 1.0, r_a).unwrap();
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "r_a={r_a}: {fd} vs {an}");
        }
    }

    #[test]
    fn chi_root_and_optimum() {
        let opt = optimal_ring_radius(1.0).unwrap();
        assert!(chi_polynomial(opt.chi0).abs() < 1e-12);
        assert!((opt.chi0 - 2.7167).abs() < 5e-4);
        assert!((opt.r_a_opt - 0.763).abs() < 1e-3);
        assert!(opt.is_maximum);
        let scaled = optimal_ring_radius(500.0).unwrap();
        assert!((scaled.r_a_opt - 500.0 * opt.r_a_opt).abs() < 1e-9);
    }

    #[test]
    fn grid_search_agrees_with_root() {
        let opt = optimal_ring_radius(1.0).unwrap();
        let found = brute_force_ring_radius(&urban(1, 10.0), 1.0, 1e-3).unwrap();
        assert!((found - opt.r_a_opt).abs() <= 2e-3);
    }
}
