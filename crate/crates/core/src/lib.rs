//! Spectral efficiency of centralized and distributed massive MIMO uplinks
//! under path loss, Gamma shadowing, Rayleigh multipath and exponential
//! antenna correlation.
//!
//! The crate covers three things:
//!
//! * a channel model that draws realizations and computes instantaneous
//!   spectral efficiency ([`channel`]);
//! * closed-form large-array limits for arbitrary layouts ([`asymptotic`])
//!   and for circular cells, including the optimal antenna ring
//!   ([`circular`]);
//! * seeded Monte Carlo estimation and parameter sweeps ([`montecarlo`]).
//!
//! ```
//! use mimo_se::asymptotic::se_cmimo_asymptotic;
//! use mimo_se::params::SystemParams;
//!
//! let p = SystemParams {
//!     n_t: 1, n_r: 100, snr: 1.0, nu: 3.7, omega: 1.0,
//!     alpha: vec![10.0], theta_t: 0.0, theta_r: 0.0,
//! };
//! let se = se_cmimo_asymptotic(&p, 1.0).unwrap();
//! assert!((se - 101f64.log2()).abs() < 1e-12);
//! ```

pub mod asymptotic;
pub mod channel;
pub mod circular;
pub mod cli;
pub mod correlation;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod params;
pub mod stochastic;

pub use error::{Error, Result};
pub use params::{validate, Scenario, Scheme, SystemParams, Topology, UserPosition};
