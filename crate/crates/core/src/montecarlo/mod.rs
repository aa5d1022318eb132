//! Small-N simulation of the Gibbs measures
//! `G(d sigma) ~ exp(beta H_N(sigma)) nu_N(d sigma)` on the sphere of radius
//! `sqrt(N)`, with
//!
//! ```text
//! H_N(sigma) = sum_p gamma_p N^{-(p-1)/2} sum_{i_1..i_p} g_{i_1..i_p} sigma_{i_1} ... sigma_{i_p}
//! ```
//!
//! and i.i.d. standard Gaussian `g`, so that `E H(s1) H(s2) = N xi(R(s1, s2))`.
//!
//! Everything here is desk scale. Finite-N histograms say nothing rigorous
//! about the `N -> infinity` statements they are compared with.

mod covariance;
mod disorder;
mod experiment;
mod mcmc;
mod sphere;
pub mod stats;

pub use covariance::{covariance_selftest, CovarianceReport, PairEstimate};
pub use disorder::{energy, sample_disorder, DisorderRealization, Perturbation, ENTRY_BUDGET};
pub use experiment::{
    chaos_experiment, overlay_predictions, OverlapStats, Overlay, SimConfig, DISORDER_STRIDE,
};
pub use mcmc::{mcmc_run, McmcConfig, McmcRun};
pub use sphere::{overlap, uniform_sphere_sample, SphereState};
