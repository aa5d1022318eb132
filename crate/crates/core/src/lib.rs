//! Parisi measures of spherical mixed p-spin glasses: the Crisanti-Sommers
//! functional, regime-aware solvers, temperature-chaos checks and a small-N
//! Monte Carlo sampler.

pub mod chaos;
pub mod crisanti_sommers;
pub mod error;
pub mod measures;
pub mod mixture;
pub mod montecarlo;
pub mod numeric;
pub mod optimize;
pub mod parisi_solver;

pub use error::{Error, Result};
pub use measures::{ParisiMeasure, StepCDF};
pub use mixture::MixtureSpec;
