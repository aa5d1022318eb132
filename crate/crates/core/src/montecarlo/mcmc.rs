use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::disorder::DisorderRealization;
use super::sphere::{uniform_sphere_sample, SphereState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub burn_in: usize,
    pub thin: usize,
    pub n_samples: usize,
    /// Relative proposal step in `[0, 1]`.
    pub step: f64,
    /// Adapt `step` towards acceptance 0.4 before burn-in.
    pub auto_tune: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            burn_in: 1_000,
            thin: 10,
            n_samples: 100,
            step: 0.1,
            auto_tune: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 || self.n_samples == 0 {
            return Err(Error::Domain("thin and n_samples must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.step) {
            return Err(Error::Domain(format!(
                "step = {} must lie in [0, 1]",
                self.step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcRun {
    pub samples: Vec<SphereState>,
    pub acceptance_rate: f64,
    /// Step actually used after tuning.
    pub step: f64,
    pub warnings: Vec<String>,
}

const TUNE_ROUNDS: usize = 20;
const TUNE_BATCH: usize = 50;
const TARGET_ACCEPTANCE: f64 = 0.4;

struct Chain<'a> {
    disorder: &'a DisorderRealization,
    beta: f64,
    state: SphereState,
    energy: f64,
    sqrt_n: f64,
}

impl Chain<'_> {
    /// One Metropolis step: `sigma' = sqrt(N) (sigma + eps sqrt(N) u) / |.|`
    /// with `u` uniform on the unit sphere. Returns whether it moved.
    fn step<R: Rng + ?Sized>(&mut self, eps: f64, rng: &mut R) -> Result<bool> {
        let n = self.state.n();
        let mut u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = if norm > 0.0 {
            eps * self.sqrt_n / norm
        } else {
            0.0
        };
        for (ui, si) in u.iter_mut().zip(self.state.coords()) {
            *ui = si + scale * *ui;
        }
        let proposal = SphereState::normalized(u)?;
        let e_new = self.disorder.energy(&proposal)?;
        let log_ratio = self.beta * (e_new - self.energy);
        let accept = log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp();
        if accept {
            self.state = proposal;
            self.energy = e_new;
        }
        Ok(accept)
    }
}

/// Metropolis chain targeting `exp(beta H) nu_N`, started from a uniform
/// draw unless `init` is given. Emits every `thin`-th state after `burn_in`.
pub fn mcmc_run<R: Rng + ?Sized>(
    disorder: &DisorderRealization,
    beta: f64,
    config: &McmcConfig,
    rng: &mut R,
    init: Option<SphereState>,
) -> Result<McmcRun> {
    config.validate()?;
    let n = disorder.n();
    let state = match init {
        Some(s) if s.n() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.n(),
            })
        }
        Some(s) => s,
        None => uniform_sphere_sample(n, rng),
    };
    let energy = disorder.energy(&state)?;
    let mut chain = Chain {
        disorder,
        beta,
        state,
        energy,
        sqrt_n: (n as f64).sqrt(),
    };
    let mut eps = config.step;
    if config.auto_tune && eps > 0.0 {
        for _ in 0..TUNE_ROUNDS {
            let mut acc = 0;
            for _ in 0..TUNE_BATCH {
                acc += usize::from(chain.step(eps, rng)?);
            }
            let rate = acc as f64 / TUNE_BATCH as f64;
            eps = (eps * (rate - TARGET_ACCEPTANCE).exp()).clamp(1e-4, 1.0);
        }
    }
    for _ in 0..config.burn_in {
        chain.step(eps, rng)?;
    }
    let mut samples = Vec::with_capacity(config.n_samples);
    let mut accepted = 0usize;
    let total = config.n_samples * config.thin;
    for i in 0..total {
        accepted += usize::from(chain.step(eps, rng)?);
        if (i + 1) % config.thin == 0 {
            samples.push(chain.state.clone());
        }
    }
    let acceptance_rate = accepted as f64 / total as f64;
    let mut warnings = Vec::new();
    if !(0.1..=0.9).contains(&acceptance_rate) {
        warnings.push(format!(
            "acceptance rate {acceptance_rate:.3} at beta = {beta} lies outside [0.1, 0.9]"
        ));
    }
    Ok(McmcRun {
        samples,
        acceptance_rate,
        step: eps,
        warnings,
    })
}
