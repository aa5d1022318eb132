use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::disorder::{DisorderRealization, Perturbation};
use super::mcmc::{mcmc_run, McmcConfig, McmcRun};
use super::sphere::overlap;
use super::stats::{mean_se, Histogram};
use crate::chaos::cross_overlap_prediction;
use crate::error::{Error, Result};
use crate::measures::ParisiMeasure;
use crate::mixture::MixtureSpec;
use crate::parisi_solver::{parisi_solve, SolveOptions};

/// Seed spacing between disorder realizations.
pub const DISORDER_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
const CHAIN_STRIDE: u64 = 0xBF58_476D_1CE4_E5B9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub spec: MixtureSpec,
    pub n: usize,
    pub betas: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub perturbation: Option<Perturbation>,
    pub mcmc: McmcConfig,
    pub n_disorder: usize,
    pub master_seed: u64,
    /// Keep the raw overlap samples in the result.
    #[serde(default)]
    pub keep_raw: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("N = {} must be at least 2", self.n)));
        }
        if self.n_disorder == 0 {
            return Err(Error::Domain("n_disorder must be positive".into()));
        }
        let (b1, b2) = self.betas;
        if !(b1 >= 0.0 && b2 >= 0.0 && b1.is_finite() && b2.is_finite()) {
            return Err(Error::Domain(
                "temperatures must be finite and non-negative".into(),
            ));
        }
        self.mcmc.validate()
    }

    fn disorder_seed(&self, d: usize) -> u64 {
        self.master_seed
            .wrapping_add(DISORDER_STRIDE.wrapping_mul(d as u64))
    }
}

/// Predicted atoms of `|R|` from the Parisi measures at the two
/// temperatures. Absent when a measure is not finitely atomic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub same1: Option<Vec<f64>>,
    pub same2: Option<Vec<f64>>,
    pub cross: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawOverlaps {
    pub same1: Vec<f64>,
    pub same2: Vec<f64>,
    pub cross: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapStats {
    pub n: usize,
    pub betas: (f64, f64),
    pub n_disorder: usize,
    pub master_seed: u64,
    /// `|R|` for two independent chains at `beta1`.
    pub same1: Histogram,
    /// `|R|` for two independent chains at `beta2`.
    pub same2: Histogram,
    /// `|R|` for chains at `beta1` and `beta2` in the same disorder.
    pub cross: Histogram,
    pub mean_abs_cross: f64,
    /// Standard error across disorder realizations.
    pub se_abs_cross: f64,
    pub mean_abs_same1: f64,
    pub se_abs_same1: f64,
    pub mean_abs_same2: f64,
    pub se_abs_same2: f64,
    pub per_disorder_cross: Vec<f64>,
    pub acceptance_rates: (f64, f64),
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub overlay: Option<Overlay>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub raw: Option<RawOverlaps>,
    /// Always false: the chaos limit and the concentration of the overlap
    /// are `N -> infinity` statements and these finite-N histograms are
    /// qualitative only.
    pub asymptotic_claims_reproducible: bool,
    pub note: String,
}

pub const NON_REPRODUCIBLE_NOTE: &str =
    "temperature chaos and overlap concentration are N -> infinity limits; \
finite-N histograms and predicted atoms are a qualitative overlay, not a test of those limits";

struct Replica {
    same1: Vec<f64>,
    same2: Vec<f64>,
    cross: Vec<f64>,
    acceptance: (f64, f64),
    warnings: Vec<String>,
}

fn abs_overlaps(a: &McmcRun, b: &McmcRun) -> Result<Vec<f64>> {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| overlap(x, y).map(f64::abs))
        .collect()
}

fn run_replica(config: &SimConfig, d: usize) -> Result<Replica> {
    let seed = config.disorder_seed(d);
    let disorder =
        DisorderRealization::sample(&config.spec, config.n, seed, config.perturbation.as_ref())?;
    let (b1, b2) = config.betas;
    let chain = |j: u64, beta: f64| {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_add(CHAIN_STRIDE.wrapping_mul(j + 1)));
        mcmc_run(&disorder, beta, &config.mcmc, &mut rng, None)
    };
    let runs: Vec<McmcRun> = [(0, b1), (1, b1), (2, b2), (3, b2)]
        .par_iter()
        .map(|&(j, beta)| chain(j, beta))
        .collect::<Result<_>>()?;
    let (a1, bb1, a2, bb2) = (&runs[0], &runs[1], &runs[2], &runs[3]);
    let mut cross = abs_overlaps(a1, a2)?;
    cross.extend(abs_overlaps(bb1, bb2)?);
    let warnings = runs
        .iter()
        .flat_map(|r| r.warnings.iter().map(move |w| format!("disorder {d}: {w}")))
        .collect();
    Ok(Replica {
        same1: abs_overlaps(a1, bb1)?,
        same2: abs_overlaps(a2, bb2)?,
        cross,
        acceptance: (
            0.5 * (a1.acceptance_rate + bb1.acceptance_rate),
            0.5 * (a2.acceptance_rate + bb2.acceptance_rate),
        ),
        warnings,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Runs two independent chains per temperature in each of `n_disorder`
/// realizations and collects `|R|` for the pairs `(A1, B1)`, `(A2, B2)`,
/// `(A1, A2)` and `(B1, B2)`. Realization `d` uses the seed
/// `master_seed + d * DISORDER_STRIDE`.
pub fn chaos_experiment(config: &SimConfig) -> Result<OverlapStats> {
    config.validate()?;
    let replicas: Vec<Replica> = (0..config.n_disorder)
        .into_par_iter()
        .map(|d| run_replica(config, d))
        .collect::<Result<_>>()?;

    let (mut same1, mut same2, mut cross) =
        (Histogram::unit(), Histogram::unit(), Histogram::unit());
    let mut per_cross = Vec::with_capacity(replicas.len());
    let mut per_same1 = Vec::with_capacity(replicas.len());
    let mut per_same2 = Vec::with_capacity(replicas.len());
    let mut warnings = Vec::new();
    let mut acc = (0.0, 0.0);
    let mut raw = RawOverlaps {
        same1: Vec::new(),
        same2: Vec::new(),
        cross: Vec::new(),
    };
    for r in &replicas {
        same1.extend(r.same1.iter().copied());
        same2.extend(r.same2.iter().copied());
        cross.extend(r.cross.iter().copied());
        per_cross.push(mean(&r.cross));
        per_same1.push(mean(&r.same1));
        per_same2.push(mean(&r.same2));
        warnings.extend(r.warnings.iter().cloned());
        acc.0 += r.acceptance.0 / replicas.len() as f64;
        acc.1 += r.acceptance.1 / replicas.len() as f64;
        if config.keep_raw {
            raw.same1.extend(&r.same1);
            raw.same2.extend(&r.same2);
            raw.cross.extend(&r.cross);
        }
    }
    let (mean_abs_cross, se_abs_cross) = mean_se(&per_cross);
    let (mean_abs_same1, se_abs_same1) = mean_se(&per_same1);
    let (mean_abs_same2, se_abs_same2) = mean_se(&per_same2);
    Ok(OverlapStats {
        n: config.n,
        betas: config.betas,
        n_disorder: config.n_disorder,
        master_seed: config.master_seed,
        same1,
        same2,
        cross,
        mean_abs_cross,
        se_abs_cross,
        mean_abs_same1,
        se_abs_same1,
        mean_abs_same2,
        se_abs_same2,
        per_disorder_cross: per_cross,
        acceptance_rates: acc,
        warnings,
        overlay: None,
        raw: config.keep_raw.then_some(raw),
        asymptotic_claims_reproducible: false,
        note: NON_REPRODUCIBLE_NOTE.into(),
    })
}

fn same_atoms(m: &ParisiMeasure) -> Option<Vec<f64>> {
    m.as_step().map(|s| s.jumps().iter().map(|j| j.0).collect())
}

/// Atoms predicted by the Parisi measures of `spec` at both temperatures
/// (zero temperatures give `{0}`).
pub fn overlay_predictions(
    spec: &MixtureSpec,
    betas: (f64, f64),
    opts: &SolveOptions,
) -> Result<Overlay> {
    let solve = |beta: f64| -> Result<ParisiMeasure> {
        if beta == 0.0 {
            Ok(ParisiMeasure::Atomic(crate::measures::StepCDF::delta_zero()))
        } else {
            Ok(parisi_solve(spec, beta, opts)?.measure)
        }
    };
    let (m1, m2) = (solve(betas.0)?, solve(betas.1)?);
    Ok(Overlay {
        same1: same_atoms(&m1),
        same2: same_atoms(&m2),
        cross: cross_overlap_prediction(&m1, &m2).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(master_seed: u64) -> SimConfig {
        SimConfig {
            spec: MixtureSpec::pure(2).unwrap(),
            n: 6,
            betas: (0.3, 0.5),
            perturbation: None,
            mcmc: McmcConfig {
                burn_in: 50,
                thin: 5,
                n_samples: 20,
                step: 0.5,
                auto_tune: false,
            },
            n_disorder: 3,
            master_seed,
            keep_raw: true,
        }
    }

    #[test]
    fn deterministic_and_counted() {
        let a = chaos_experiment(&small(4)).unwrap();
        let b = chaos_experiment(&small(4)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_ne!(a, chaos_experiment(&small(5)).unwrap());
        assert_eq!(a.same1.total(), 60);
        assert_eq!(a.cross.total(), 120);
        assert!(!a.asymptotic_claims_reproducible);
        assert_eq!(a.raw.as_ref().unwrap().cross.len(), 120);
    }

    #[test]
    fn overlay_for_rs_pair() {
        let o = overlay_predictions(
            &MixtureSpec::pure(2).unwrap(),
            (0.3, 0.5),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(o.cross, Some(vec![0.0]));
        assert_eq!(o.same1, Some(vec![0.0]));
    }
}
