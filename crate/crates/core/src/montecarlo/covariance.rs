use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::disorder::{fill_gaussians, scales};
use super::sphere::{overlap, uniform_sphere_sample, SphereState};
use crate::error::{Error, Result};
use crate::mixture::MixtureSpec;

const BLOCK: usize = 64;
const DRAW_STRIDE: u64 = 0xD1B5_4A32_D192_ED03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub overlap: f64,
    /// `N xi(R)`
    pub target: f64,
    pub mean: f64,
    pub std_error: f64,
    /// `(mean - target) / std_error`
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub n: usize,
    pub n_disorder: usize,
    pub seed: u64,
    pub pairs: Vec<PairEstimate>,
    pub max_abs_z: f64,
}

/// Row of `gamma_p N^{-(p-1)/2} sigma^{(x) p}` over all degrees, laid out
/// like the Gaussian stream of a disorder realization, so that
/// `H(sigma) = <features(sigma), g>`.
fn features(sigma: &[f64], layout: &[(u32, f64)]) -> Vec<f64> {
    let mut out = Vec::new();
    for &(p, scale) in layout {
        let mut cur = vec![scale];
        for _ in 0..p {
            let mut next = Vec::with_capacity(cur.len() * sigma.len());
            for &c in &cur {
                next.extend(sigma.iter().map(|s| c * s));
            }
            cur = next;
        }
        out.extend(cur);
    }
    out
}

/// A uniform point `s2` with `R(s1, s2) = rho`.
fn partner<R: Rng + ?Sized>(s1: &SphereState, rho: f64, rng: &mut R) -> Result<SphereState> {
    let n = s1.n() as f64;
    let x = s1.coords();
    let mut w: Vec<f64> = (0..x.len()).map(|_| rng.sample(StandardNormal)).collect();
    let proj = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / n;
    w.iter_mut().zip(x).for_each(|(a, b)| *a -= proj * b);
    let wn = (w.iter().map(|a| a * a).sum::<f64>() / n).sqrt();
    let c = (1.0 - rho * rho).max(0.0).sqrt() / wn;
    SphereState::normalized(x.iter().zip(&w).map(|(a, b)| rho * a + c * b).collect())
}

/// Estimates `E H(s1) H(s2)` over `n_disorder` independent realizations for
/// `n_pairs` sphere pairs with overlaps spread over `[-1, 1]` (the first two
/// pairs are orthogonal and identical) and standardizes the deviation from
/// `N xi(R)`.
pub fn covariance_selftest(
    spec: &MixtureSpec,
    n: usize,
    n_pairs: usize,
    n_disorder: usize,
    seed: u64,
) -> Result<CovarianceReport> {
    if n < 2 || n_pairs == 0 || n_disorder < 2 {
        return Err(Error::Domain(
            "need N >= 2, n_pairs >= 1 and n_disorder >= 2".into(),
        ));
    }
    let layout = scales(spec, n, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        let s1 = uniform_sphere_sample(n, &mut rng);
        let rho = match i {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(-1.0..=1.0),
        };
        let s2 = partner(&s1, rho, &mut rng)?;
        pairs.push((s1, s2));
    }
    let dim: usize = layout.iter().map(|&(p, _)| n.pow(p)).sum();
    let mut phi = Array2::<f64>::zeros((dim, 2 * n_pairs));
    for (i, (s1, s2)) in pairs.iter().enumerate() {
        for (col, s) in [(2 * i, s1), (2 * i + 1, s2)] {
            for (r, v) in features(s.coords(), &layout).into_iter().enumerate() {
                phi[[r, col]] = v;
            }
        }
    }

    // per block: sums of H1 H2 and of its square for every pair
    let blocks: Vec<(usize, usize)> = (0..n_disorder)
        .step_by(BLOCK)
        .map(|start| (start, BLOCK.min(n_disorder - start)))
        .collect();
    let partial: Vec<Vec<(f64, f64)>> = blocks
        .par_iter()
        .map(|&(start, len)| {
            let mut g = Array2::<f64>::zeros((len, dim));
            for (r, mut row) in g.axis_iter_mut(Axis(0)).enumerate() {
                let draw_seed = seed.wrapping_add(DRAW_STRIDE.wrapping_mul((start + r + 1) as u64));
                fill_gaussians(draw_seed, row.as_slice_mut().expect("rows are contiguous"));
            }
            let h = g.dot(&phi);
            (0..n_pairs)
                .map(|i| {
                    let prods = h.column(2 * i).to_owned() * h.column(2 * i + 1);
                    (prods.sum(), prods.mapv(|x| x * x).sum())
                })
                .collect()
        })
        .collect();

    let nd = n_disorder as f64;
    let mut estimates = Vec::with_capacity(n_pairs);
    for (i, (s1, s2)) in pairs.iter().enumerate() {
        let (sum, sum_sq) = partial
            .iter()
            .fold((0.0, 0.0), |acc, b| (acc.0 + b[i].0, acc.1 + b[i].1));
        let mean = sum / nd;
        let var = ((sum_sq - nd * mean * mean) / (nd - 1.0)).max(0.0);
        let std_error = (var / nd).sqrt();
        let r = overlap(s1, s2)?;
        let target = n as f64 * spec.xi0(r);
        let z = if std_error > 0.0 {
            (mean - target) / std_error
        } else {
            0.0
        };
        estimates.push(PairEstimate {
            overlap: r,
            target,
            mean,
            std_error,
            z,
        });
    }
    let max_abs_z = estimates.iter().map(|e| e.z.abs()).fold(0.0, f64::max);
    Ok(CovarianceReport {
        n,
        n_disorder,
        seed,
        pairs: estimates,
        max_abs_z,
    })
}
