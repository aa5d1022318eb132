use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::sphere::SphereState;
use crate::error::{Error, Result};
use crate::mixture::MixtureSpec;

/// Upper bound on the total number of Gaussian entries of one realization.
pub const ENTRY_BUDGET: u128 = 100_000_000;

/// `H_{N,p0} + N^{-a} H_{N,p}` with an independent `H_{N,p}` and unit
/// coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub p0: u32,
    pub p: u32,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Tensor {
    degree: u32,
    /// `gamma_p N^{-(p-1)/2}`, times `N^{-a}` for the perturbation.
    scale: f64,
    entries: Vec<f64>,
}

/// Gaussian coefficient tensors, one per degree, stored unsymmetrized and
/// flattened lexicographically (first index most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    n: usize,
    seed: u64,
    tensors: Vec<Tensor>,
}

fn layout(
    spec: &MixtureSpec,
    n: usize,
    perturbation: Option<&Perturbation>,
) -> Result<Vec<(u32, f64)>> {
    let nf = n as f64;
    let mut out: Vec<(u32, f64)> = spec
        .coeffs()
        .iter()
        .map(|(&p, &g)| (p, g * nf.powf(-(p as f64 - 1.0) / 2.0)))
        .collect();
    if let Some(pert) = perturbation {
        if spec.pure_degree() != Some(pert.p0) {
            return Err(Error::InvalidMixture(format!(
                "perturbation of the pure {}-spin model applied to {spec}",
                pert.p0
            )));
        }
        if !(pert.a > 0.0) {
            return Err(Error::Domain(format!(
                "perturbation exponent a = {} must be positive",
                pert.a
            )));
        }
        out.push((
            pert.p,
            nf.powf(-pert.a) * nf.powf(-(pert.p as f64 - 1.0) / 2.0),
        ));
    }
    let mut total: u128 = 0;
    for &(p, _) in &out {
        let entries = (n as u128).checked_pow(p).unwrap_or(u128::MAX);
        total = total.saturating_add(entries);
        if total > ENTRY_BUDGET {
            return Err(Error::Budget {
                degree: p,
                entries,
                total,
                limit: ENTRY_BUDGET,
            });
        }
    }
    Ok(out)
}

/// Fills `out` with standard Gaussians from the generator seeded by `seed`.
pub(crate) fn fill_gaussians(seed: u64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in out.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
}

/// Per-degree `(degree, scale)` in fill order.
pub(crate) fn scales(
    spec: &MixtureSpec,
    n: usize,
    perturbation: Option<&Perturbation>,
) -> Result<Vec<(u32, f64)>> {
    layout(spec, n, perturbation)
}

impl DisorderRealization {
    /// Tensors filled in degree order, the perturbation tensor last.
    pub fn sample(
        spec: &MixtureSpec,
        n: usize,
        seed: u64,
        perturbation: Option<&Perturbation>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("N must be positive".into()));
        }
        let layout = layout(spec, n, perturbation)?;
        let total: usize = layout.iter().map(|&(p, _)| n.pow(p)).sum();
        let mut all = vec![0.0; total];
        fill_gaussians(seed, &mut all);
        let mut tensors = Vec::with_capacity(layout.len());
        let mut offset = 0;
        for (degree, scale) in layout {
            let len = n.pow(degree);
            tensors.push(Tensor {
                degree,
                scale,
                entries: all[offset..offset + len].to_vec(),
            });
            offset += len;
        }
        Ok(DisorderRealization { n, seed, tensors })
    }

    /// A realization with given tensors, in the order of `spec`'s degrees.
    pub fn from_tensors(spec: &MixtureSpec, n: usize, tensors: Vec<Vec<f64>>) -> Result<Self> {
        let layout = layout(spec, n, None)?;
        if tensors.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                got: tensors.len(),
            });
        }
        let tensors = layout
            .into_iter()
            .zip(tensors)
            .map(|((degree, scale), entries)| {
                if entries.len() != n.pow(degree) {
                    return Err(Error::DimensionMismatch {
                        expected: n.pow(degree),
                        got: entries.len(),
                    });
                }
                Ok(Tensor {
                    degree,
                    scale,
                    entries,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DisorderRealization {
            n,
            seed: 0,
            tensors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `(degree, entries)` per tensor.
    pub fn tensors(&self) -> impl Iterator<Item = (u32, &[f64])> {
        self.tensors
            .iter()
            .map(|t| (t.degree, t.entries.as_slice()))
    }

    pub fn energy(&self, state: &SphereState) -> Result<f64> {
        let sigma = state.coords();
        if sigma.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: sigma.len(),
            });
        }
        Ok(self
            .tensors
            .iter()
            .map(|t| t.scale * contract(&t.entries, sigma, t.degree))
            .sum())
    }
}

/// `<g, sigma^{(x) p}>`, contracting the last index first.
fn contract(g: &[f64], sigma: &[f64], p: u32) -> f64 {
    let n = sigma.len();
    if p == 0 {
        return g[0];
    }
    let mut cur: Vec<f64> = g.chunks_exact(n).map(|row| dot(row, sigma)).collect();
    for _ in 1..p {
        cur = cur.chunks_exact(n).map(|row| dot(row, sigma)).collect();
    }
    cur[0]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Samples the disorder of the mixed model.
pub fn sample_disorder(spec: &MixtureSpec, n: usize, seed: u64) -> Result<DisorderRealization> {
    DisorderRealization::sample(spec, n, seed, None)
}

/// `H_N(state)`, including the perturbation the realization was drawn with.
pub fn energy(disorder: &DisorderRealization, state: &SphereState) -> Result<f64> {
    disorder.energy(state)
}
