//! k-RSB minimization of the Crisanti-Sommers functional.
//!
//! A step c.d.f. with `k` jumps is encoded by `2k - 1` numbers in a box:
//!
//! ```text
//! q_i = 1 - prod_{j <= i} (1 - u_j),   u_j in [0, 1 - 1e-7]
//! m_i = prod_{j = i}^{k-1} v_j,        v_j in [1e-8, 1],   m_k = 1
//! ```
//!
//! so that `0 <= q_1 <= ... <= q_k < 1` and `0 < m_1 <= ... <= m_k = 1`
//! hold automatically. Coinciding locations or values describe measures with
//! fewer atoms, which is how a k-RSB run reaches the (k-1)-RSB family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Profile;
use crate::error::{Error, Result};
use crate::measures::StepCDF;
use crate::mixture::MixtureSpec;
use crate::optimize::{minimize_box, BoxOptions};

const U_MAX: f64 = 1.0 - 1e-7;
const V_MIN: f64 = 1e-8;
/// Seed spacing between restarts.
pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
/// Location and mass tolerance of the post-optimization cleanup.
pub const CLEANUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct KrsbOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Projected-gradient max-norm accepted as converged.
    pub tol: f64,
    pub max_evals: usize,
    /// Extra starting point, typically the minimizer for a smaller `k`. The
    /// returned value never exceeds its value.
    pub warm_start: Option<StepCDF>,
}

impl Default for KrsbOptions {
    fn default() -> Self {
        KrsbOptions {
            restarts: 8,
            seed: 0,
            tol: 1e-9,
            max_evals: 10_000,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrsbResult {
    pub alpha: StepCDF,
    pub value: f64,
    pub converged: bool,
    pub grad_norm: f64,
    pub evaluations: usize,
}

fn decode(k: usize, x: &[f64]) -> Vec<(f64, f64)> {
    let (u, v) = x.split_at(k);
    let mut jumps = vec![(0.0, 1.0); k];
    let mut prod = 1.0;
    for i in 0..k {
        prod *= 1.0 - u[i];
        jumps[i].0 = 1.0 - prod;
    }
    let mut m = 1.0;
    for i in (0..k - 1).rev() {
        m *= v[i];
        jumps[i].1 = m;
    }
    jumps
}

fn encode(jumps: &[(f64, f64)]) -> Vec<f64> {
    let k = jumps.len();
    let mut x = Vec::with_capacity(2 * k - 1);
    let mut prev = 0.0;
    for &(q, _) in jumps {
        let u = if prev < 1.0 {
            (q - prev) / (1.0 - prev)
        } else {
            0.0
        };
        x.push(u.clamp(0.0, U_MAX));
        prev = q;
    }
    for i in 0..k - 1 {
        let v = jumps[i].1 / jumps[i + 1].1;
        x.push(v.clamp(V_MIN, 1.0));
    }
    x
}

/// Value and gradient in the box coordinates.
fn value_and_grad(spec: &MixtureSpec, beta: f64, k: usize, x: &[f64]) -> (f64, Vec<f64>) {
    let jumps = decode(k, x);
    let top = jumps[k - 1].0;
    if !(top < 1.0 - 1e-12) {
        return (f64::INFINITY, vec![0.0; x.len()]);
    }
    let profile = Profile::from_jumps(&jumps);
    let value = profile.cs_value(spec, beta, top);
    let (d_loc, d_val) = profile.gradient(spec, beta);
    let (u, v) = x.split_at(k);

    let mut grad = vec![0.0; x.len()];
    // dq_i/du_j = (1 - q_i) / (1 - u_j) for j <= i
    let mut suffix = 0.0;
    for j in (0..k).rev() {
        suffix += d_loc[j] * (1.0 - jumps[j].0);
        grad[j] = suffix / (1.0 - u[j]);
    }
    // dm_i/dv_j = m_i / v_j for i <= j < k
    let mut prefix = 0.0;
    for j in 0..k - 1 {
        prefix += d_val[j] * jumps[j].1;
        grad[k + j] = prefix / v[j];
    }
    (value, grad)
}

fn random_start(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut qs: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 0.95).collect();
    qs.sort_by(f64::total_cmp);
    let mut ms: Vec<f64> = (0..k - 1).map(|_| rng.random_range(0.01..1.0)).collect();
    ms.sort_by(f64::total_cmp);
    ms.push(1.0);
    let jumps: Vec<(f64, f64)> = qs.into_iter().zip(ms).collect();
    encode(&jumps)
}

/// Pads `alpha` to exactly `k` jumps with zero-mass jumps at the midpoints of
/// the widest gaps of `[0, 1)`. Returns `None` when `alpha` has more jumps.
fn pad_to(alpha: &StepCDF, k: usize) -> Option<Vec<(f64, f64)>> {
    let mut jumps = alpha.jumps().to_vec();
    if jumps.len() > k {
        return None;
    }
    while jumps.len() < k {
        // gaps: [0, q_1), [q_i, q_{i+1}), [q_k, 1)
        let mut best = (0usize, -1.0);
        let mut prev = 0.0;
        for (i, &(q, _)) in jumps.iter().enumerate() {
            if q - prev > best.1 {
                best = (i, q - prev);
            }
            prev = q;
        }
        if 1.0 - prev > best.1 {
            best = (jumps.len(), 1.0 - prev);
        }
        let i = best.0;
        let lo = if i == 0 { 0.0 } else { jumps[i - 1].0 };
        let hi = jumps.get(i).map_or(1.0, |j| j.0);
        let mid = 0.5 * (lo + hi);
        if i == jumps.len() {
            // new top jump; the old top keeps value 1 as well
            jumps.push((mid, 1.0));
        } else {
            let m = if i == 0 {
                V_MIN * jumps[0].1
            } else {
                jumps[i - 1].1
            };
            jumps.insert(i, (mid, m));
        }
    }
    Some(jumps)
}

/// Minimizes `Q_beta` over step c.d.f.s with at most `k` jumps.
///
/// Runs `restarts` seeded random starts (seed `seed + r * SEED_STRIDE`), an
/// evenly spaced start and the padded warm start, keeps the lowest value
/// (ties to the earliest start) and cleans the minimizer by merging atoms
/// closer than [`CLEANUP_TOL`] and dropping lighter ones.
pub fn krsb_minimize(
    spec: &MixtureSpec,
    beta: f64,
    k: usize,
    opts: &KrsbOptions,
) -> Result<KrsbResult> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::Domain("restarts must be at least 1".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta = {beta} must be positive")));
    }

    let n = 2 * k - 1;
    let mut lower = vec![0.0; k];
    lower.extend(vec![V_MIN; k - 1]);
    let mut upper = vec![U_MAX; k];
    upper.extend(vec![1.0; k - 1]);

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(opts.restarts + 2);
    let warm = opts.warm_start.as_ref().and_then(|w| pad_to(w, k));
    if let Some(w) = &warm {
        starts.push(encode(w));
    }
    let even: Vec<(f64, f64)> = (0..k)
        .map(|i| (0.9 * i as f64 / k as f64, (i + 1) as f64 / k as f64))
        .collect();
    starts.push(encode(&even));
    for r in 0..opts.restarts {
        let seed = opts.seed.wrapping_add(SEED_STRIDE.wrapping_mul(r as u64));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        starts.push(random_start(&mut rng, k));
    }
    debug_assert!(starts.iter().all(|s| s.len() == n));

    let box_opts = BoxOptions {
        grad_tol: opts.tol,
        max_evals: opts.max_evals,
        memory: 10,
    };
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| {
            minimize_box(
                |x| value_and_grad(spec, beta, k, x),
                x0,
                &lower,
                &upper,
                &box_opts,
            )
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.evals).sum();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .map(|(_, r)| r)
        .unwrap();

    let raw = StepCDF::from_atoms(&jumps_to_atoms(&decode(k, &best.x)), 0.0, 0.0)?;
    let cleaned = raw.cleaned(CLEANUP_TOL, CLEANUP_TOL)?;
    let value = super::cs_value(spec, beta, &cleaned, None)?;
    let mut result = KrsbResult {
        alpha: cleaned,
        value,
        converged: best.converged,
        grad_norm: best.grad_norm,
        evaluations,
    };
    if let Some(w) = &opts.warm_start {
        let wv = super::cs_value(spec, beta, w, None)?;
        if wv < result.value {
            result.alpha = w.clone();
            result.value = wv;
        }
    }
    Ok(result)
}

fn jumps_to_atoms(jumps: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut prev = 0.0;
    jumps
        .iter()
        .map(|&(q, m)| {
            let w = m - prev;
            prev = m;
            (q, w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_roundtrip() {
        let jumps = vec![(0.0, 0.2), (0.3, 0.5), (0.75, 1.0)];
        let back = decode(3, &encode(&jumps));
        for (a, b) in jumps.iter().zip(&back) {
            assert!((a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
        }
    }

    #[test]
    fn box_gradient_matches_finite_difference() {
        let spec = MixtureSpec::two_term(0.3, 4).unwrap();
        let x = encode(&[(0.1, 0.2), (0.3, 0.45), (0.6, 0.7), (0.8, 1.0)]);
        let (_, g) = value_and_grad(&spec, 1.8, 4, &x);
        for i in 0..x.len() {
            let h = 1e-7;
            let (mut up, mut dn) = (x.clone(), x.clone());
            up[i] += h;
            dn[i] -= h;
            let fd = (value_and_grad(&spec, 1.8, 4, &up).0 - value_and_grad(&spec, 1.8, 4, &dn).0)
                / (2.0 * h);
            assert!(
                (fd - g[i]).abs() < 1e-6 * (1.0 + fd.abs()),
                "coord {i}: fd {fd} analytic {}",
                g[i]
            );
        }
    }

    #[test]
    fn padding_keeps_the_measure() {
        let a = StepCDF::one_rsb(0.4, 0.6).unwrap();
        let padded = pad_to(&a, 5).unwrap();
        assert_eq!(padded.len(), 5);
        let p = Profile::from_jumps(&padded);
        for t in [0.0, 0.2, 0.59, 0.61, 0.9] {
            assert!((p.tail(t) - a.tail(t)).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn high_temperature_collapses_to_delta_zero() {
        let spec = MixtureSpec::pure(4).unwrap();
        let r = krsb_minimize(&spec, 0.1, 3, &KrsbOptions::default()).unwrap();
        assert_eq!(r.alpha, StepCDF::delta_zero());
        assert!((r.value - 0.005).abs() < 1e-12);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let spec = MixtureSpec::pure(4).unwrap();
        let opts = KrsbOptions {
            seed: 7,
            ..Default::default()
        };
        let a = krsb_minimize(&spec, 2.0, 2, &opts).unwrap();
        let b = krsb_minimize(&spec, 2.0, 2, &opts).unwrap();
        assert_eq!(a, b);
    }
}
