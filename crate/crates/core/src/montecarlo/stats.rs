//! Histograms and two-sample tests for overlap samples.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Fixed-width histogram on `[lo, hi]`; the right edge falls in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram {
            lo,
            hi,
            counts: vec![0; bins.max(1)],
        }
    }

    /// 50 bins of width 0.02 on `[0, 1]`.
    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 50)
    }

    pub fn add(&mut self, x: f64) {
        let bins = self.counts.len();
        let w = (self.hi - self.lo) / bins as f64;
        let i = ((x - self.lo) / w).floor();
        if i.is_nan() || x < self.lo || x > self.hi {
            return;
        }
        self.counts[(i as usize).min(bins - 1)] += 1;
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, xs: I) {
        xs.into_iter().for_each(|x| self.add(x));
    }

    /// `(left, right, count)` rows.
    pub fn rows(&self) -> Vec<(f64, f64, u64)> {
        let bins = self.counts.len();
        let w = (self.hi - self.lo) / bins as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w, c))
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Mean and standard error of the mean (NaN error for fewer than two values).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationTest {
    pub statistic: f64,
    /// 95th percentile of the permutation distribution.
    pub threshold_95: f64,
    pub p_value: f64,
}

impl PermutationTest {
    pub fn passes_95(&self) -> bool {
        self.statistic <= self.threshold_95
    }
}

/// Permutation test of equal distributions using the KS statistic.
pub fn permutation_test<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    n_perm: usize,
    rng: &mut R,
) -> PermutationTest {
    let statistic = ks_statistic(a, b);
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut null: Vec<f64> = (0..n_perm)
        .map(|_| {
            pooled.shuffle(rng);
            let (x, y) = pooled.split_at(a.len());
            ks_statistic(x, y)
        })
        .collect();
    null.sort_by(f64::total_cmp);
    let exceed = null.iter().filter(|&&d| d >= statistic - 1e-15).count();
    let idx = ((0.95 * n_perm as f64).ceil() as usize).clamp(1, n_perm.max(1)) - 1;
    PermutationTest {
        statistic,
        threshold_95: null.get(idx).copied().unwrap_or(f64::NAN),
        p_value: (1 + exceed) as f64 / (1 + n_perm) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn histogram_edges() {
        let mut h = Histogram::unit();
        h.extend([0.0, 0.019, 0.02, 0.5, 1.0, 1.5, -0.1]);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[25], 1);
        assert_eq!(h.counts[49], 1);
        assert_eq!(h.total(), 5);
        let rows = h.rows();
        assert!((rows[1].0 - 0.02).abs() < 1e-15 && (rows[1].1 - 0.04).abs() < 1e-15);
    }

    #[test]
    fn ks_values() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_statistic(&[0.0, 0.1], &[5.0, 6.0]), 1.0);
        assert!((ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[3.5, 4.5]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn permutation_detects_shift_and_accepts_same_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a: Vec<f64> = (0..300).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..300).map(|_| rng.random::<f64>()).collect();
        let c: Vec<f64> = (0..300).map(|_| rng.random::<f64>() + 0.3).collect();
        assert!(permutation_test(&a, &b, 500, &mut rng).passes_95());
        let t = permutation_test(&a, &c, 500, &mut rng);
        assert!(!t.passes_95() && t.p_value < 0.01);
    }

    #[test]
    fn mean_and_error() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(mean_se(&[1.0]).1.is_nan());
    }
}
