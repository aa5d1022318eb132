use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `|sigma|^2 = N`.
pub const NORM_TOL: f64 = 1e-9;

/// A point of the sphere of radius `sqrt(N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereState {
    coords: Vec<f64>,
}

impl SphereState {
    /// Checks `|v|^2 = N` to [`NORM_TOL`] relative.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = coords.len() as f64;
        let sq: f64 = coords.iter().map(|x| x * x).sum();
        if coords.is_empty() || (sq - n).abs() > NORM_TOL * n {
            return Err(Error::Domain(format!("|sigma|^2 = {sq} but N = {n}")));
        }
        Ok(SphereState { coords })
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let sq: f64 = coords.iter().map(|x| x * x).sum();
        if !(sq > 0.0 && sq.is_finite()) {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        let f = (coords.len() as f64 / sq).sqrt();
        coords.iter_mut().for_each(|x| *x *= f);
        Ok(SphereState { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }
}

/// A draw from the uniform measure: a Gaussian vector rescaled to norm
/// `sqrt(N)`.
pub fn uniform_sphere_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SphereState {
    assert!(n >= 1, "N must be positive");
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(s) = SphereState::normalized(v) {
            return s;
        }
    }
}

/// `R(s1, s2) = (1/N) sum_i s1_i s2_i`, clamped to `[-1, 1]`.
pub fn overlap(s1: &SphereState, s2: &SphereState) -> Result<f64> {
    if s1.n() != s2.n() {
        return Err(Error::DimensionMismatch {
            expected: s1.n(),
            got: s2.n(),
        });
    }
    let dot: f64 = s1.coords.iter().zip(&s2.coords).map(|(a, b)| a * b).sum();
    Ok((dot / s1.n() as f64).clamp(-1.0, 1.0))
}
