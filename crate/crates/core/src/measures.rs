//! Cumulative distribution functions on `[0, 1]` used as Parisi measure
//! candidates: finite-atomic step functions and the closed-form measure with
//! a continuous part and a single jump at its top.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::MixtureSpec;
use crate::numeric;

/// Absolute tolerance for equality of reals in invariant checks.
pub const INVARIANT_TOL: f64 = 1e-12;

/// Finite-atomic c.d.f. `alpha`, right-continuous: `alpha(s) = 0` for
/// `s < q_1` and `alpha(s) = m_i` on `[q_i, q_{i+1})`, with `q_{k+1} = 1`.
///
/// Invariants: `0 <= q_1 < ... < q_k < 1` and `0 < m_1 < ... < m_k = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepCdf")]
pub struct StepCDF {
    jumps: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawStepCdf {
    jumps: Vec<(f64, f64)>,
}

impl TryFrom<RawStepCdf> for StepCDF {
    type Error = Error;

    fn try_from(raw: RawStepCdf) -> Result<Self> {
        StepCDF::new(raw.jumps)
    }
}

impl StepCDF {
    /// Validates `(q_i, m_i)` pairs. A final value within
    /// [`INVARIANT_TOL`] of 1 is snapped to exactly 1.
    pub fn new(mut jumps: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidMeasure(msg));
        if jumps.is_empty() {
            return bad("a step c.d.f. needs at least one jump".into());
        }
        for (i, &(q, m)) in jumps.iter().enumerate() {
            if !q.is_finite() || !m.is_finite() {
                return bad(format!("jump {i} is not finite"));
            }
        }
        if jumps[0].0 < 0.0 {
            return bad(format!("first location {} is negative", jumps[0].0));
        }
        if jumps[0].1 <= INVARIANT_TOL {
            return bad(format!("first value {} must be positive", jumps[0].1));
        }
        for i in 1..jumps.len() {
            let (q0, m0) = jumps[i - 1];
            let (q1, m1) = jumps[i];
            if q1 - q0 <= INVARIANT_TOL {
                return bad(format!(
                    "locations not strictly increasing at index {i}: {q0} then {q1}"
                ));
            }
            if m1 - m0 <= INVARIANT_TOL {
                return bad(format!(
                    "values not strictly increasing at index {i}: {m0} then {m1}"
                ));
            }
        }
        let last = jumps.last_mut().unwrap();
        if (last.1 - 1.0).abs() > INVARIANT_TOL {
            return bad(format!("last value {} must equal 1", last.1));
        }
        last.1 = 1.0;
        if last.0 >= 1.0 - INVARIANT_TOL {
            return bad(format!("last location {} must be below 1", last.0));
        }
        Ok(StepCDF { jumps })
    }

    /// The Dirac mass at 0.
    pub fn delta_zero() -> Self {
        StepCDF {
            jumps: vec![(0.0, 1.0)],
        }
    }

    /// The Dirac mass at `q` in `[0, 1)`.
    pub fn delta(q: f64) -> Result<Self> {
        Self::new(vec![(q, 1.0)])
    }

    /// The two-atom measure `m delta_0 + (1 - m) delta_q`.
    pub fn one_rsb(m: f64, q: f64) -> Result<Self> {
        Self::new(vec![(0.0, m), (q, 1.0)])
    }

    /// Builds a measure from `(location, mass)` atoms. Atoms are sorted,
    /// atoms with mass below `mass_tol` are folded into their right
    /// neighbour (or the left one for the topmost atom), and atoms closer than
    /// `loc_tol` are merged at the lower location. Masses are renormalized.
    pub fn from_atoms(atoms: &[(f64, f64)], loc_tol: f64, mass_tol: f64) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atom with positive mass".into()));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = atoms.iter().map(|a| a.1).sum();

        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (loc, mass) in atoms {
            match merged.last_mut() {
                Some(last) if loc - last.0 < loc_tol.max(INVARIANT_TOL) => last.1 += mass,
                _ => merged.push((loc, mass)),
            }
        }
        let mut kept: Vec<(f64, f64)> = Vec::with_capacity(merged.len());
        let mut carry = 0.0;
        for (loc, mass) in merged {
            let mass = mass + carry;
            if mass < mass_tol.max(INVARIANT_TOL) {
                carry = mass;
            } else {
                carry = 0.0;
                kept.push((loc, mass));
            }
        }
        match kept.last_mut() {
            Some(last) => last.1 += carry,
            None => {
                return Err(Error::InvalidMeasure(
                    "all atoms fell below the mass tolerance".into(),
                ))
            }
        }
        let mut cum = 0.0;
        let jumps = kept
            .iter()
            .map(|&(loc, mass)| {
                cum += mass;
                (loc, cum / total)
            })
            .collect::<Vec<_>>();
        let mut jumps = jumps;
        jumps.last_mut().unwrap().1 = 1.0;
        Self::new(jumps)
    }

    /// Drops or merges atoms per [`StepCDF::from_atoms`].
    pub fn cleaned(&self, loc_tol: f64, mass_tol: f64) -> Result<Self> {
        Self::from_atoms(&self.atoms(), loc_tol, mass_tol)
    }

    /// Pointwise convex combination `(1 - lambda) self + lambda other`.
    pub fn mix(&self, other: &StepCDF, lambda: f64) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = self
            .atoms()
            .into_iter()
            .map(|(q, w)| (q, (1.0 - lambda) * w))
            .collect();
        atoms.extend(other.atoms().into_iter().map(|(q, w)| (q, lambda * w)));
        Self::from_atoms(&atoms, 0.0, 0.0)
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// `(location, mass)` pairs.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut prev = 0.0;
        self.jumps
            .iter()
            .map(|&(q, m)| {
                let w = m - prev;
                prev = m;
                (q, w)
            })
            .collect()
    }

    /// Location of the top atom, the smallest `s` with `alpha(s) = 1`.
    pub fn top(&self) -> f64 {
        self.jumps.last().unwrap().0
    }

    /// Right-continuous `alpha(s)`.
    pub fn cdf(&self, s: f64) -> f64 {
        let idx = self.jumps.partition_point(|&(q, _)| q <= s);
        if idx == 0 {
            0.0
        } else {
            self.jumps[idx - 1].1
        }
    }

    /// Left limit `alpha(t-) = mu([0, t))`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        let idx = self.jumps.partition_point(|&(q, _)| q < t);
        if idx == 0 {
            0.0
        } else {
            self.jumps[idx - 1].1
        }
    }

    /// Exact `int_s^1 alpha(r) dr`.
    pub fn tail(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let mut acc = 0.0;
        for (i, &(q, m)) in self.jumps.iter().enumerate() {
            let next = self.jumps.get(i + 1).map_or(1.0, |j| j.0);
            let lo = q.max(s);
            if next > lo {
                acc += m * (next - lo);
            }
        }
        acc
    }

    /// Exact `int_0^1 |alpha - other|`.
    pub fn l1_distance(&self, other: &StepCDF) -> f64 {
        let mut knots: Vec<f64> = self
            .jumps
            .iter()
            .chain(other.jumps.iter())
            .map(|j| j.0)
            .collect();
        knots.push(0.0);
        knots.push(1.0);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        knots
            .windows(2)
            .map(|w| (self.cdf(w[0]) - other.cdf(w[0])).abs() * (w[1] - w[0]))
            .sum()
    }
}

/// A Parisi measure candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", try_from = "RawMeasure")]
pub enum ParisiMeasure {
    #[serde(rename = "atomic")]
    Atomic(StepCDF),
    /// `alpha(t) = xi'''(t) / (2 beta xi''(t)^{3/2})` on `[0, q)`, 1 on `[q, 1]`.
    #[serde(rename = "frsb")]
    FrsbClosedForm {
        q: f64,
        beta: f64,
        mixture: MixtureSpec,
    },
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum RawMeasure {
    #[serde(rename = "atomic")]
    Atomic(StepCDF),
    #[serde(rename = "frsb")]
    Frsb {
        q: f64,
        beta: f64,
        mixture: MixtureSpec,
    },
}

impl TryFrom<RawMeasure> for ParisiMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        match raw {
            RawMeasure::Atomic(s) => Ok(ParisiMeasure::Atomic(s)),
            RawMeasure::Frsb { q, beta, mixture } => ParisiMeasure::frsb(mixture, beta, q),
        }
    }
}

/// `xi'''(t) / (2 beta xi''(t)^{3/2})`, the density part of the closed form.
pub fn frsb_density(spec: &MixtureSpec, beta: f64, t: f64) -> f64 {
    spec.xi3(t) / (2.0 * beta * spec.xi2(t).powf(1.5))
}

impl ParisiMeasure {
    /// Validated closed-form measure: `q` in `(0, 1)` and `alpha(q-) <= 1`.
    pub fn frsb(mixture: MixtureSpec, beta: f64, q: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "beta = {beta} must be positive"
            )));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidMeasure(format!("q = {q} must lie in (0, 1)")));
        }
        if !(mixture.xi2(q) > 0.0) {
            return Err(Error::InvalidMeasure("xi''(q) must be positive".into()));
        }
        let top = frsb_density(&mixture, beta, q);
        if top > 1.0 + INVARIANT_TOL {
            return Err(Error::InvalidMeasure(format!(
                "density part reaches {top} > 1 below q"
            )));
        }
        Ok(ParisiMeasure::FrsbClosedForm { q, beta, mixture })
    }

    pub fn as_step(&self) -> Option<&StepCDF> {
        match self {
            ParisiMeasure::Atomic(s) => Some(s),
            ParisiMeasure::FrsbClosedForm { .. } => None,
        }
    }

    /// Right-continuous `alpha(s)`.
    pub fn cdf_at(&self, s: f64) -> f64 {
        match self {
            ParisiMeasure::Atomic(step) => step.cdf(s),
            ParisiMeasure::FrsbClosedForm { q, beta, mixture } => {
                if s >= *q {
                    1.0
                } else if s < 0.0 {
                    0.0
                } else {
                    frsb_density(mixture, *beta, s)
                }
            }
        }
    }

    /// `mu([0, t))`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            ParisiMeasure::Atomic(step) => step.cdf_left(t),
            ParisiMeasure::FrsbClosedForm { q, beta, mixture } => {
                if t > *q {
                    1.0
                } else {
                    frsb_density(mixture, *beta, t)
                }
            }
        }
    }

    /// `int_s^1 alpha`. Exact for atomic measures; adaptive quadrature below
    /// the jump plus the exact `1 - q` above it for the closed form.
    pub fn tail_integral(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            ParisiMeasure::Atomic(step) => step.tail(s),
            ParisiMeasure::FrsbClosedForm { q, beta, mixture } => {
                if s >= *q {
                    1.0 - s
                } else {
                    let cont =
                        numeric::integrate(|t| frsb_density(mixture, *beta, t), s, *q, 1e-12);
                    cont + (1.0 - q)
                }
            }
        }
    }

    /// `c = inf supp mu`.
    pub fn support_min(&self) -> f64 {
        match self {
            ParisiMeasure::Atomic(step) => step.jumps()[0].0,
            ParisiMeasure::FrsbClosedForm { q, mixture, .. } => {
                if mixture.has_cubic_or_higher() {
                    0.0
                } else {
                    *q
                }
            }
        }
    }

    /// `mu({0})`.
    pub fn mass_of_zero(&self) -> f64 {
        match self {
            ParisiMeasure::Atomic(step) => {
                let (q, m) = step.jumps()[0];
                if q == 0.0 {
                    m
                } else {
                    0.0
                }
            }
            ParisiMeasure::FrsbClosedForm { beta, mixture, .. } => {
                frsb_density(mixture, *beta, 0.0)
            }
        }
    }

    /// Number of support points, `None` when the support is infinite.
    pub fn support_size(&self) -> Option<usize> {
        match self {
            ParisiMeasure::Atomic(step) => Some(step.len()),
            ParisiMeasure::FrsbClosedForm { beta, mixture, .. } => {
                if mixture.has_cubic_or_higher() {
                    None
                } else {
                    // density part vanishes identically; the jump at q remains,
                    // plus a possible atom at 0
                    let at_zero = frsb_density(mixture, *beta, 0.0) > 0.0;
                    Some(1 + usize::from(at_zero))
                }
            }
        }
    }

    /// Step approximation. Atomic measures are returned unchanged. The closed
    /// form is averaged over `resolution` equal cells of `[0, q)` (cell
    /// integrals by Gauss-Legendre quadrature), so the tail integral of the
    /// result agrees with the closed form at every cell boundary.
    pub fn discretize(&self, resolution: usize) -> Result<StepCDF> {
        match self {
            ParisiMeasure::Atomic(step) => Ok(step.clone()),
            ParisiMeasure::FrsbClosedForm { q, beta, mixture } => {
                let n = resolution.max(1);
                let h = q / n as f64;
                let mut jumps: Vec<(f64, f64)> = Vec::with_capacity(n + 1);
                for j in 0..n {
                    let a = j as f64 * h;
                    let b = if j + 1 == n { *q } else { (j + 1) as f64 * h };
                    let avg = numeric::gauss_legendre_10(|t| frsb_density(mixture, *beta, t), a, b)
                        / (b - a);
                    let prev = jumps.last().map_or(0.0, |p| p.1);
                    if avg - prev > INVARIANT_TOL && avg < 1.0 - INVARIANT_TOL {
                        jumps.push((a, avg));
                    }
                }
                jumps.push((*q, 1.0));
                StepCDF::new(jumps)
            }
        }
    }

    /// `int_0^1 |alpha - other|`; exact for two atomic measures, otherwise
    /// by quadrature between the jump locations.
    pub fn l1_distance(&self, other: &ParisiMeasure) -> f64 {
        if let (Some(a), Some(b)) = (self.as_step(), other.as_step()) {
            return a.l1_distance(b);
        }
        let mut knots = vec![0.0, 1.0];
        for m in [self, other] {
            match m {
                ParisiMeasure::Atomic(s) => knots.extend(s.jumps().iter().map(|j| j.0)),
                ParisiMeasure::FrsbClosedForm { q, .. } => knots.push(*q),
            }
        }
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        knots
            .windows(2)
            .map(|w| {
                numeric::integrate(
                    |s| (self.cdf_at(s) - other.cdf_at(s)).abs(),
                    w[0],
                    w[1],
                    1e-12,
                )
            })
            .sum()
    }
}
