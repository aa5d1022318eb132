//! The mixture function `xi(x) = sum_p gamma_p^2 x^p` of a spherical mixed
//! p-spin model.
//!
//! A [`MixtureSpec`] is a finite table of degrees and coefficients `gamma_p`.
//! Coefficients are stored as given (not squared); every evaluation squares
//! them. The covariance of the Hamiltonian is `N xi(R)`, so `xi` and its first
//! three derivatives drive everything downstream.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite mixture `xi(x) = sum_p gamma_p^2 x^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture", into = "RawMixture")]
pub struct MixtureSpec {
    coeffs: BTreeMap<u32, f64>,
    even_only: bool,
    gamma1_zero: bool,
}

#[derive(Serialize, Deserialize)]
struct RawMixture {
    // string keys so that the map survives buffering inside tagged enums
    coeffs: BTreeMap<String, f64>,
}

impl TryFrom<RawMixture> for MixtureSpec {
    type Error = Error;

    fn try_from(raw: RawMixture) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(raw.coeffs.len());
        for (key, g) in raw.coeffs {
            let p = key
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidMixture(format!("degree {key:?} is not an integer")))?;
            coeffs.push((p, g));
        }
        MixtureSpec::new(coeffs)
    }
}

impl From<MixtureSpec> for RawMixture {
    fn from(spec: MixtureSpec) -> Self {
        RawMixture {
            coeffs: spec
                .coeffs
                .iter()
                .map(|(p, g)| (p.to_string(), *g))
                .collect(),
        }
    }
}

impl MixtureSpec {
    /// Builds a mixture from `degree -> gamma_p`. Zero coefficients are dropped.
    pub fn new<I>(coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, f64)>,
    {
        let mut table = BTreeMap::new();
        for (p, g) in coeffs {
            if p == 0 {
                return Err(Error::InvalidMixture("degree must be at least 1".into()));
            }
            if !g.is_finite() {
                return Err(Error::InvalidMixture(format!(
                    "coefficient for degree {p} is not finite"
                )));
            }
            if table.contains_key(&p) {
                return Err(Error::InvalidMixture(format!("duplicate degree {p}")));
            }
            table.insert(p, g);
        }
        table.retain(|_, g| *g != 0.0);
        if !table.keys().any(|&p| p >= 2) {
            return Err(Error::InvalidMixture(
                "need at least one nonzero coefficient with degree >= 2".into(),
            ));
        }
        let even_only = table.keys().all(|p| p % 2 == 0);
        let gamma1_zero = !table.contains_key(&1);
        Ok(MixtureSpec {
            coeffs: table,
            even_only,
            gamma1_zero,
        })
    }

    /// Pure p-spin mixture `xi(x) = x^p`.
    pub fn pure(p: u32) -> Result<Self> {
        Self::new([(p, 1.0)])
    }

    /// The two-term family `xi(x) = (1 - c) x^2 + c x^p`.
    pub fn two_term(c: f64, p: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&c) {
            return Err(Error::InvalidMixture(format!("c = {c} must lie in [0, 1)")));
        }
        if p == 2 {
            return Self::pure(2);
        }
        Self::new([(2, (1.0 - c).sqrt()), (p, c.sqrt())])
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, f64> {
        &self.coeffs
    }

    pub fn gamma(&self, p: u32) -> f64 {
        self.coeffs.get(&p).copied().unwrap_or(0.0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn max_degree(&self) -> u32 {
        *self.coeffs.keys().next_back().expect("non-empty mixture")
    }

    pub fn even_only(&self) -> bool {
        self.even_only
    }

    pub fn gamma1_zero(&self) -> bool {
        self.gamma1_zero
    }

    /// The single degree of a pure mixture (any nonzero coefficient).
    pub fn pure_degree(&self) -> Option<u32> {
        if self.coeffs.len() == 1 {
            self.coeffs.keys().next().copied()
        } else {
            None
        }
    }

    pub fn is_pure_two_spin(&self) -> bool {
        self.pure_degree() == Some(2)
    }

    /// True when `xi''' > 0` on `(0, 1]`, i.e. some degree `p >= 3` is present.
    pub fn has_cubic_or_higher(&self) -> bool {
        self.coeffs.keys().any(|&p| p >= 3)
    }

    /// `xi(x)` for `|x| <= 1`.
    pub fn xi(&self, x: f64) -> Result<f64> {
        if !(x.abs() <= 1.0) {
            return Err(Error::Domain(format!(
                "xi evaluated at |x| = {} > 1",
                x.abs()
            )));
        }
        Ok(self.eval_unchecked(0, x))
    }

    /// Term-by-term derivative of order 1, 2 or 3 at `x` in `[0, 1]`.
    pub fn derivative(&self, x: f64, order: u32) -> Result<f64> {
        if !(1..=3).contains(&order) {
            return Err(Error::Domain(format!(
                "derivative order {order} is not in {{1, 2, 3}}"
            )));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!(
                "derivative evaluated at x = {x} outside [0, 1]"
            )));
        }
        Ok(self.eval_unchecked(order, x))
    }

    /// `d^order/dx^order xi` without domain checks. Uses `0^0 = 1`.
    pub fn eval_unchecked(&self, order: u32, x: f64) -> f64 {
        self.coeffs
            .iter()
            .filter(|(&p, _)| p >= order)
            .map(|(&p, &g)| {
                let falling: f64 = (0..order).map(|j| f64::from(p - j)).product();
                g * g * falling * x.powi((p - order) as i32)
            })
            .sum()
    }

    #[inline]
    pub fn xi0(&self, x: f64) -> f64 {
        self.eval_unchecked(0, x)
    }

    #[inline]
    pub fn xi1(&self, x: f64) -> f64 {
        self.eval_unchecked(1, x)
    }

    #[inline]
    pub fn xi2(&self, x: f64) -> f64 {
        self.eval_unchecked(2, x)
    }

    #[inline]
    pub fn xi3(&self, x: f64) -> f64 {
        self.eval_unchecked(3, x)
    }

    /// Classifies `s -> xi''(s)^{-1/2}` on `(0, 1]`.
    ///
    /// Pure mixtures are classified exactly: `xi''(s)^{-1/2}` is a constant
    /// for `p = 2` and a negative power of `s` otherwise. Everything else goes
    /// through a sign test on second differences over the grid
    /// `s_i = i / grid_size`, `i = 1..=grid_size`.
    pub fn curvature_class(&self, grid_size: usize) -> Result<Curvature> {
        if grid_size < 3 {
            return Err(Error::Domain(format!(
                "grid_size = {grid_size} must be at least 3"
            )));
        }
        if let Some(p) = self.pure_degree() {
            return Ok(Curvature {
                class: CurvatureClass::Convex,
                constant: p == 2,
            });
        }
        let h = 1.0 / grid_size as f64;
        let mut psi = Vec::with_capacity(grid_size);
        for i in 1..=grid_size {
            let s = i as f64 * h;
            let d2 = self.xi2(s);
            if !(d2 > 0.0) {
                return Err(Error::Degenerate(format!(
                    "xi''({s}) = {d2} is not positive"
                )));
            }
            psi.push(d2.powf(-0.5));
        }
        let scale = psi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = CURVATURE_TOL * scale;
        let (mut pos, mut neg) = (false, false);
        for w in psi.windows(3) {
            let d = w[0] - 2.0 * w[1] + w[2];
            if d > tol {
                pos = true;
            } else if d < -tol {
                neg = true;
            }
        }
        let (class, constant) = match (pos, neg) {
            (false, false) => (CurvatureClass::Convex, true),
            (true, false) => (CurvatureClass::Convex, false),
            (false, true) => (CurvatureClass::Concave, false),
            (true, true) => (CurvatureClass::Neither, false),
        };
        Ok(Curvature { class, constant })
    }
}

/// Second differences below `CURVATURE_TOL * max|psi|` count as zero.
pub const CURVATURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurvatureClass {
    Convex,
    Concave,
    Neither,
}

/// Result of [`MixtureSpec::curvature_class`]. A constant function is
/// reported as `Convex` with `constant = true`; it is concave as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curvature {
    pub class: CurvatureClass,
    pub constant: bool,
}

impl Curvature {
    pub fn is_concave(&self) -> bool {
        self.class == CurvatureClass::Concave || self.constant
    }

    pub fn is_convex(&self) -> bool {
        self.class == CurvatureClass::Convex
    }
}

impl fmt::Display for MixtureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(p, g)| format!("{p}:{g}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for MixtureSpec {
    type Err = Error;

    /// Parses `"p1:g1,p2:g2,..."` (coefficients are `gamma_p`, not squared)
    /// or a JSON object `{"coeffs": {"p": gamma}}`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(format!("mixture JSON: {e}")));
        }
        let mut entries = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (p, g) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected 'p:gamma', got '{item}'")))?;
            let p: u32 = p
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad degree '{p}'")))?;
            let g: f64 = g
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient '{g}'")))?;
            entries.push((p, g));
        }
        if entries.is_empty() {
            return Err(Error::Parse("empty mixture".into()));
        }
        MixtureSpec::new(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn example() -> MixtureSpec {
        MixtureSpec::two_term(0.07, 4).unwrap()
    }

    #[test]
    fn xi_values() {
        assert_eq!(MixtureSpec::pure(2).unwrap().xi(0.5).unwrap(), 0.25);
        assert_eq!(MixtureSpec::pure(4).unwrap().xi(1.0).unwrap(), 1.0);
        assert_relative_eq!(example().xi(0.5).unwrap(), 0.236875, max_relative = 1e-14);
        assert!(matches!(example().xi(1.5), Err(Error::Domain(_))));
        assert_eq!(MixtureSpec::pure(4).unwrap().xi(-1.0).unwrap(), 1.0);
    }

    #[test]
    fn derivative_values() {
        let sq = MixtureSpec::pure(2).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(sq.derivative(x, 2).unwrap(), 2.0);
        }
        assert_relative_eq!(
            example().derivative(1.0, 3).unwrap(),
            1.68,
            max_relative = 1e-14
        );
        assert_eq!(
            MixtureSpec::pure(4).unwrap().derivative(0.5, 1).unwrap(),
            0.5
        );
        assert_relative_eq!(
            example().derivative(0.0, 2).unwrap(),
            2.0 * 0.93,
            max_relative = 1e-14
        );
        assert!(matches!(sq.derivative(0.5, 0), Err(Error::Domain(_))));
        assert!(matches!(sq.derivative(0.5, 4), Err(Error::Domain(_))));
        assert!(matches!(sq.derivative(1.2, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn curvature_examples() {
        for p in [3, 4, 6, 10] {
            let c = MixtureSpec::pure(p).unwrap().curvature_class(100).unwrap();
            assert_eq!(c.class, CurvatureClass::Convex);
            assert!(!c.constant);
        }
        let c = MixtureSpec::pure(2).unwrap().curvature_class(100).unwrap();
        assert_eq!(c.class, CurvatureClass::Convex);
        assert!(c.constant && c.is_concave());

        // c / (1 - c) <= 1/12 for p = 4
        for c in [0.01, 0.05, 0.07, 1.0 / 13.0] {
            let k = MixtureSpec::two_term(c, 4)
                .unwrap()
                .curvature_class(1000)
                .unwrap();
            assert_eq!(k.class, CurvatureClass::Concave, "c = {c}");
        }
        // well past the boundary the function is concave then convex
        let k = MixtureSpec::two_term(0.5, 4)
            .unwrap()
            .curvature_class(1000)
            .unwrap();
        assert_eq!(k.class, CurvatureClass::Neither);
        assert!(MixtureSpec::pure(4).unwrap().curvature_class(2).is_err());
    }

    #[test]
    fn constructor_invariants() {
        assert!(MixtureSpec::new([(1, 1.0)]).is_err());
        assert!(MixtureSpec::new([(2, 0.0)]).is_err());
        assert!(MixtureSpec::new([(2, 1.0), (2, 0.5)]).is_err());
        assert!(MixtureSpec::new([(0, 1.0)]).is_err());
        assert!(MixtureSpec::new([(2, f64::NAN)]).is_err());
        let s = MixtureSpec::new([(1, 0.5), (2, 1.0)]).unwrap();
        assert!(!s.gamma1_zero() && !s.even_only());
        let s = MixtureSpec::new([(2, 1.0), (4, 0.5), (3, 0.0)]).unwrap();
        assert!(s.gamma1_zero() && s.even_only());
    }

    #[test]
    fn parse_text_and_json() {
        let s: MixtureSpec = "2:0.9644,4:0.2646".parse().unwrap();
        assert_eq!(s.gamma(2), 0.9644);
        assert_eq!(s.gamma(4), 0.2646);
        let j: MixtureSpec = r#"{"coeffs": {"4": 1.0}}"#.parse().unwrap();
        assert_eq!(j, MixtureSpec::pure(4).unwrap());
        assert!("4".parse::<MixtureSpec>().is_err());
        assert!("".parse::<MixtureSpec>().is_err());
        assert!("x:1".parse::<MixtureSpec>().is_err());
        assert!(r#"{"coeffs": {"1": 1.0}}"#.parse::<MixtureSpec>().is_err());
        let back: MixtureSpec = s.to_string().parse().unwrap();
        assert_eq!(back, s);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"coeffs":{"2":0.9644,"4":0.2646}}"#);
    }

    fn arb_spec() -> impl Strategy<Value = MixtureSpec> {
        prop::collection::btree_map(1u32..9, -1.5f64..1.5, 1..5)
            .prop_filter_map("needs a degree >= 2", |m| MixtureSpec::new(m).ok())
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(spec in arb_spec(), x in 0.05f64..0.95) {
            let h = 1e-5;
            for order in 1..=3u32 {
                let fd = (spec.eval_unchecked(order - 1, x + h) - spec.eval_unchecked(order - 1, x - h)) / (2.0 * h);
                let exact = spec.derivative(x, order).unwrap();
                let scale = exact.abs().max(spec.eval_unchecked(order - 1, 1.0).abs()).max(1e-3);
                prop_assert!((fd - exact).abs() <= 1e-6 * scale, "order {} fd {} exact {}", order, fd, exact);
            }
        }

        #[test]
        fn xi_nondecreasing_and_convex(spec in arb_spec(), x in 0.0f64..=1.0) {
            prop_assert!(spec.derivative(x, 1).unwrap() >= 0.0);
            prop_assert!(spec.derivative(x, 2).unwrap() >= 0.0);
        }

        #[test]
        fn even_only_flag_matches_coefficients(spec in arb_spec()) {
            let recomputed = spec.coeffs().iter().all(|(p, g)| p % 2 == 0 || *g == 0.0);
            prop_assert_eq!(spec.even_only(), recomputed);
        }
    }
}
