//! The Crisanti-Sommers functional
//!
//! ```text
//! Q(alpha) = 1/2 ( beta^2 int_0^1 xi'(s) alpha(s) ds
//!                  + int_0^shat ds / alphahat(s) + log(1 - shat) ),
//! alphahat(s) = int_s^1 alpha,
//! ```
//!
//! its first variation `G(t) = beta^2 xi'(t) - int_0^t ds / alphahat(s)^2`,
//! the primitive `f(t) = int_0^t G`, and the optimality certificate built
//! from `f`.
//!
//! For step functions `alphahat` is piecewise linear, so every integral
//! above has a closed form on each piece. Those closed forms are evaluated
//! through [`numeric::neg_log1m_over`] and [`numeric::log1m_remainder`] so
//! that pieces with tiny slope do not cancel.

mod certificate;
mod krsb;

pub use certificate::{certify, Certificate, CertifyOptions};
pub use krsb::{krsb_minimize, KrsbOptions, KrsbResult};

use crate::error::{Error, Result};
use crate::measures::{ParisiMeasure, StepCDF, INVARIANT_TOL};
use crate::mixture::MixtureSpec;
use crate::numeric;

/// Piecewise description of a step c.d.f. with precomputed prefix integrals.
///
/// Segment `j` is `[starts[j], starts[j+1])` (the last one ends at 1) and
/// carries the constant value `values[j]`. Zero-length segments and equal
/// consecutive values are allowed, which lets the optimizer work with
/// degenerate parameter vectors directly.
#[derive(Debug, Clone)]
pub(crate) struct Profile {
    starts: Vec<f64>,
    values: Vec<f64>,
    /// `alphahat(starts[j])`
    tails: Vec<f64>,
    /// `int_0^{starts[j]} ds / alphahat^2`
    inv_sq: Vec<f64>,
    /// `int_0^{starts[j]} (int_0^s du / alphahat(u)^2) ds`
    inv_sq_cum: Vec<f64>,
}

impl Profile {
    /// `jumps` are `(q_i, m_i)` with non-decreasing locations in `[0, 1)` and
    /// non-decreasing values ending at 1.
    pub(crate) fn from_jumps(jumps: &[(f64, f64)]) -> Self {
        let mut starts = Vec::with_capacity(jumps.len() + 1);
        let mut values = Vec::with_capacity(jumps.len() + 1);
        starts.push(0.0);
        values.push(0.0);
        for &(q, m) in jumps {
            starts.push(q);
            values.push(m);
        }
        let n = starts.len();
        let mut tails = vec![0.0; n];
        let mut acc = 0.0;
        for j in (0..n).rev() {
            let end = if j + 1 < n { starts[j + 1] } else { 1.0 };
            acc += values[j] * (end - starts[j]);
            tails[j] = acc;
        }
        let mut inv_sq = vec![0.0; n];
        let mut inv_sq_cum = vec![0.0; n];
        for j in 0..n - 1 {
            let len = starts[j + 1] - starts[j];
            let a = tails[j];
            let b = tails[j + 1];
            let r = if a > 0.0 { values[j] * len / a } else { 0.0 };
            inv_sq[j + 1] = inv_sq[j] + if len > 0.0 { len / (a * b) } else { 0.0 };
            inv_sq_cum[j + 1] = inv_sq_cum[j]
                + len * inv_sq[j]
                + if len > 0.0 {
                    len * len * numeric::log1m_remainder(r) / (a * a)
                } else {
                    0.0
                };
        }
        Profile {
            starts,
            values,
            tails,
            inv_sq,
            inv_sq_cum,
        }
    }

    pub(crate) fn from_step(alpha: &StepCDF) -> Self {
        Self::from_jumps(alpha.jumps())
    }

    fn segment(&self, t: f64) -> usize {
        self.starts.partition_point(|&s| s <= t).saturating_sub(1)
    }

    fn seg_end(&self, j: usize) -> f64 {
        self.starts.get(j + 1).copied().unwrap_or(1.0)
    }

    /// `alphahat(t)`.
    pub(crate) fn tail(&self, t: f64) -> f64 {
        let j = self.segment(t);
        let end = self.seg_end(j);
        let tail_end = self.tails.get(j + 1).copied().unwrap_or(0.0);
        tail_end + self.values[j] * (end - t)
    }

    /// `int_0^t ds / alphahat(s)^2` for `t < 1`.
    pub(crate) fn inv_sq_integral(&self, t: f64) -> f64 {
        let j = self.segment(t);
        let len = t - self.starts[j];
        if len <= 0.0 {
            return self.inv_sq[j];
        }
        self.inv_sq[j] + len / (self.tails[j] * self.tail(t))
    }

    /// `int_0^t int_0^s du / alphahat(u)^2 ds` for `t < 1`.
    pub(crate) fn inv_sq_double(&self, t: f64) -> f64 {
        let j = self.segment(t);
        let len = t - self.starts[j];
        if len <= 0.0 {
            return self.inv_sq_cum[j];
        }
        let a = self.tails[j];
        let r = self.values[j] * len / a;
        self.inv_sq_cum[j]
            + len * self.inv_sq[j]
            + len * len * numeric::log1m_remainder(r) / (a * a)
    }

    /// `int_0^shat ds / alphahat(s)` for `shat < 1`.
    pub(crate) fn inv_integral(&self, shat: f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.starts.len() {
            let a = self.starts[j];
            if a >= shat {
                break;
            }
            let b = self.seg_end(j).min(shat);
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            if j + 1 == self.starts.len() && self.values[j] == 1.0 {
                // alphahat(s) = 1 - s here
                acc += (-a).ln_1p() - (-b).ln_1p();
                continue;
            }
            let ta = self.tails[j];
            acc += len / ta * numeric::neg_log1m_over(self.values[j] * len / ta);
        }
        acc
    }

    /// `int_0^1 xi'(s) alpha(s) ds`.
    pub(crate) fn energy_term(&self, spec: &MixtureSpec) -> f64 {
        (0..self.starts.len())
            .map(|j| {
                let v = self.values[j];
                if v == 0.0 {
                    0.0
                } else {
                    v * (spec.xi0(self.seg_end(j)) - spec.xi0(self.starts[j]))
                }
            })
            .sum()
    }

    pub(crate) fn cs_value(&self, spec: &MixtureSpec, beta: f64, shat: f64) -> f64 {
        0.5 * (beta * beta * self.energy_term(spec) + self.inv_integral(shat) + (-shat).ln_1p())
    }

    pub(crate) fn g(&self, spec: &MixtureSpec, beta: f64, t: f64) -> f64 {
        beta * beta * spec.xi1(t) - self.inv_sq_integral(t)
    }

    pub(crate) fn f(&self, spec: &MixtureSpec, beta: f64, t: f64) -> f64 {
        if t >= 1.0 {
            return f64::NEG_INFINITY;
        }
        beta * beta * spec.xi0(t) - self.inv_sq_double(t)
    }

    /// Gradient of `Q` with respect to the jump locations and the values
    /// `m_1..m_{k-1}` (the last value is pinned to 1).
    pub(crate) fn gradient(&self, spec: &MixtureSpec, beta: f64) -> (Vec<f64>, Vec<f64>) {
        let k = self.starts.len() - 1;
        let mut d_loc = Vec::with_capacity(k);
        let mut d_val = Vec::with_capacity(k.saturating_sub(1));
        for i in 1..=k {
            let jump = self.values[i] - self.values[i - 1];
            d_loc.push(if jump == 0.0 {
                0.0
            } else {
                -0.5 * jump * self.g(spec, beta, self.starts[i])
            });
            if i < k {
                let (a, b) = (self.starts[i], self.seg_end(i));
                d_val.push(if b > a {
                    0.5 * (self.f(spec, beta, b) - self.f(spec, beta, a))
                } else {
                    0.0
                });
            }
        }
        (d_loc, d_val)
    }
}

/// `Q_beta(alpha)`. `shat` defaults to the top atom and must satisfy
/// `alpha(shat) = 1` and `shat < 1 - 1e-12`.
pub fn cs_value(spec: &MixtureSpec, beta: f64, alpha: &StepCDF, shat: Option<f64>) -> Result<f64> {
    let top = alpha.top();
    let shat = shat.unwrap_or(top);
    if !(shat < 1.0 - INVARIANT_TOL) {
        return Err(Error::Domain(format!("shat = {shat} must be below 1")));
    }
    if shat < top {
        return Err(Error::Domain(format!(
            "alpha(shat) < 1: shat = {shat} lies below the top atom {top}"
        )));
    }
    Ok(Profile::from_step(alpha).cs_value(spec, beta, shat))
}

/// `Q_beta` of an arbitrary measure. The closed form is evaluated by
/// quadrature with `shat = q`.
pub fn cs_value_measure(spec: &MixtureSpec, beta: f64, measure: &ParisiMeasure) -> Result<f64> {
    match measure {
        ParisiMeasure::Atomic(step) => cs_value(spec, beta, step, None),
        ParisiMeasure::FrsbClosedForm { q, .. } => {
            let q = *q;
            let energy = numeric::integrate(|s| spec.xi1(s) * measure.cdf_at(s), 0.0, q, 1e-13)
                + spec.xi0(1.0)
                - spec.xi0(q);
            let entropy = numeric::integrate(|s| 1.0 / measure.tail_integral(s), 0.0, q, 1e-12);
            Ok(0.5 * (beta * beta * energy + entropy + (-q).ln_1p()))
        }
    }
}

/// `G(t) = beta^2 xi'(t) - int_0^t ds / alphahat(s)^2`.
pub fn g_function(spec: &MixtureSpec, beta: f64, alpha: &StepCDF, t: f64) -> Result<f64> {
    check_t(t)?;
    if t >= 1.0 {
        return Err(Error::Degenerate("alphahat vanishes at t = 1".into()));
    }
    Ok(Profile::from_step(alpha).g(spec, beta, t))
}

/// `f(t) = int_0^t G`, in closed form on each piece. `f(1) = -inf`.
pub fn f_function(spec: &MixtureSpec, beta: f64, alpha: &StepCDF, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(Profile::from_step(alpha).f(spec, beta, t))
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain(format!("t = {t} outside [0, 1]")))
    }
}

/// Derivative of `Q` along the segment from `alpha_from` towards `alpha_to`:
/// `d/dl Q(alpha_from + l (alpha_to - alpha_from))` at `l = 0`, which equals
/// `1/2 int (alpha_to - alpha_from) G(.; alpha_from)`.
pub fn directional_derivative(
    spec: &MixtureSpec,
    beta: f64,
    alpha_from: &StepCDF,
    alpha_to: &StepCDF,
) -> f64 {
    let profile = Profile::from_step(alpha_from);
    let mut knots: Vec<f64> = alpha_from
        .jumps()
        .iter()
        .chain(alpha_to.jumps())
        .map(|j| j.0)
        .collect();
    knots.push(0.0);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let upper = alpha_from.top().max(alpha_to.top());
    let mut acc = 0.0;
    let mut f_prev = profile.f(spec, beta, 0.0);
    for (i, &a) in knots.iter().enumerate() {
        if a >= upper {
            break;
        }
        let b = knots.get(i + 1).copied().unwrap_or(upper).min(upper);
        let diff = alpha_to.cdf(a) - alpha_from.cdf(a);
        let f_b = profile.f(spec, beta, b);
        if diff != 0.0 {
            acc += diff * (f_b - f_prev);
        }
        f_prev = f_b;
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quartic() -> MixtureSpec {
        MixtureSpec::pure(4).unwrap()
    }

    #[test]
    fn delta_zero_value_and_shat_invariance() {
        let spec = MixtureSpec::two_term(0.3, 6).unwrap();
        let d0 = StepCDF::delta_zero();
        let beta = 1.7;
        let v = cs_value(&spec, beta, &d0, None).unwrap();
        assert!((v - beta * beta * spec.xi0(1.0) / 2.0).abs() < 1e-15);
        let v2 = cs_value(&spec, beta, &d0, Some(0.5)).unwrap();
        assert!((v - v2).abs() < 1e-15);
    }

    #[test]
    fn shat_domain_errors() {
        let a = StepCDF::one_rsb(0.4, 0.6).unwrap();
        let spec = quartic();
        assert!(cs_value(&spec, 1.0, &a, Some(0.5)).is_err());
        assert!(cs_value(&spec, 1.0, &a, Some(1.0)).is_err());
        assert!(cs_value(&spec, 1.0, &a, Some(0.99)).is_ok());
    }

    #[test]
    fn one_rsb_value_matches_hand_formula() {
        let (m, q, beta) = (0.35, 0.8, 2.0);
        let spec = quartic();
        let a = StepCDF::one_rsb(m, q).unwrap();
        let x = m * q / (1.0 - q);
        let expected = 0.5
            * (beta * beta * (1.0 - (1.0 - m) * q.powi(4)) + (1.0 + x).ln() / m + (1.0 - q).ln());
        assert!((cs_value(&spec, beta, &a, None).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn g_for_delta_zero() {
        let spec = MixtureSpec::two_term(0.2, 4).unwrap();
        let d0 = StepCDF::delta_zero();
        for t in [0.0, 0.1, 0.5, 0.9] {
            let g = g_function(&spec, 1.3, &d0, t).unwrap();
            let expected = 1.69 * spec.xi1(t) - t / (1.0 - t);
            assert!((g - expected).abs() < 1e-13, "t = {t}");
        }
        assert_eq!(g_function(&spec, 1.3, &d0, 0.0).unwrap(), 0.0);
        // f reduces to beta^2 xi(t) + t + log(1 - t)
        for t in [0.2, 0.7] {
            let f = f_function(&spec, 1.3, &d0, t).unwrap();
            assert!((f - (1.69 * spec.xi0(t) + t + (1.0 - t).ln())).abs() < 1e-13);
        }
        assert_eq!(f_function(&spec, 1.3, &d0, 0.0).unwrap(), 0.0);
        assert!(f_function(&spec, 1.3, &d0, 1.0).unwrap().is_infinite());
    }

    #[test]
    fn directional_derivative_zero_direction() {
        let a = StepCDF::new(vec![(0.0, 0.2), (0.3, 0.5), (0.6, 1.0)]).unwrap();
        assert_eq!(directional_derivative(&quartic(), 2.0, &a, &a), 0.0);
    }

    fn arb_step() -> impl Strategy<Value = StepCDF> {
        (1usize..6).prop_flat_map(|k| {
            (
                prop::collection::vec(0.0f64..0.95, k),
                prop::collection::vec(0.02f64..1.0, k),
            )
                .prop_filter_map("valid", |(mut qs, ws)| {
                    qs.sort_by(f64::total_cmp);
                    let atoms: Vec<_> = qs.into_iter().zip(ws).collect();
                    StepCDF::from_atoms(&atoms, 1e-4, 1e-4).ok()
                })
        })
    }

    fn arb_spec() -> impl Strategy<Value = MixtureSpec> {
        prop::collection::btree_map(2u32..8, 0.1f64..1.2, 1..4)
            .prop_filter_map("valid", |m| MixtureSpec::new(m).ok())
    }

    proptest! {
        #[test]
        fn g_and_f_match_quadrature(spec in arb_spec(), beta in 0.2f64..3.0, a in arb_step(), t in 0.0f64..0.97) {
            let p = Profile::from_step(&a);
            // G from a quadrature of 1/alphahat^2, f from a quadrature of G
            let mut knots: Vec<f64> = a.jumps().iter().map(|j| j.0).filter(|&q| q < t).collect();
            knots.insert(0, 0.0);
            knots.push(t);
            knots.dedup();
            let inv2: f64 = knots.windows(2).map(|w| numeric::integrate(|s| 1.0 / a.tail(s).powi(2), w[0], w[1], 1e-13)).sum();
            let g_quad = beta * beta * spec.xi1(t) - inv2;
            prop_assert!((p.g(&spec, beta, t) - g_quad).abs() <= 1e-9 * (1.0 + g_quad.abs()));
            let f_quad: f64 = knots.windows(2).map(|w| numeric::integrate(|s| p.g(&spec, beta, s), w[0], w[1], 1e-12)).sum();
            prop_assert!((p.f(&spec, beta, t) - f_quad).abs() <= 1e-9 * (1.0 + f_quad.abs()));
            let inv1: f64 = knots.windows(2).map(|w| numeric::integrate(|s| 1.0 / a.tail(s), w[0], w[1], 1e-13)).sum();
            if t >= a.top() {
                let direct = p.inv_integral(t);
                prop_assert!((direct - inv1).abs() <= 1e-9 * (1.0 + inv1.abs()));
            }
        }

        #[test]
        fn shat_invariance(spec in arb_spec(), beta in 0.2f64..3.0, a in arb_step(), u in 0.0f64..0.999) {
            let top = a.top();
            let shat = top + u * (1.0 - top) * 0.999;
            let v0 = cs_value(&spec, beta, &a, None).unwrap();
            let v1 = cs_value(&spec, beta, &a, Some(shat)).unwrap();
            prop_assert!((v0 - v1).abs() <= 1e-10);
        }

        #[test]
        fn strict_convexity(spec in arb_spec(), beta in 0.2f64..3.0, a in arb_step(), b in arb_step()) {
            let l1 = a.l1_distance(&b);
            prop_assume!(l1 > 1e-3);
            let mid = a.mix(&b, 0.5).unwrap();
            let qa = cs_value(&spec, beta, &a, None).unwrap();
            let qb = cs_value(&spec, beta, &b, None).unwrap();
            let qm = cs_value(&spec, beta, &mid, None).unwrap();
            prop_assert!(qm < 0.5 * qa + 0.5 * qb - 1e-12 * l1, "mid {} ends {} {}", qm, qa, qb);
        }

        #[test]
        fn directional_derivative_matches_finite_difference(spec in arb_spec(), beta in 0.2f64..3.0, a in arb_step(), b in arb_step()) {
            let dd = directional_derivative(&spec, beta, &a, &b);
            let h = 1e-6;
            let plus = a.mix(&b, h).unwrap();
            let minus_atoms: Vec<(f64, f64)> = a.atoms().into_iter().map(|(q, w)| (q, (1.0 + h) * w))
                .chain(b.atoms().into_iter().map(|(q, w)| (q, -h * w))).collect();
            // alpha - h (beta - alpha) may leave the cone; fall back to a one-sided difference
            let qa = cs_value(&spec, beta, &a, None).unwrap();
            let qp = cs_value(&spec, beta, &plus, None).unwrap();
            let fd = match signed_step(&minus_atoms) {
                Some(minus) => (qp - cs_value(&spec, beta, &minus, None).unwrap()) / (2.0 * h),
                None => (qp - qa) / h,
            };
            let tol = if signed_step(&minus_atoms).is_some() { 1e-5 } else { 1e-4 };
            prop_assert!((dd - fd).abs() <= tol * dd.abs().max(1e-2), "dd {} fd {}", dd, fd);
        }

        #[test]
        fn analytic_gradient_matches_finite_difference(spec in arb_spec(), beta in 0.2f64..3.0, a in arb_step()) {
            let p = Profile::from_step(&a);
            let (dl, dv) = p.gradient(&spec, beta);
            let jumps = a.jumps().to_vec();
            let h = 1e-7;
            for i in 0..jumps.len() {
                let mut up = jumps.clone();
                let mut dn = jumps.clone();
                up[i].0 += h;
                dn[i].0 -= h;
                if dn[i].0 < 0.0 { continue; }
                let fd = (Profile::from_jumps(&up).cs_value(&spec, beta, 0.999) - Profile::from_jumps(&dn).cs_value(&spec, beta, 0.999)) / (2.0 * h);
                prop_assert!((fd - dl[i]).abs() <= 1e-5 * (1.0 + fd.abs()), "loc {} fd {} an {}", i, fd, dl[i]);
                if i + 1 < jumps.len() {
                    let mut up = jumps.clone();
                    let mut dn = jumps.clone();
                    up[i].1 += h;
                    dn[i].1 -= h;
                    let fd = (Profile::from_jumps(&up).cs_value(&spec, beta, 0.999) - Profile::from_jumps(&dn).cs_value(&spec, beta, 0.999)) / (2.0 * h);
                    prop_assert!((fd - dv[i]).abs() <= 1e-5 * (1.0 + fd.abs()), "val {} fd {} an {}", i, fd, dv[i]);
                }
            }
        }
    }

    /// Builds a step c.d.f. from signed atoms when the cumulative sums stay
    /// non-decreasing.
    fn signed_step(atoms: &[(f64, f64)]) -> Option<StepCDF> {
        let mut atoms = atoms.to_vec();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (q, w) in atoms {
            match merged.last_mut() {
                Some(l) if l.0 == q => l.1 += w,
                _ => merged.push((q, w)),
            }
        }
        if merged.iter().any(|a| a.1 < -1e-15) {
            return None;
        }
        let pos: Vec<_> = merged.into_iter().filter(|a| a.1 > 1e-15).collect();
        StepCDF::from_atoms(&pos, 0.0, 0.0).ok()
    }
}
