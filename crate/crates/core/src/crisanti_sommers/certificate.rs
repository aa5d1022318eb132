use serde::{Deserialize, Serialize};

use super::Profile;
use crate::measures::ParisiMeasure;
use crate::mixture::MixtureSpec;

/// First-order optimality check: `sup f <= tol_sup` on `[0, 1)` and
/// `|f| <= tol_supp` on the support of the measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub sup_f: f64,
    pub argmax_f: f64,
    pub max_abs_f_on_support: f64,
    pub grid_size: usize,
    pub tol_sup: f64,
    pub tol_supp: f64,
    pub verdict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub grid: usize,
    pub tol_sup: f64,
    pub tol_supp: f64,
    /// Cells used to discretize a closed-form measure before evaluating `f`.
    pub frsb_resolution: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            grid: 10_000,
            tol_sup: 1e-6,
            tol_supp: 1e-6,
            frsb_resolution: 10_000,
        }
    }
}

/// Evaluates `f` on `t_i = i / grid` for `i < grid` and on every support
/// point. `f(1) = -inf` always, so the right endpoint is skipped.
///
/// A closed-form measure is replaced by its cell-average discretization;
/// the resulting error in `f` is of order `(q / resolution)^2`. Its support
/// is `[0, q]` when `xi''' > 0` there, and otherwise the jump at `q` (plus 0
/// when the density is positive at 0).
pub fn certify(
    spec: &MixtureSpec,
    beta: f64,
    measure: &ParisiMeasure,
    opts: &CertifyOptions,
) -> crate::Result<Certificate> {
    let grid = opts.grid.max(1);
    let step = measure.discretize(opts.frsb_resolution)?;
    let profile = Profile::from_step(&step);
    let f = |t: f64| profile.f(spec, beta, t);

    let mut sup_f = f64::NEG_INFINITY;
    let mut argmax = 0.0;
    let mut track = |t: f64, v: f64| {
        if v > sup_f {
            sup_f = v;
            argmax = t;
        }
    };

    let continuous_top = match measure {
        ParisiMeasure::FrsbClosedForm { q, mixture, .. } if mixture.has_cubic_or_higher() => {
            Some(*q)
        }
        _ => None,
    };

    let mut max_abs_supp: f64 = 0.0;
    for i in 0..grid {
        let t = i as f64 / grid as f64;
        let v = f(t);
        track(t, v);
        if let Some(q) = continuous_top {
            if t <= q {
                max_abs_supp = max_abs_supp.max(v.abs());
            }
        }
    }
    let support: Vec<f64> = match measure {
        ParisiMeasure::Atomic(s) => s.jumps().iter().map(|j| j.0).collect(),
        ParisiMeasure::FrsbClosedForm { q, .. } => {
            let mut pts: Vec<f64> = if continuous_top.is_some() {
                step.jumps().iter().map(|j| j.0).collect()
            } else {
                vec![*q]
            };
            if measure.mass_of_zero() > 0.0 || continuous_top.is_some() {
                pts.push(0.0);
            }
            pts
        }
    };
    for &t in &support {
        let v = f(t);
        track(t, v);
        max_abs_supp = max_abs_supp.max(v.abs());
    }

    let verdict = sup_f <= opts.tol_sup && max_abs_supp <= opts.tol_supp;
    Ok(Certificate {
        sup_f,
        argmax_f: argmax,
        max_abs_f_on_support: max_abs_supp,
        grid_size: grid,
        tol_sup: opts.tol_sup,
        tol_supp: opts.tol_supp,
        verdict,
    })
}
