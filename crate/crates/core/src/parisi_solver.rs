//! Regime-aware computation of the Parisi measure.
//!
//! Dispatch order: the replica-symmetric test, the two-atom stationarity
//! system for convex curvature, the closed form with a continuous part for
//! concave curvature, and k-RSB minimization for everything else.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::crisanti_sommers::{
    certify, cs_value, cs_value_measure, krsb_minimize, Certificate, CertifyOptions, KrsbOptions,
};
use crate::error::{Error, Result};
use crate::measures::{frsb_density, ParisiMeasure, StepCDF};
use crate::mixture::MixtureSpec;
use crate::numeric;

/// `|sup|` below which the RS test is treated as undecided.
pub const NEAR_CRITICAL: f64 = 1e-10;
/// Residual accepted for the two-atom stationarity system.
pub const ONERSB_RESIDUAL_TOL: f64 = 1e-8;

/// Regime label by support cardinality of the Parisi measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Rs,
    OneRsb,
    Krsb(usize),
    Frsb,
}

impl Regime {
    pub fn from_support_size(size: Option<usize>) -> Self {
        match size {
            Some(1) => Regime::Rs,
            Some(2) => Regime::OneRsb,
            Some(k) => Regime::Krsb(k),
            None => Regime::Frsb,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Rs => "RS",
            Regime::OneRsb => "1RSB",
            Regime::Krsb(_) => "KRSB",
            Regime::Frsb => "FRSB",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Krsb(k) => write!(f, "KRSB({k})"),
            other => f.write_str(other.label()),
        }
    }
}

impl Serialize for Regime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Regime {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "RS" => Ok(Regime::Rs),
            "1RSB" => Ok(Regime::OneRsb),
            "FRSB" => Ok(Regime::Frsb),
            _ => s
                .strip_prefix("KRSB(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|k| k.parse().ok())
                .map(Regime::Krsb)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown regime {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Which solver produced the measure.
    pub branch: String,
    /// `false` when the certificate failed or the optimizer hit its cap.
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<[f64; 2]>,
    /// `(k, value)` for every k-RSB run.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub krsb_values: Vec<(usize, f64)>,
    pub rs_sup: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParisiSolution {
    pub measure: ParisiMeasure,
    pub regime: Regime,
    pub support_size: Option<usize>,
    pub cs_value: f64,
    pub certificate: Certificate,
    pub diagnostics: Diagnostics,
}

impl ParisiSolution {
    fn new(
        spec: &MixtureSpec,
        beta: f64,
        measure: ParisiMeasure,
        mut diagnostics: Diagnostics,
        certify_opts: &CertifyOptions,
    ) -> Result<Self> {
        let support_size = measure.support_size();
        let value = cs_value_measure(spec, beta, &measure)?;
        let certificate = certify(spec, beta, &measure, certify_opts)?;
        if !certificate.verdict {
            diagnostics.converged = false;
            diagnostics.notes.push(format!(
                "certificate failed: sup f = {:.3e}, max |f| on support = {:.3e}",
                certificate.sup_f, certificate.max_abs_f_on_support
            ));
        }
        Ok(ParisiSolution {
            regime: Regime::from_support_size(support_size),
            support_size,
            measure,
            cs_value: value,
            certificate,
            diagnostics,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub seed: u64,
    pub restarts: usize,
    pub rs_grid: usize,
    pub krsb_schedule: Vec<usize>,
    /// Stop the k schedule once successive values differ by less than this.
    pub krsb_stop: f64,
    pub krsb_tol: f64,
    pub certify: CertifyOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: 0,
            restarts: 8,
            rs_grid: 10_000,
            krsb_schedule: vec![1, 2, 5, 10, 20],
            krsb_stop: 1e-8,
            krsb_tol: 1e-9,
            certify: CertifyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsCheck {
    pub is_rs: bool,
    pub sup_value: f64,
    pub argmax: f64,
    /// The interior maximum is within [`NEAR_CRITICAL`] of zero.
    pub near_critical: bool,
}

/// `sup_{0<s<1} beta^2 xi(s) + log(1 - s) + s` by a grid scan plus
/// golden-section refinement. The expression tends to 0 as `s -> 0+`, so the
/// supremum is never below 0; `argmax = 0` reports that case.
pub fn rs_check(spec: &MixtureSpec, beta: f64, grid: usize) -> Result<RsCheck> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta = {beta} must be non-negative")));
    }
    let b2 = beta * beta;
    let h = |s: f64| b2 * spec.xi0(s) + (-s).ln_1p() + s;
    let n = grid.max(10);
    let lo = 1.0 / (n as f64 + 1.0);
    let hi = 1.0 - lo;
    let (mut argmax, mut best) = numeric::scan_max(h, lo, hi, n);
    // a left-boundary maximum can hide a positive bump closer to 0
    if argmax <= lo * (1.0 + 1e-9) {
        let (a, v) = numeric::scan_max(h, lo * 1e-6, lo, 100);
        if v > best {
            argmax = a;
            best = v;
        }
    }
    let near_critical = best.abs() < NEAR_CRITICAL && argmax > 2.0 * lo;
    let sup_value = best.max(0.0);
    let argmax = if best > 0.0 || near_critical {
        argmax
    } else {
        0.0
    };
    Ok(RsCheck {
        is_rs: best <= 0.0,
        sup_value,
        argmax,
        near_critical,
    })
}

/// Right side of the ratio equation, `(1 + x) log(1 + x) / x^2 - 1 / x`.
/// Decreasing from 1/2 at `x = 0+` to 0.
pub fn onersb_ratio_rhs(x: f64) -> f64 {
    if x < 1e-3 {
        0.5 + x * (-1.0 / 6.0 + x * (1.0 / 12.0 + x * (-1.0 / 20.0 + x / 30.0)))
    } else {
        (1.0 + x) * x.ln_1p() / (x * x) - 1.0 / x
    }
}

/// The unique `x > 0` with `onersb_ratio_rhs(x) = 1 / p`.
pub fn onersb_ratio_x(p: u32) -> Result<f64> {
    if p <= 2 {
        return Err(Error::Domain(format!(
            "ratio equation needs p >= 3, got {p}"
        )));
    }
    let target = 1.0 / p as f64;
    let lo = 0.5;
    let mut hi = 1.0;
    while onersb_ratio_rhs(hi) >= target {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NonConvergence(
                "no bracket for the ratio equation".into(),
            ));
        }
    }
    numeric::bisect(|x| onersb_ratio_rhs(x) - target, lo, hi, 0.0)
}

/// `Q` at `m delta_0 + (1 - m) delta_q`.
pub fn onersb_value(spec: &MixtureSpec, beta: f64, m: f64, q: f64) -> f64 {
    let x = m * q / (1.0 - q);
    0.5 * (beta * beta * (spec.xi0(1.0) - (1.0 - m) * spec.xi0(q)) + x.ln_1p() / m + (-q).ln_1p())
}

/// Residuals of the stationarity system for `m delta_0 + (1 - m) delta_q`:
/// the `q`-equation and the `m`-equation.
pub fn onersb_residuals(spec: &MixtureSpec, beta: f64, m: f64, q: f64) -> [f64; 2] {
    let b2 = beta * beta;
    let d = 1.0 - q + m * q;
    let x = m * q / (1.0 - q);
    let r1 = b2 * spec.xi1(q) - q / ((1.0 - q) * d);
    let r2 = b2 * spec.xi0(q) - (x.ln_1p() / (m * m) - q / (m * d));
    [r1, r2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneRsbSolution {
    pub m: f64,
    pub q: f64,
    pub residuals: [f64; 2],
    pub value: f64,
    pub certificate: Certificate,
    pub path: String,
}

impl OneRsbSolution {
    pub fn measure(&self) -> Result<StepCDF> {
        StepCDF::one_rsb(self.m, self.q)
    }
}

/// Interior solution `(m, q)` of the two-atom stationarity system.
///
/// Pure `p >= 3`: through the ratio variable `x = mq / (1 - q)`, which leaves
/// `beta^2 p q^{p-2} (1-q)^2 (1+x) = 1`, unimodal in `q` with peak at
/// `(p-2)/p`. Otherwise damped Newton from the best point of a 100 x 100 grid,
/// with 2-RSB minimization as fallback.
pub fn onersb_solve(spec: &MixtureSpec, beta: f64) -> Result<OneRsbSolution> {
    onersb_solve_with(spec, beta, &CertifyOptions::default(), 0)
}

pub fn onersb_solve_with(
    spec: &MixtureSpec,
    beta: f64,
    certify_opts: &CertifyOptions,
    seed: u64,
) -> Result<OneRsbSolution> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta = {beta} must be positive")));
    }
    if spec.is_pure_two_spin() {
        return Err(Error::Domain(
            "the pure 2-spin model has no two-atom solution".into(),
        ));
    }
    let mut candidates: Vec<(f64, f64, &'static str)> = Vec::new();
    match spec.pure_degree() {
        Some(p) if p >= 3 => candidates.extend(
            onersb_ratio_path(spec, beta)?
                .into_iter()
                .map(|(m, q)| (m, q, "ratio")),
        ),
        _ => {
            if let Some((m, q)) = onersb_newton_path(spec, beta) {
                candidates.push((m, q, "newton"));
            }
        }
    }
    let mut best: Option<OneRsbSolution> = None;
    for (m, q, path) in candidates {
        if let Some(sol) = complete(spec, beta, m, q, path, certify_opts)? {
            if best.as_ref().is_none_or(|b| sol.value < b.value) {
                best = Some(sol);
            }
        }
    }
    if best.is_none() {
        // 2-RSB fallback; only useful when it lands on the two-atom form
        let r = krsb_minimize(
            spec,
            beta,
            2,
            &KrsbOptions {
                seed,
                ..Default::default()
            },
        )?;
        if let [(q0, m), (q, _)] = r.alpha.jumps() {
            if *q0 == 0.0 {
                if let Some((m, q)) = newton_polish(spec, beta, *m, *q) {
                    best = complete(spec, beta, m, q, "krsb", certify_opts)?;
                }
            }
        }
    }
    best.ok_or_else(|| {
        Error::NoInteriorSolution(format!(
            "no certified solution with m in (0, 1) for beta = {beta}, mixture {spec}"
        ))
    })
}

fn complete(
    spec: &MixtureSpec,
    beta: f64,
    m: f64,
    q: f64,
    path: &str,
    certify_opts: &CertifyOptions,
) -> Result<Option<OneRsbSolution>> {
    if !(m > 0.0 && m < 1.0 && q > 0.0 && q < 1.0) {
        return Ok(None);
    }
    let residuals = onersb_residuals(spec, beta, m, q);
    if residuals.iter().any(|r| !(r.abs() <= ONERSB_RESIDUAL_TOL)) {
        return Ok(None);
    }
    let alpha = StepCDF::one_rsb(m, q)?;
    let certificate = certify(
        spec,
        beta,
        &ParisiMeasure::Atomic(alpha.clone()),
        certify_opts,
    )?;
    if !certificate.verdict {
        return Ok(None);
    }
    Ok(Some(OneRsbSolution {
        m,
        q,
        residuals,
        value: cs_value(spec, beta, &alpha, None)?,
        certificate,
        path: path.to_string(),
    }))
}

/// Candidate `(m, q)` pairs for a pure `p`-spin mixture, `p >= 3`, from the
/// ratio variable. Candidates with `m` outside `(0, 1)` are kept.
pub fn onersb_ratio_path(spec: &MixtureSpec, beta: f64) -> Result<Vec<(f64, f64)>> {
    let p = spec.pure_degree().filter(|&p| p >= 3).ok_or_else(|| {
        Error::Domain(format!(
            "ratio path needs a pure p-spin mixture with p >= 3, got {spec}"
        ))
    })?;
    let x = onersb_ratio_x(p)?;
    // gamma_p^2 = xi(1)
    let c = beta * beta * spec.xi0(1.0);
    let lhs = |q: f64| c * (p as f64) * q.powi(p as i32 - 2) * (1.0 - q).powi(2) * (1.0 + x) - 1.0;
    let peak = (p as f64 - 2.0) / p as f64;
    let mut out = Vec::new();
    if lhs(peak) < 0.0 {
        return Ok(out);
    }
    let roots = [
        numeric::bisect(lhs, 0.0, peak, 0.0),
        numeric::bisect(lhs, peak, 1.0, 0.0),
    ];
    for q in roots.into_iter().flatten() {
        if q > 0.0 && q < 1.0 {
            let m = x * (1.0 - q) / q;
            out.push((m, q));
        }
    }
    Ok(out)
}

/// Stationary `(m, q)` by damped Newton from the lowest point of a 100 x 100
/// grid on `(0, 1)^2`, when it converges.
pub fn onersb_newton_path(spec: &MixtureSpec, beta: f64) -> Option<(f64, f64)> {
    let n = 100;
    let mut best = (f64::INFINITY, 0.5, 0.5);
    for i in 1..n {
        for j in 1..n {
            let (m, q) = (i as f64 / n as f64, j as f64 / n as f64);
            let v = onersb_value(spec, beta, m, q);
            if v < best.0 {
                best = (v, m, q);
            }
        }
    }
    newton_polish(spec, beta, best.1, best.2)
}

/// Damped Newton on the stationarity residuals with a central-difference
/// Jacobian, kept inside `(0, 1)^2`.
fn newton_polish(spec: &MixtureSpec, beta: f64, mut m: f64, mut q: f64) -> Option<(f64, f64)> {
    let res = |m: f64, q: f64| onersb_residuals(spec, beta, m, q);
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = res(m, q);
    for _ in 0..200 {
        if norm(r) <= 1e-13 {
            break;
        }
        let h = 1e-7;
        let (mp, mn) = (res(m + h, q), res(m - h, q));
        let (qp, qn) = (res(m, q + h), res(m, q - h));
        let j = [
            [(mp[0] - mn[0]) / (2.0 * h), (qp[0] - qn[0]) / (2.0 * h)],
            [(mp[1] - mn[1]) / (2.0 * h), (qp[1] - qn[1]) / (2.0 * h)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dm = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dq = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let (mn, qn) = (m - t * dm, q - t * dq);
            if mn > 0.0 && mn < 1.0 && qn > 0.0 && qn < 1.0 {
                let rn = res(mn, qn);
                if norm(rn) < norm(r) {
                    m = mn;
                    q = qn;
                    r = rn;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (norm(r) <= ONERSB_RESIDUAL_TOL).then_some((m, q))
}

/// Which of the closed-form preconditions fail, as readable strings.
pub fn frsb_precondition_failures(spec: &MixtureSpec, beta: f64) -> Result<Vec<String>> {
    let mut failed = Vec::new();
    if !spec.gamma1_zero() {
        failed.push("gamma_1 must vanish".to_string());
    }
    let curvature = spec.curvature_class(10_000)?;
    if !curvature.is_concave() {
        failed.push(format!(
            "xi''^(-1/2) must be concave, found {:?}",
            curvature.class
        ));
    }
    let lhs = beta * spec.xi2(0.0).sqrt();
    if !(lhs > 1.0) {
        failed.push(format!("beta xi''(0)^(1/2) = {lhs} must exceed 1"));
    }
    Ok(failed)
}

/// Root of `1 / (beta xi''(q)^{1/2}) = 1 - q`, assuming `beta xi''(0)^{1/2} > 1`.
pub fn frsb_q(spec: &MixtureSpec, beta: f64) -> Result<f64> {
    numeric::bisect(
        |t| 1.0 / (beta * spec.xi2(t).sqrt()) - (1.0 - t),
        0.0,
        1.0,
        0.0,
    )
}

/// The closed-form Parisi measure for concave `xi''^{-1/2}`.
pub fn frsb_solve(spec: &MixtureSpec, beta: f64) -> Result<ParisiSolution> {
    frsb_solve_with(spec, beta, &CertifyOptions::default())
}

pub fn frsb_solve_with(
    spec: &MixtureSpec,
    beta: f64,
    certify_opts: &CertifyOptions,
) -> Result<ParisiSolution> {
    let failed = frsb_precondition_failures(spec, beta)?;
    if !failed.is_empty() {
        return Err(Error::PreconditionFailed(failed.join("; ")));
    }
    let q = frsb_q(spec, beta)?;
    let residual = 1.0 / (beta * spec.xi2(q).sqrt()) - (1.0 - q);
    let measure = if spec.has_cubic_or_higher() {
        ParisiMeasure::frsb(spec.clone(), beta, q)?
    } else {
        // the density part vanishes identically
        ParisiMeasure::Atomic(StepCDF::delta(q)?)
    };
    let diagnostics = Diagnostics {
        branch: "frsb".into(),
        converged: true,
        residuals: Some([residual, 0.0]),
        notes: vec![format!(
            "density part at q-: {}",
            frsb_density(spec, beta, q)
        )],
        ..Default::default()
    };
    ParisiSolution::new(spec, beta, measure, diagnostics, certify_opts)
}

/// Computes the Parisi measure of `spec` at inverse temperature `beta`.
pub fn parisi_solve(spec: &MixtureSpec, beta: f64, opts: &SolveOptions) -> Result<ParisiSolution> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta = {beta} must be positive")));
    }
    let rs = rs_check(spec, beta, opts.rs_grid)?;
    let rs_solution = || {
        let diagnostics = Diagnostics {
            branch: "rs".into(),
            converged: true,
            rs_sup: rs.sup_value,
            ..Default::default()
        };
        ParisiSolution::new(
            spec,
            beta,
            ParisiMeasure::Atomic(StepCDF::delta_zero()),
            diagnostics,
            &opts.certify,
        )
    };
    if rs.is_rs && !rs.near_critical {
        return rs_solution();
    }
    let mut solution = match solve_broken(spec, beta, opts, rs.sup_value) {
        Ok(s) => s,
        Err(e) if rs.is_rs => {
            let mut s = rs_solution()?;
            s.diagnostics
                .notes
                .push(format!("near-critical; other branch failed: {e}"));
            return Ok(s);
        }
        Err(e) => return Err(e),
    };
    if rs.near_critical {
        let mut rs_sol = rs_solution()?;
        let note = "near-critical: RS and broken branches compared".to_string();
        if rs_sol.cs_value <= solution.cs_value {
            rs_sol.diagnostics.notes.push(note);
            return Ok(rs_sol);
        }
        solution.diagnostics.notes.push(note);
    }
    Ok(solution)
}

fn solve_broken(
    spec: &MixtureSpec,
    beta: f64,
    opts: &SolveOptions,
    rs_sup: f64,
) -> Result<ParisiSolution> {
    let curvature = spec.curvature_class(10_000)?;
    if spec.is_pure_two_spin() {
        let q = frsb_q(spec, beta)?;
        let diagnostics = Diagnostics {
            branch: "pure-2-spin".into(),
            converged: true,
            residuals: Some([1.0 / (beta * spec.xi2(q).sqrt()) - (1.0 - q), 0.0]),
            rs_sup,
            ..Default::default()
        };
        return ParisiSolution::new(
            spec,
            beta,
            ParisiMeasure::Atomic(StepCDF::delta(q)?),
            diagnostics,
            &opts.certify,
        );
    }
    let mut notes = Vec::new();
    if curvature.is_convex() {
        match onersb_solve_with(spec, beta, &opts.certify, opts.seed) {
            Ok(sol) => {
                let diagnostics = Diagnostics {
                    branch: format!("1rsb-{}", sol.path),
                    converged: true,
                    residuals: Some(sol.residuals),
                    rs_sup,
                    ..Default::default()
                };
                let measure = ParisiMeasure::Atomic(sol.measure()?);
                return ParisiSolution::new(spec, beta, measure, diagnostics, &opts.certify);
            }
            Err(e) => notes.push(format!("two-atom branch failed: {e}")),
        }
    }
    if frsb_precondition_failures(spec, beta)?.is_empty() {
        let mut sol = frsb_solve_with(spec, beta, &opts.certify)?;
        sol.diagnostics.rs_sup = rs_sup;
        return Ok(sol);
    }
    let mut sol = krsb_schedule(spec, beta, opts)?;
    sol.diagnostics.rs_sup = rs_sup;
    sol.diagnostics.notes.splice(0..0, notes);
    Ok(sol)
}

fn krsb_schedule(spec: &MixtureSpec, beta: f64, opts: &SolveOptions) -> Result<ParisiSolution> {
    let mut values = Vec::new();
    let mut warm: Option<StepCDF> = None;
    let mut last = None;
    for &k in &opts.krsb_schedule {
        let kopts = KrsbOptions {
            restarts: opts.restarts,
            seed: opts.seed,
            tol: opts.krsb_tol,
            warm_start: warm.clone(),
            ..Default::default()
        };
        let r = krsb_minimize(spec, beta, k, &kopts)?;
        values.push((k, r.value));
        let stop = last
            .as_ref()
            .is_some_and(|p: &crate::crisanti_sommers::KrsbResult| {
                (p.value - r.value).abs() < opts.krsb_stop
            });
        warm = Some(r.alpha.clone());
        last = Some(r);
        if stop {
            break;
        }
    }
    let r = last.ok_or_else(|| Error::Domain("empty k schedule".into()))?;
    let mut notes = Vec::new();
    if !r.converged {
        notes.push(format!(
            "optimizer stopped with projected gradient {:.3e}",
            r.grad_norm
        ));
    }
    let diagnostics = Diagnostics {
        branch: "krsb".into(),
        converged: true,
        krsb_values: values,
        notes,
        ..Default::default()
    };
    ParisiSolution::new(
        spec,
        beta,
        ParisiMeasure::Atomic(r.alpha),
        diagnostics,
        &opts.certify,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rs_check_examples() {
        let quartic = MixtureSpec::pure(4).unwrap();
        let r = rs_check(&quartic, 0.1, 10_000).unwrap();
        assert!(r.is_rs && r.sup_value == 0.0 && !r.near_critical);
        let r = rs_check(&quartic, 2.0, 10_000).unwrap();
        assert!(!r.is_rs);
        // the value at s = 0.9 is already 1.22
        assert!(r.sup_value >= 4.0 * 0.6561 + 0.1f64.ln() + 0.9);
        let r = rs_check(&MixtureSpec::two_term(0.3, 4).unwrap(), 0.0, 1000).unwrap();
        assert!(r.is_rs);
    }

    #[test]
    fn rs_check_sees_instability_at_zero() {
        // beta^2 xi''(0) slightly above 1 gives a positive bump near s = 0
        let spec = MixtureSpec::pure(2).unwrap();
        let beta = (0.5f64 * 1.0001).sqrt();
        assert!(!rs_check(&spec, beta, 10_000).unwrap().is_rs);
        assert!(
            rs_check(&spec, (0.5f64 * 0.9999).sqrt(), 10_000)
                .unwrap()
                .is_rs
        );
    }

    #[test]
    fn ratio_x_examples() {
        let x4 = onersb_ratio_x(4).unwrap();
        assert!(x4 > 4.0 && x4 < 4.2);
        assert!((onersb_ratio_rhs(x4) - 0.25).abs() < 1e-12);
        let x3 = onersb_ratio_x(3).unwrap();
        assert!(x3 > 1.7 && x3 < 2.2);
        assert!(onersb_ratio_x(10).unwrap() > x4);
        assert!(onersb_ratio_x(2).is_err());
        let mut prev = 0.5;
        for i in 1..2000 {
            let v = onersb_ratio_rhs(i as f64 * 0.01);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn regime_serde() {
        for r in [Regime::Rs, Regime::OneRsb, Regime::Krsb(7), Regime::Frsb] {
            let s = serde_json::to_string(&r).unwrap();
            assert_eq!(serde_json::from_str::<Regime>(&s).unwrap(), r);
        }
        assert_eq!(serde_json::to_string(&Regime::OneRsb).unwrap(), "\"1RSB\"");
    }

    #[test]
    fn pure_two_spin_closed_form() {
        let spec = MixtureSpec::pure(2).unwrap();
        let s = frsb_solve(&spec, 1.0).unwrap();
        let q = 1.0 - 0.5f64.sqrt();
        assert_eq!(s.measure.as_step().unwrap().len(), 1);
        assert!((s.measure.as_step().unwrap().top() - q).abs() < 1e-12);
        assert_eq!(s.regime, Regime::Rs);
        assert!(s.certificate.verdict);
    }

    #[test]
    fn frsb_preconditions() {
        let err = frsb_solve(&MixtureSpec::pure(4).unwrap(), 2.0).unwrap_err();
        let Error::PreconditionFailed(msg) = err else {
            panic!("{err:?}")
        };
        assert!(msg.contains("concave") && msg.contains("exceed 1"));
    }
}
