//! Scalar numerical helpers: bracketing root finders, golden-section search,
//! quadrature and a few cancellation-free elementary functions.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Iterates until the bracket can no longer be halved in floating point or
/// its width drops below `xtol`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Domain(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= xtol {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // return the endpoint with the smaller residual
    let (rl, rh) = (f(lo).abs(), f(hi).abs());
    Ok(if rl <= rh { lo } else { hi })
}

/// Golden-section maximization of a unimodal `f` on `[a, b]`.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximizes `f` on `[a, b]` by a uniform scan of `n` points followed by
/// golden-section refinement around the best grid point.
pub fn scan_max<F>(f: F, a: f64, b: f64, n: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let n = n.max(3);
    let h = (b - a) / (n - 1) as f64;
    let mut best = (a, f(a));
    let mut best_i = 0;
    for i in 1..n {
        let x = a + i as f64 * h;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let lo = a + best_i.saturating_sub(1) as f64 * h;
    let hi = (a + (best_i + 1) as f64 * h).min(b);
    let refined = golden_max(&f, lo, hi, 1e-13 * (1.0 + hi.abs()));
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}

/// Adaptive quadrature of `f` on `[a, b]` to the given absolute tolerance.
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return 0.0;
    }
    quadrature::integrate(f, a, b, abs_tol).integral
}

/// Fixed 10-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre_10<F>(f: F, a: f64, b: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    const NODES: [f64; 5] = [
        0.148_874_338_981_631_22,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const WEIGHTS: [f64; 5] = [
        0.295_524_224_714_752_87,
        0.269_266_719_309_996_35,
        0.219_086_362_515_982_04,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_14,
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// `-ln(1 - r) / r` for `r` in `[0, 1)`, equal to 1 at `r = 0`.
pub fn neg_log1m_over(r: f64) -> f64 {
    if r.abs() < 1e-4 {
        1.0 + r * (0.5 + r * (1.0 / 3.0 + r * 0.25))
    } else {
        -(-r).ln_1p() / r
    }
}

/// `(-r - ln(1 - r)) / r^2` for `r` in `[0, 1)`, equal to 1/2 at `r = 0`.
pub fn log1m_remainder(r: f64) -> f64 {
    if r.abs() < 1e-3 {
        0.5 + r * (1.0 / 3.0 + r * (0.25 + r * (0.2 + r / 6.0)))
    } else {
        (-r - (-r).ln_1p()) / (r * r)
    }
}
