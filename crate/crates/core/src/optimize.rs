//! Box-constrained minimization by projected L-BFGS with an active set.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct BoxOptions {
    /// Stop when the projected gradient's max-norm drops below this.
    pub grad_tol: f64,
    pub max_evals: usize,
    pub memory: usize,
}

impl Default for BoxOptions {
    fn default() -> Self {
        BoxOptions {
            grad_tol: 1e-9,
            max_evals: 10_000,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoxResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Max-norm of the gradient with components that push against an active
/// bound zeroed.
pub fn projected_grad_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((&xi, &gi), (&lo, &hi))| {
            if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) {
                0.0
            } else {
                gi.abs()
            }
        })
        .fold(0.0, f64::max)
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(lo, hi);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `fg(x) -> (f, grad)` over `lower <= x <= upper`.
pub fn minimize_box<F>(
    mut fg: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &BoxOptions,
) -> BoxResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let (mut f, mut g) = fg(&x);
    let mut evals = 1;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut stalls = 0;

    loop {
        let pg_norm = projected_grad_norm(&x, &g, lower, upper);
        if pg_norm <= opts.grad_tol {
            return BoxResult {
                x,
                value: f,
                grad_norm: pg_norm,
                evals,
                converged: true,
            };
        }
        if evals >= opts.max_evals || stalls >= 5 {
            return BoxResult {
                x,
                value: f,
                grad_norm: pg_norm,
                evals,
                converged: false,
            };
        }

        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)))
            .collect();
        let masked = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .zip(&free)
                .map(|(&a, &fr)| if fr { a } else { 0.0 })
                .collect()
        };

        // two-loop recursion on the free coordinates
        let mut d = masked(&g);
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, _) in memory.iter().rev() {
            let (s, y) = (masked(s), masked(y));
            let sy = dot(&s, &y);
            if sy <= 0.0 {
                alphas.push(0.0);
                continue;
            }
            let a = dot(&s, &d) / sy;
            for i in 0..n {
                d[i] -= a * y[i];
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = memory.back() {
            let (s, y) = (masked(s), masked(y));
            let (sy, yy) = (dot(&s, &y), dot(&y, &y));
            if sy > 0.0 && yy > 0.0 {
                let gamma = sy / yy;
                d.iter_mut().for_each(|v| *v *= gamma);
            }
        } else {
            let scale = (0.1 / pg_norm).min(1.0);
            d.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, y, _), a) in memory.iter().zip(alphas.iter().rev()) {
            let (s, y) = (masked(s), masked(y));
            let sy = dot(&s, &y);
            if sy <= 0.0 {
                continue;
            }
            let b = dot(&y, &d) / sy;
            for i in 0..n {
                d[i] += (a - b) * s[i];
            }
        }
        d.iter_mut().for_each(|v| *v = -*v);
        let mut d = masked(&d);
        if dot(&d, &g) >= 0.0 {
            memory.clear();
            let scale = (0.1 / pg_norm).min(1.0);
            d = masked(&g).iter().map(|v| -v * scale).collect();
        }

        // projected backtracking line search
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            project(&mut xn, lower, upper);
            let step: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            if step.iter().all(|v| *v == 0.0) {
                break;
            }
            let (fnew, gnew) = fg(&xn);
            evals += 1;
            if fnew <= f + 1e-4 * dot(&g, &step) {
                accepted = Some((xn, fnew, gnew, step));
                break;
            }
            if evals >= opts.max_evals {
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, fnew, gnew, step)) => {
                let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&step, &y);
                if sy > 1e-16 * dot(&step, &step).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
                    memory.push_back((step, y, sy));
                    if memory.len() > opts.memory {
                        memory.pop_front();
                    }
                }
                if (f - fnew).abs() <= 1e-16 * f.abs().max(1.0) {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                x = xn;
                f = fnew;
                g = gnew;
            }
            None => {
                if memory.is_empty() {
                    stalls += 5;
                } else {
                    memory.clear();
                    stalls += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_interior_minimum() {
        let fg = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            (f, g)
        };
        let r = minimize_box(
            fg,
            &[-1.2, 1.0],
            &[-2.0, -2.0],
            &[2.0, 2.0],
            &BoxOptions::default(),
        );
        assert!(r.converged, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bound_constrained_minimum() {
        // minimum of (x-2)^2 + (y+1)^2 on [0,1]^2 is at (1, 0)
        let fg = |x: &[f64]| {
            (
                (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2),
                vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] + 1.0)],
            )
        };
        let r = minimize_box(
            fg,
            &[0.5, 0.5],
            &[0.0, 0.0],
            &[1.0, 1.0],
            &BoxOptions::default(),
        );
        assert!(r.converged);
        assert_eq!(r.x, vec![1.0, 0.0]);
    }
}
