//! Polak–Ribière nonlinear conjugate gradient with an Armijo backtracking
//! line search and central finite-difference gradients.

use serde::{Deserialize, Serialize};

const ARMIJO_C1: f64 = 1e-4;
/// Largest coordinate change tried on the first line-search trial.
const MAX_TRIAL_STEP: f64 = 1.0;
/// Largest coordinate change reachable by expansion.
const MAX_STEP: f64 = 8.0;
const MAX_EXPANSIONS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Convergence threshold on the gradient max-norm.
    pub tol: f64,
    pub max_iters: usize,
    pub fd_step: f64,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 5000,
            fd_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CgStatus {
    GradientTol,
    StepUnderflow,
    MaxIters,
    NonFinite,
}

impl CgStatus {
    pub fn converged(self) -> bool {
        matches!(self, CgStatus::GradientTol | CgStatus::StepUnderflow)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub status: CgStatus,
}

impl CgOutcome {
    pub fn converged(&self) -> bool {
        self.status.converged()
    }
}

/// Central-difference gradient `(f(x+h eᵢ) − f(x−h eᵢ)) / 2h`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64, grad: &mut [f64]) {
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let up = f(&probe);
        probe[i] = xi - h;
        let down = f(&probe);
        probe[i] = xi;
        grad[i] = (up - down) / (2.0 * h);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Approximate minimization of `f(x + αd)` over `α > 0`.
///
/// Backtracks from `alpha` until the Armijo condition holds. When the first
/// trial is already acceptable the step is doubled while `f` keeps
/// decreasing, and a final parabolic fit through the last three trials is
/// accepted if it improves further. Returns `None` once the step underflows.
#[allow(clippy::too_many_arguments)]
fn line_search<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &[f64],
    fx: f64,
    d: &[f64],
    slope: f64,
    mut alpha: f64,
    dmax: f64,
    buf: &mut [f64],
) -> Option<(f64, f64)> {
    let mut eval = |a: f64| {
        for i in 0..x.len() {
            buf[i] = x[i] + a * d[i];
        }
        f(buf)
    };
    let floor = f64::EPSILON * (1.0 + max_norm(x));
    let mut first = true;
    let (mut a1, mut f1) = loop {
        let ft = eval(alpha);
        if ft.is_finite() && ft <= fx + ARMIJO_C1 * alpha * slope {
            break (alpha, ft);
        }
        first = false;
        if alpha * dmax <= floor {
            return None;
        }
        let next = if ft.is_finite() {
            let denom = 2.0 * (ft - fx - slope * alpha);
            if denom > 0.0 {
                -slope * alpha * alpha / denom
            } else {
                0.5 * alpha
            }
        } else {
            0.25 * alpha
        };
        alpha = next.clamp(0.1 * alpha, 0.5 * alpha);
    };
    if !first {
        return Some((a1, f1));
    }
    // expansion: (a0, f0) < (a1, f1) < (a2, f2) in step length
    let (mut a0, mut f0) = (0.0, fx);
    for _ in 0..MAX_EXPANSIONS {
        let a2 = 2.0 * a1;
        if a2 * dmax > MAX_STEP {
            break;
        }
        let f2 = eval(a2);
        if !(f2.is_finite() && f2 < f1) {
            // parabola through the bracket (a0, a1, a2)
            let num = (a1 - a0).powi(2) * (f1 - f2) - (a1 - a2).powi(2) * (f1 - f0);
            let den = (a1 - a0) * (f1 - f2) - (a1 - a2) * (f1 - f0);
            if f2.is_finite() && den.abs() > 0.0 {
                let am = a1 - 0.5 * num / den;
                if am > a0 && am < a2 && am != a1 {
                    let fm = eval(am);
                    if fm.is_finite() && fm < f1 {
                        return Some((am, fm));
                    }
                }
            }
            return Some((a1, f1));
        }
        (a0, f0, a1, f1) = (a1, f1, a2, f2);
    }
    Some((a1, f1))
}

/// Minimizes `f` starting from `x0` with central finite-difference gradients.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &CgOptions) -> CgOutcome {
    let h = opts.fd_step;
    minimize_with(&f, |x: &[f64], g: &mut [f64]| fd_gradient(&f, x, h, g), x0, opts)
}

/// Minimizes `f` using a caller-supplied gradient.
pub fn minimize_with<F, G>(f: F, grad: G, x0: &[f64], opts: &CgOptions) -> CgOutcome
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let finish = |x: Vec<f64>, value: f64, iterations: usize, status: CgStatus| CgOutcome {
        x,
        value,
        iterations,
        status,
    };
    if !fx.is_finite() {
        return finish(x, fx, 0, CgStatus::NonFinite);
    }

    let mut g = vec![0.0; n];
    grad(&x, &mut g);
    if max_norm(&g) < opts.tol {
        return finish(x, fx, 0, CgStatus::GradientTol);
    }
    if !g.iter().all(|v| v.is_finite()) {
        return finish(x, fx, 0, CgStatus::NonFinite);
    }

    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut g_new = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut prev_step: Option<(f64, f64)> = None; // (alpha, slope)
    let mut since_restart = 0usize;

    for iter in 1..=opts.max_iters {
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            slope = -dot(&g, &g);
            since_restart = 0;
        }
        let dmax = max_norm(&d);
        let cap = MAX_TRIAL_STEP / dmax;
        let guess = match prev_step {
            Some((a, s)) => (a * s / slope).min(cap),
            None => cap.min(1.0),
        };
        let Some((alpha, f_trial)) = line_search(&f, &x, fx, &d, slope, guess, dmax, &mut trial) else {
            return finish(x, fx, iter - 1, CgStatus::StepUnderflow);
        };
        for i in 0..n {
            trial[i] = x[i] + alpha * d[i];
        }

        std::mem::swap(&mut x, &mut trial);
        fx = f_trial;
        prev_step = Some((alpha, slope));

        grad(&x, &mut g_new);
        if !g_new.iter().all(|v| v.is_finite()) {
            return finish(x, fx, iter, CgStatus::NonFinite);
        }
        if max_norm(&g_new) < opts.tol {
            return finish(x, fx, iter, CgStatus::GradientTol);
        }

        since_restart += 1;
        let gg = dot(&g, &g);
        let mut beta = (dot(&g_new, &g_new) - dot(&g_new, &g)) / gg;
        if beta < 0.0 || since_restart >= n || !beta.is_finite() {
            beta = 0.0;
            since_restart = 0;
        }
        for i in 0..n {
            d[i] = -g_new[i] + beta * d[i];
        }
        std::mem::swap(&mut g, &mut g_new);
    }
    finish(x, fx, opts.max_iters, CgStatus::MaxIters)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_converges_to_center() {
        let center = [0.3, -1.2, 2.0, 0.7];
        let f = |x: &[f64]| x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let out = minimize(f, &[0.0; 4], &CgOptions::default());
        assert!(out.converged());
        for (a, b) in out.x.iter().zip(&center) {
            assert!((a - b).abs() < 1e-6, "{:?}", out.x);
        }
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let f = |x: &[f64]| 100.0 * x[0] * x[0] + x[1] * x[1] + 0.01 * (x[2] - 1.0).powi(2);
        let out = minimize(f, &[1.0, 1.0, 0.0], &CgOptions::default());
        assert!(out.converged(), "{:?}", out.status);
        assert!(out.x[0].abs() < 1e-6 && out.x[1].abs() < 1e-6);
        assert!((out.x[2] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(f, &[-1.2, 1.0], &CgOptions { max_iters: 20000, ..Default::default() });
        assert!(out.converged());
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4, "{:?}", out);
    }

    #[test]
    fn stationary_start_returns_immediately() {
        let f = |x: &[f64]| x[0].cos() + x[1].cos();
        let out = minimize(f, &[std::f64::consts::PI, std::f64::consts::PI], &CgOptions::default());
        assert!(out.converged());
        assert!(out.iterations <= 2);
    }

    #[test]
    fn non_finite_start_is_reported() {
        let out = minimize(|_: &[f64]| f64::NAN, &[0.0], &CgOptions::default());
        assert_eq!(out.status, CgStatus::NonFinite);
        assert!(!out.converged());
    }

    #[test]
    fn fd_gradient_of_smooth_function() {
        let f = |x: &[f64]| x[0].sin() * x[1].exp();
        let mut g = [0.0; 2];
        fd_gradient(&f, &[0.4, 0.3], 1e-6, &mut g);
        assert!((g[0] - 0.4f64.cos() * 0.3f64.exp()).abs() < 1e-8);
        assert!((g[1] - 0.4f64.sin() * 0.3f64.exp()).abs() < 1e-8);
    }
}
