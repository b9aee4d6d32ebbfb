//! Limited-memory BFGS with a weak Wolfe line search, for the smooth merit
//! functions of the nonlinear solver.

use std::collections::VecDeque;
use std::time::Instant;

use crate::set::Vector;

const MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const CURVATURE: f64 = 0.9;

/// Minimizes `f` from `x0` and returns the final iterate. `f` returns the value and the gradient. Stops
/// when the value is zero, the gradient vanishes, no descent step can be
/// found, the iteration budget is used or `deadline` passes.
pub(crate) fn minimize<F>(mut f: F, x0: Vector, max_iter: usize, deadline: Instant) -> Vector
where
    F: FnMut(&Vector) -> (f64, Vector),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut history: VecDeque<(Vector, Vector, f64)> = VecDeque::with_capacity(MEMORY);

    for _ in 0..max_iter {
        if fx == 0.0 || g.amax() <= 1e-300 || Instant::now() >= deadline {
            break;
        }
        let mut d = -direction(&g, &history);
        let mut slope = g.dot(&d);
        if slope >= 0.0 {
            history.clear();
            d = -g.clone();
            slope = -g.norm_squared();
        }

        let Some((x_new, f_new, g_new)) = wolfe_step(&mut f, &x, fx, &d, slope) else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };

        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-16 * s.norm() * y.norm() {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    x
}

/// Weak Wolfe line search by bracketing and bisection. Falls back to the
/// last point with sufficient decrease when the curvature condition is not
/// met within the step budget.
fn wolfe_step<F>(f: &mut F, x: &Vector, fx: f64, d: &Vector, slope: f64) -> Option<(Vector, f64, Vector)>
where
    F: FnMut(&Vector) -> (f64, Vector),
{
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let mut t = 1.0;
    let mut fallback = None;
    for _ in 0..60 {
        let trial = x + d * t;
        let (ft, gt) = f(&trial);
        if !ft.is_finite() || ft > fx + ARMIJO * t * slope {
            hi = t;
        } else if gt.dot(d) < CURVATURE * slope {
            lo = t;
            fallback = Some((trial, ft, gt));
        } else {
            return Some((trial, ft, gt));
        }
        t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo };
    }
    fallback
}

/// Two-loop recursion: approximate inverse Hessian times `g`.
fn direction(g: &Vector, history: &VecDeque<(Vector, Vector, f64)>) -> Vector {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * s.dot(&q);
        q.axpy(-a, y, 1.0);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        q *= s.dot(y) / y.norm_squared();
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * y.dot(&q);
        q.axpy(a - b, s, 1.0);
    }
    q
}
