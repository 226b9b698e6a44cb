//! Backtracking line search, projected gradient descent and L-BFGS shared by
//! the configuration and loop minimizers.

use std::collections::VecDeque;

/// A smooth objective on `R^n` that may be undefined on part of its domain.
pub(crate) trait Objective {
    /// Writes the gradient into `grad` and returns the value, or `None` when
    /// `x` is infeasible (e.g. too close to a collision).
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Option<f64>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub max_iters: usize,
    pub tol_grad: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    pub memory: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol_grad: 1e-10,
            armijo: 1e-4,
            max_backtracks: 60,
            memory: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Rounding slack so that steps at the noise floor still count as descent.
fn slack(f: f64) -> f64 {
    8.0 * f64::EPSILON * f.abs()
}

struct Trial {
    x: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    step: f64,
}

/// Halving line search from `step0` along `dir`, Armijo sufficient decrease.
fn backtrack<O: Objective>(
    obj: &O,
    x: &[f64],
    f: f64,
    slope: f64,
    dir: &[f64],
    step0: f64,
    s: &Settings,
) -> Option<Trial> {
    let mut step = step0;
    let mut grad = vec![0.0; x.len()];
    for _ in 0..s.max_backtracks {
        let trial: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + step * di).collect();
        if let Some(value) = obj.evaluate(&trial, &mut grad) {
            if value.is_finite() && value <= f + s.armijo * step * slope + slack(f) {
                return Some(Trial {
                    x: trial,
                    value,
                    grad,
                    step,
                });
            }
        }
        step *= 0.5;
    }
    None
}

/// Steepest descent; `gauge` is applied to every accepted iterate and must
/// leave the objective value unchanged.
pub(crate) fn gradient_descent<O: Objective>(
    obj: &O,
    x0: Vec<f64>,
    s: &Settings,
    gauge: impl Fn(&mut [f64]),
) -> Option<Minimum> {
    let mut x = x0;
    gauge(&mut x);
    let mut grad = vec![0.0; x.len()];
    let mut f = obj.evaluate(&x, &mut grad)?;
    let mut step = 1.0 / dot(&grad, &grad).sqrt().max(1.0);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    while iterations < s.max_iters {
        let gnorm2 = dot(&grad, &grad);
        if gnorm2.sqrt() < s.tol_grad {
            termination = Termination::Converged;
            break;
        }
        let dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        let Some(t) = backtrack(obj, &x, f, -gnorm2, &dir, step, s) else {
            termination = Termination::LineSearchFailed;
            break;
        };
        iterations += 1;
        step = t.step * 2.0;
        x = t.x;
        gauge(&mut x);
        f = obj.evaluate(&x, &mut grad)?;
    }
    let grad_norm = dot(&grad, &grad).sqrt();
    if grad_norm < s.tol_grad {
        termination = Termination::Converged;
    }
    Some(Minimum {
        x,
        value: f,
        grad_norm,
        iterations,
        termination,
    })
}

/// Limited-memory BFGS with backtracking. Falls back to steepest descent
/// (and clears the memory) whenever the quasi-Newton direction fails.
pub(crate) fn lbfgs<O: Objective>(obj: &O, x0: Vec<f64>, s: &Settings) -> Option<Minimum> {
    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut f = obj.evaluate(&x, &mut grad)?;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(s.memory);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < s.max_iters {
        if dot(&grad, &grad).sqrt() < s.tol_grad {
            termination = Termination::Converged;
            break;
        }

        // two-loop recursion
        let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(memory.len());
        for (sv, yv, rho) in memory.iter().rev() {
            let a = rho * dot(sv, &dir);
            for (d, y) in dir.iter_mut().zip(yv) {
                *d -= a * y;
            }
            alphas.push(a);
        }
        if let Some((sv, yv, _)) = memory.back() {
            let gamma = dot(sv, yv) / dot(yv, yv);
            dir.iter_mut().for_each(|d| *d *= gamma);
        } else {
            let g = dot(&grad, &grad).sqrt();
            dir.iter_mut().for_each(|d| *d /= g.max(1.0));
        }
        for ((sv, yv, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(yv, &dir);
            for (d, sx) in dir.iter_mut().zip(sv) {
                *d += (a - b) * sx;
            }
        }

        let mut slope = dot(&grad, &dir);
        if !(slope < 0.0) {
            memory.clear();
            let g = dot(&grad, &grad).sqrt();
            dir = grad.iter().map(|v| -v / g.max(1.0)).collect();
            slope = dot(&grad, &dir);
        }

        let trial = match backtrack(obj, &x, f, slope, &dir, 1.0, s) {
            Some(t) => t,
            None if !memory.is_empty() => {
                memory.clear();
                continue;
            }
            None => {
                termination = Termination::LineSearchFailed;
                break;
            }
        };
        iterations += 1;

        let sv: Vec<f64> = trial.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = trial.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&sv, &yv);
        if sy > 1e-300 && sy.is_finite() {
            if memory.len() == s.memory {
                memory.pop_front();
            }
            memory.push_back((sv, yv, 1.0 / sy));
        }
        x = trial.x;
        f = trial.value;
        grad = trial.grad;
    }

    let grad_norm = dot(&grad, &grad).sqrt();
    if grad_norm < s.tol_grad {
        termination = Termination::Converged;
    }
    Some(Minimum {
        x,
        value: f,
        grad_norm,
        iterations,
        termination,
    })
}
