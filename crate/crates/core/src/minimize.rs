//! Constrained minimisation of the discrete quotient
//! Q(u) = (u·Au) / P(u)^{2/(p+1)},  P(u) = ∫ V |u|^{p+1}.
//!
//! Iterates live on {P = 1}. Each step moves along the A-preconditioned
//! gradient G = u − Q A⁻¹g with a Barzilai–Borwein length, then takes |·| and
//! renormalises. A step of length one is the nonlinear inverse power step,
//! which never increases Q and is used whenever the BB step does.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete problem seen by the minimiser. Vectors hold the free unknowns.
pub trait QuotientProblem {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn exponent(&self) -> f64;

    /// out = A u.
    fn stiffness_apply(&self, u: &[f64], out: &mut [f64]);

    /// out = A⁻¹ rhs.
    fn stiffness_solve(&self, rhs: &[f64], out: &mut [f64]);

    /// Returns P(u) and writes g with g_i = ∂P/∂u_i / (p+1).
    fn nonlinear(&self, u: &[f64], grad: &mut [f64]) -> f64;

    /// Optional local refinement of a near-minimiser with P(u) = 1. Returns
    /// true when `u` was replaced by a more accurate minimiser.
    fn polish(&self, _u: &mut [f64]) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Stop when the relative decrease of Q over `window` steps is below this.
    pub rel_tol: f64,
    pub window: usize,
    /// Stop when the relative A-norm of the projected gradient is below this.
    pub grad_tol: f64,
    /// Run the local refinement after the gradient iteration.
    pub polish: bool,
    pub extra_random_starts: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            rel_tol: 1e-10,
            window: 10,
            grad_tol: 1e-9,
            polish: true,
            extra_random_starts: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimizer {
    /// Minimiser with P(u) = 1, nonnegative.
    pub u: Vec<f64>,
    pub quotient: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub polished: bool,
}

struct State {
    u: Vec<f64>,
    g: Vec<f64>,
    q: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn evaluate<P: QuotientProblem + ?Sized>(prob: &P, mut u: Vec<f64>) -> Option<State> {
    let p = prob.exponent();
    let n = u.len();
    u.iter_mut().for_each(|x| *x = x.abs());
    let mut g = vec![0.0; n];
    let pv = prob.nonlinear(&u, &mut g);
    if !(pv > 0.0) || !pv.is_finite() {
        return None;
    }
    // scale to P = 1: u ← c u with c = P^{-1/(p+1)}, g scales by c^p
    let c = pv.powf(-1.0 / (p + 1.0));
    let cp = c.powf(p);
    u.iter_mut().for_each(|x| *x *= c);
    g.iter_mut().for_each(|x| *x *= cp);
    let mut au = vec![0.0; n];
    prob.stiffness_apply(&u, &mut au);
    let q = dot(&u, &au);
    q.is_finite().then_some(State { u, g, q })
}

/// Value of the quotient at an arbitrary nonzero vector.
pub fn quotient_at<P: QuotientProblem + ?Sized>(prob: &P, u: &[f64]) -> f64 {
    let mut g = vec![0.0; u.len()];
    let pv = prob.nonlinear(u, &mut g);
    let mut au = vec![0.0; u.len()];
    prob.stiffness_apply(u, &mut au);
    dot(u, &au) / pv.powf(2.0 / (prob.exponent() + 1.0))
}

/// Minimises Q starting from `start`.
pub fn minimize<P: QuotientProblem + ?Sized>(prob: &P, start: Vec<f64>, opts: &SolveOptions) -> Result<Minimizer> {
    let n = prob.len();
    if start.len() != n {
        return Err(Error::InvalidParams(format!(
            "start vector has length {}, expected {n}",
            start.len()
        )));
    }
    let mut state = evaluate(prob, start)
        .ok_or_else(|| Error::InvalidParams("start vector has zero weighted norm".into()))?;

    let mut ainv_g = vec![0.0; n];
    let sobolev_gradient = |st: &State, ainv_g: &mut Vec<f64>| -> Vec<f64> {
        prob.stiffness_solve(&st.g, ainv_g);
        st.u.iter().zip(ainv_g.iter()).map(|(u, a)| u - st.q * a).collect()
    };
    let mut grad = sobolev_gradient(&state, &mut ainv_g);
    let mut history = vec![state.q];
    let mut tau = 1.0;
    let mut gnorm = f64::INFINITY;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        // relative A-norm of G
        let mut ag = vec![0.0; n];
        prob.stiffness_apply(&grad, &mut ag);
        gnorm = (dot(&grad, &ag).max(0.0) / state.q).sqrt();
        if gnorm < opts.grad_tol {
            converged = true;
            break;
        }
        let k = history.len();
        if k > opts.window {
            let old = history[k - 1 - opts.window];
            if (old - state.q) / state.q < opts.rel_tol {
                converged = true;
                break;
            }
        }

        if let Some((u_old, g_old)) = &prev {
            let s: Vec<f64> = state.u.iter().zip(u_old).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = grad.iter().zip(g_old).map(|(a, b)| a - b).collect();
            let mut as_ = vec![0.0; n];
            prob.stiffness_apply(&s, &mut as_);
            let num = dot(&s, &as_);
            let den = dot(&y, &as_);
            tau = if den > 0.0 && num > 0.0 {
                (num / den).clamp(0.05, 20.0)
            } else {
                1.0
            };
        }

        let trial = |t: f64| -> Option<State> {
            let v: Vec<f64> = state.u.iter().zip(&grad).map(|(u, g)| u - t * g).collect();
            evaluate(prob, v)
        };
        let mut next = trial(tau).filter(|s| s.q <= state.q);
        if next.is_none() && tau != 1.0 {
            next = trial(1.0).filter(|s| s.q <= state.q * (1.0 + 1e-15));
        }
        let Some(next) = next else {
            // no descent possible at working precision
            converged = true;
            break;
        };
        iterations += 1;
        let new_grad = sobolev_gradient(&next, &mut ainv_g);
        prev = Some((std::mem::take(&mut state.u), std::mem::replace(&mut grad, new_grad)));
        state = next;
        history.push(state.q);
    }

    let mut polished = false;
    if opts.polish {
        let mut v = state.u.clone();
        if prob.polish(&mut v) {
            if let Some(st) = evaluate(prob, v) {
                if st.q <= state.q * (1.0 + 1e-12) {
                    state = st;
                    polished = true;
                    let g = sobolev_gradient(&state, &mut ainv_g);
                    let mut ag = vec![0.0; n];
                    prob.stiffness_apply(&g, &mut ag);
                    gnorm = (dot(&g, &ag).max(0.0) / state.q).sqrt();
                }
            }
        }
    }

    if !converged && !polished {
        return Err(Error::NonConvergence {
            iterations,
            gradient_norm: gnorm,
            quotient: state.q,
        });
    }
    Ok(Minimizer {
        u: state.u,
        quotient: state.q,
        iterations,
        gradient_norm: gnorm,
        polished,
    })
}
