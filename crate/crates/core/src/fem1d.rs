//! Piecewise-linear discretisation of the weighted quotient on a 1D mesh.
//!
//! The Dirichlet integral is evaluated exactly on the hat-function space; the
//! weighted L^{p+1} term by a composite Gauss rule whose elements are split at
//! the kinks of V, so the discrete quotient is the restriction of the
//! continuous one to a conforming subspace.

use crate::error::{Error, Result};
use crate::minimize::QuotientProblem;
use crate::quadrature::GaussRule;
use crate::tridiag::{solve_general, SpdTridiag};
use crate::weight::{eval_v, eval_v_prime, ProblemParams};

/// Gauss points per element (or per sub-element on either side of a kink).
pub const GAUSS_POINTS: usize = 4;

/// A quadrature point of the composite rule.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub elem: usize,
    /// Local coordinate in [0, 1] on the element.
    pub t: f64,
    pub x: f64,
    /// Geometric weight including the measure density.
    pub w: f64,
}

/// Evaluates |u|^{p+1} and |u|^{p-1} u.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Power {
    p: f64,
    int: Option<i32>,
}

impl Power {
    pub(crate) fn new(p: f64) -> Self {
        let int = (p.fract() == 0.0 && p.abs() < 64.0).then_some(p as i32);
        Self { p, int }
    }

    /// Returns (|u|^{p+1}, |u|^{p-1} u).
    #[inline]
    pub(crate) fn eval(&self, u: f64) -> (f64, f64) {
        let a = u.abs();
        let pm1 = match self.int {
            Some(k) => a.powi(k - 1),
            None => a.powf(self.p - 1.0),
        };
        (pm1 * a * a, pm1 * u)
    }

    /// |u|^{p-1}.
    #[inline]
    pub(crate) fn pm1(&self, u: f64) -> f64 {
        let a = u.abs();
        match self.int {
            Some(k) => a.powi(k - 1),
            None => a.powf(self.p - 1.0),
        }
    }
}

/// Geometry of the 1D problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain1d {
    /// Radial functions on [0, 1] with measure |S^{N-1}| r^{N-1} dr and a
    /// natural condition at r = 0.
    Radial,
    /// Functions on [-1, 1] vanishing at both ends (N = 1, no symmetry).
    Interval,
}

#[derive(Debug, Clone)]
pub struct Fem1d {
    pub params: ProblemParams,
    pub domain: Domain1d,
    pub nodes: Vec<f64>,
    /// E(u) = Σ_e stiff[e] (u_{e+1} - u_e)^2.
    pub stiff: Vec<f64>,
    pub points: Vec<QuadPoint>,
    /// w · V(|x|) at each point.
    pub weighted: Vec<f64>,
    first_free: usize,
    power: Power,
    factor: SpdTridiag,
}

fn measure(domain: Domain1d, dim: usize, x: f64) -> f64 {
    match domain {
        Domain1d::Radial => crate::weight::sphere_area(dim) * x.abs().powi(dim as i32 - 1),
        Domain1d::Interval => 1.0,
    }
}

// ∫_a^b r^{N-1} dr / (b - a), written to avoid cancellation.
fn mean_power(a: f64, b: f64, dim: usize) -> f64 {
    let k = dim - 1;
    let mut sum = 0.0;
    for j in 0..=k {
        sum += a.powi(j as i32) * b.powi((k - j) as i32);
    }
    sum / dim as f64
}

impl Fem1d {
    pub fn new(params: ProblemParams, domain: Domain1d, nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n < 3 {
            return Err(Error::InvalidParams("1D mesh needs at least 3 nodes".into()));
        }
        let dim = params.dim;
        let area = crate::weight::sphere_area(dim);
        let stiff: Vec<f64> = nodes
            .windows(2)
            .map(|w| {
                let h = w[1] - w[0];
                match domain {
                    Domain1d::Radial => area * mean_power(w[0], w[1], dim) / h,
                    Domain1d::Interval => 1.0 / h,
                }
            })
            .collect();

        let mut kinks = Vec::new();
        if params.has_interior_shell() {
            kinks.push(params.radius);
            if domain == Domain1d::Interval {
                kinks.push(-params.radius);
            }
        }
        let rule = GaussRule::new(GAUSS_POINTS);
        let mut points = Vec::with_capacity(n * GAUSS_POINTS);
        for (e, w) in nodes.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let h = b - a;
            let mut cuts = vec![a];
            cuts.extend(kinks.iter().copied().filter(|&k| a < k && k < b));
            cuts.push(b);
            for seg in cuts.windows(2) {
                let (sa, sb) = (seg[0], seg[1]);
                for (&tq, &wq) in rule.nodes.iter().zip(&rule.weights) {
                    let x = sa + (sb - sa) * tq;
                    points.push(QuadPoint {
                        elem: e,
                        t: (x - a) / h,
                        x,
                        w: wq * (sb - sa) * measure(domain, dim, x),
                    });
                }
            }
        }
        let weighted: Vec<f64> = points.iter().map(|q| q.w * eval_v(&params, q.x.abs())).collect();
        if weighted.iter().all(|&w| w == 0.0) {
            return Err(Error::DegenerateWeight { alpha: params.alpha });
        }

        let first_free = match domain {
            Domain1d::Radial => 0,
            Domain1d::Interval => 1,
        };
        let (diag, off) = stiffness_bands(&stiff, first_free, n - 2);
        let factor = SpdTridiag::factor(&diag, &off);
        Ok(Self {
            params,
            domain,
            nodes,
            stiff,
            points,
            weighted,
            first_free,
            power: Power::new(params.p),
            factor,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Index range of free nodes in the full nodal vector.
    pub fn free_range(&self) -> std::ops::RangeInclusive<usize> {
        self.first_free..=self.nodes.len() - 2
    }

    /// Embeds free values into a full nodal vector with zero boundary values.
    pub fn to_nodal(&self, u: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.nodes.len()];
        full[self.free_range()].copy_from_slice(u);
        full
    }

    pub fn from_nodal(&self, full: &[f64]) -> Vec<f64> {
        full[self.free_range()].to_vec()
    }

    /// Value of the interpolant at a quadrature point.
    #[inline]
    fn interp(&self, full: &[f64], q: &QuadPoint) -> f64 {
        full[q.elem] * (1.0 - q.t) + full[q.elem + 1] * q.t
    }

    /// ∫ w(x) |u|^{p+1} where `weights` are per-point weights.
    pub fn weighted_power_integral(&self, full: &[f64], weights: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(weights)
            .map(|(q, &w)| w * self.power.eval(self.interp(full, q)).0)
            .sum()
    }

    /// Per-point weights w · V'(|x|) |x| for the Pohozaev identity.
    pub fn pohozaev_weights(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|q| {
                let r = q.x.abs();
                let vp = eval_v_prime(&self.params, r).unwrap_or(0.0);
                q.w * vp * r
            })
            .collect()
    }

    /// Consistent weighted mass matrix bands Σ ω |u|^{p-1} φ_i φ_j on free nodes.
    fn weighted_mass_bands(&self, full: &[f64], scale: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes.len();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for (q, &w) in self.points.iter().zip(&self.weighted) {
            let c = scale * w * self.power.pm1(self.interp(full, q));
            let (a, b) = (1.0 - q.t, q.t);
            diag[q.elem] += c * a * a;
            diag[q.elem + 1] += c * b * b;
            off[q.elem] += c * a * b;
        }
        let r = self.free_range();
        (diag[r.clone()].to_vec(), off[*r.start()..*r.end()].to_vec())
    }

    /// Newton's method on A v = g(v) for the rescaled minimiser (p > 1), or
    /// Rayleigh quotient iteration (p = 1). `u` is normalised so that the
    /// weighted integral equals one, and is overwritten on success.
    fn polish_inner(&self, u: &mut [f64]) -> bool {
        let p = self.params.p;
        let m = u.len();
        let mut grad = vec![0.0; m];
        let mut au = vec![0.0; m];
        let (a_diag, a_off) = stiffness_bands(&self.stiff, self.first_free, self.nodes.len() - 2);
        let q0 = {
            let pv = self.nonlinear(u, &mut grad);
            self.stiffness_apply(u, &mut au);
            dot(u, &au) / pv.powf(2.0 / (p + 1.0))
        };

        if p == 1.0 {
            let mut v = u.to_vec();
            let mut q = q0;
            for _ in 0..8 {
                let (m_diag, m_off) = self.weighted_mass_bands(&self.to_nodal(&v), 1.0);
                let diag: Vec<f64> = a_diag.iter().zip(&m_diag).map(|(a, b)| a - q * b).collect();
                let off: Vec<f64> = a_off.iter().zip(&m_off).map(|(a, b)| a - q * b).collect();
                let rhs = tri_matvec(&m_diag, &m_off, &v);
                let Some(mut x) = solve_general(&off, &diag, &off, &rhs) else {
                    break;
                };
                let s = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
                x.iter_mut().for_each(|xi| *xi *= s);
                let pv = self.nonlinear(&x, &mut grad);
                let c = pv.powf(-0.5);
                x.iter_mut().for_each(|xi| *xi *= c);
                self.stiffness_apply(&x, &mut au);
                let q_new = dot(&x, &au);
                let done = ((q - q_new) / q).abs() < 1e-15;
                v = x;
                q = q_new;
                if done {
                    break;
                }
            }
            if q <= q0 * (1.0 + 1e-12) && v.iter().all(|&x| x >= -1e-12 * norm_inf(&v)) {
                v.iter_mut().for_each(|x| *x = x.abs());
                u.copy_from_slice(&v);
                return true;
            }
            return false;
        }

        // rescale to a solution candidate of A v = g(v)
        let mut v: Vec<f64> = u.iter().map(|x| x * q0.powf(1.0 / (p - 1.0))).collect();
        let mut best_res = f64::INFINITY;
        for _ in 0..40 {
            let _ = self.nonlinear(&v, &mut grad);
            self.stiffness_apply(&v, &mut au);
            let res: Vec<f64> = au.iter().zip(&grad).map(|(a, g)| a - g).collect();
            let res_norm = norm_inf(&res) / norm_inf(&au).max(f64::MIN_POSITIVE);
            if res_norm < 1e-15 || res_norm >= best_res * 0.999 && res_norm < 1e-12 {
                break;
            }
            best_res = best_res.min(res_norm);
            let (m_diag, m_off) = self.weighted_mass_bands(&self.to_nodal(&v), p);
            let diag: Vec<f64> = a_diag.iter().zip(&m_diag).map(|(a, b)| a - b).collect();
            let off: Vec<f64> = a_off.iter().zip(&m_off).map(|(a, b)| a - b).collect();
            let Some(delta) = solve_general(&off, &diag, &off, &res) else {
                return false;
            };
            v.iter_mut().zip(&delta).for_each(|(x, d)| *x -= d);
        }
        if v.iter().any(|&x| x < -1e-10 * norm_inf(&v)) {
            return false;
        }
        v.iter_mut().for_each(|x| *x = x.abs());
        let pv = self.nonlinear(&v, &mut grad);
        self.stiffness_apply(&v, &mut au);
        let q = dot(&v, &au) / pv.powf(2.0 / (p + 1.0));
        if !(q <= q0 * (1.0 + 1e-10)) {
            return false;
        }
        let c = pv.powf(-1.0 / (p + 1.0));
        u.iter_mut().zip(&v).for_each(|(ui, vi)| *ui = vi * c);
        true
    }
}

fn stiffness_bands(stiff: &[f64], first: usize, last: usize) -> (Vec<f64>, Vec<f64>) {
    let n = stiff.len() + 1;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for (e, &k) in stiff.iter().enumerate() {
        diag[e] += k;
        diag[e + 1] += k;
        off[e] = -k;
    }
    (diag[first..=last].to_vec(), off[first..last].to_vec())
}

fn tri_matvec(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let m = diag.len();
    (0..m)
        .map(|i| {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v += off[i - 1] * x[i - 1];
            }
            if i + 1 < m {
                v += off[i] * x[i + 1];
            }
            v
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

impl QuotientProblem for Fem1d {
    fn len(&self) -> usize {
        self.nodes.len() - 1 - self.first_free
    }

    fn exponent(&self) -> f64 {
        self.params.p
    }

    fn stiffness_apply(&self, u: &[f64], out: &mut [f64]) {
        let f = self.first_free;
        let m = u.len();
        out.iter_mut().for_each(|o| *o = 0.0);
        // element e couples nodes e and e+1; free index = node - f
        for (e, &k) in self.stiff.iter().enumerate() {
            let ia = e.checked_sub(f).filter(|&i| i < m);
            let ib = (e + 1).checked_sub(f).filter(|&i| i < m);
            let ua = ia.map_or(0.0, |i| u[i]);
            let ub = ib.map_or(0.0, |i| u[i]);
            let d = k * (ua - ub);
            if let Some(i) = ia {
                out[i] += d;
            }
            if let Some(i) = ib {
                out[i] -= d;
            }
        }
    }

    fn stiffness_solve(&self, rhs: &[f64], out: &mut [f64]) {
        out.copy_from_slice(rhs);
        self.factor.solve_in_place(out);
    }

    fn nonlinear(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        let full = self.to_nodal(u);
        let n = self.nodes.len();
        let mut g_full = vec![0.0; n];
        let mut total = 0.0;
        for (q, &w) in self.points.iter().zip(&self.weighted) {
            if w == 0.0 {
                continue;
            }
            let (pw, d) = self.power.eval(self.interp(&full, q));
            total += w * pw;
            g_full[q.elem] += w * d * (1.0 - q.t);
            g_full[q.elem + 1] += w * d * q.t;
        }
        grad.copy_from_slice(&g_full[self.free_range()]);
        total
    }

    fn polish(&self, u: &mut [f64]) -> bool {
        self.polish_inner(u)
    }
}
