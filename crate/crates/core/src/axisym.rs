//! Bilinear finite elements for axially symmetric fields u(r, θ) on the ball,
//! N >= 2, with measure |S^{N-2}| r^{N-1} sin^{N-2}θ dr dθ (for N = 2 the
//! factor 2 accounts for the reflection θ ↦ -θ).
//!
//! Unknowns: the value at the origin, then rows i = 1..n_r-2 of the nodal
//! array (r_i, θ_j) in row-major order; the row r = 1 is zero.
//!
//! The stiffness matrix A = c (A_r ⊗ M_θ + M'_r ⊗ A_θ) is inverted through
//! the generalised eigenbasis of (A_θ, M_θ), which reduces each solve to one
//! tridiagonal system per angular mode.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fem1d::Power;
use crate::mesh::{AngularGrid, RadialGrid};
use crate::minimize::QuotientProblem;
use crate::quadrature::GaussRule;
use crate::tridiag::SpdTridiag;
use crate::weight::{eval_v, ProblemParams};

const RADIAL_POINTS: usize = 4;
const ANGULAR_POINTS: usize = 3;

/// |S^{k}| for k >= 0 (|S^0| = 2).
fn sphere(k: usize) -> f64 {
    crate::weight::sphere_area(k + 1)
}

#[derive(Debug, Clone)]
struct Band {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Band {
    fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    fn apply_row(&self, i: usize, x: impl Fn(usize) -> f64) -> f64 {
        let n = self.diag.len();
        let mut v = self.diag[i] * x(i);
        if i > 0 {
            v += self.off[i - 1] * x(i - 1);
        }
        if i + 1 < n {
            v += self.off[i] * x(i + 1);
        }
        v
    }
}

/// Assembles 1D stiffness and mass bands with weight `rho` by Gauss quadrature.
fn assemble(nodes: &[f64], rho: impl Fn(f64) -> f64, points: usize) -> (Band, Band) {
    let n = nodes.len();
    let rule = GaussRule::new(points);
    let mut stiff = Band::zeros(n);
    let mut mass = Band::zeros(n);
    for (e, w) in nodes.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        let (mut k, mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0, 0.0);
        for (&t, &wq) in rule.nodes.iter().zip(&rule.weights) {
            let x = a + h * t;
            let wr = wq * h * rho(x);
            k += wr / (h * h);
            m00 += wr * (1.0 - t) * (1.0 - t);
            m01 += wr * (1.0 - t) * t;
            m11 += wr * t * t;
        }
        stiff.diag[e] += k;
        stiff.diag[e + 1] += k;
        stiff.off[e] -= k;
        mass.diag[e] += m00;
        mass.diag[e + 1] += m11;
        mass.off[e] += m01;
    }
    (stiff, mass)
}

#[derive(Debug, Clone, Copy)]
struct RadialPoint {
    elem: usize,
    t: f64,
    /// Gauss weight × r^{N-1} × V(r) × c_N.
    w: f64,
}

#[derive(Debug, Clone, Copy)]
struct AngularPoint {
    elem: usize,
    t: f64,
    w: f64,
}

#[derive(Debug, Clone)]
pub struct AxisymOperator {
    pub params: ProblemParams,
    pub r_nodes: Vec<f64>,
    pub theta_nodes: Vec<f64>,
    /// |S^{N-2}|.
    pub c_n: f64,
    a_r: Band,
    m_r_inv2: Band,
    a_theta: Band,
    m_theta: Band,
    /// Lumped angular weights ∫ψ_j sin^{N-2}.
    pub theta_weights: Vec<f64>,
    /// Lumped radial weights ∫φ_i r^{N-1}.
    pub r_weights: Vec<f64>,
    // generalised eigenbasis, row-major n_θ × n_θ: phi[j * n_θ + k]
    phi: DMatrix<f64>,
    const_norm: f64,
    mode_factors: Vec<SpdTridiag>,
    rpoints: Vec<RadialPoint>,
    apoints: Vec<AngularPoint>,
    power: Power,
}

impl AxisymOperator {
    pub fn new(params: ProblemParams, radial: &RadialGrid, angular: &AngularGrid) -> Result<Self> {
        let dim = params.dim;
        if dim < 2 {
            return Err(Error::Dimension {
                what: "axisymmetric discretisation",
                min: 2,
                dim,
            });
        }
        let nr = radial.nodes.len();
        let nt = angular.nodes.len();
        let r_nodes = radial.nodes.clone();
        let theta_nodes = angular.nodes.clone();
        let c_n = sphere(dim - 2);
        let k = (dim - 2) as i32;

        // radial matrices on nodes 0..nr-1 (the last row is dropped later)
        let (a_r, _) = assemble(&r_nodes, |r| r.powi(dim as i32 - 1), RADIAL_POINTS);
        let (_, m_r_inv2) = assemble(&r_nodes, |r| r.powi(dim as i32 - 3), 8);
        let (a_theta, m_theta) = assemble(&theta_nodes, |t| t.sin().powi(k), 6);

        let r_weights = lumped(&r_nodes, |r| r.powi(dim as i32 - 1));
        let theta_weights = lumped(&theta_nodes, |t| t.sin().powi(k));

        // generalised eigenproblem A_θ φ = λ M_θ φ via Cholesky of M_θ
        let mut mdense = DMatrix::<f64>::zeros(nt, nt);
        let mut adense = DMatrix::<f64>::zeros(nt, nt);
        for j in 0..nt {
            mdense[(j, j)] = m_theta.diag[j];
            adense[(j, j)] = a_theta.diag[j];
            if j + 1 < nt {
                mdense[(j, j + 1)] = m_theta.off[j];
                mdense[(j + 1, j)] = m_theta.off[j];
                adense[(j, j + 1)] = a_theta.off[j];
                adense[(j + 1, j)] = a_theta.off[j];
            }
        }
        let chol = mdense
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidParams("angular mass matrix is not positive definite".into()))?;
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParams("singular angular mass matrix".into()))?;
        let c = &l_inv * &adense * l_inv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..nt).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let l_inv_t = l_inv.transpose();
        let mut phi = DMatrix::<f64>::zeros(nt, nt);
        let mut lambda = vec![0.0; nt];
        for (col, &idx) in order.iter().enumerate() {
            let v = &l_inv_t * eig.eigenvectors.column(idx);
            phi.set_column(col, &v);
            lambda[col] = eig.eigenvalues[idx].max(0.0);
        }
        // the constant mode is exact
        let total: f64 = theta_weights.iter().sum();
        let const_norm = total.sqrt();
        lambda[0] = 0.0;
        for j in 0..nt {
            phi[(j, 0)] = 1.0 / const_norm;
        }

        // per-mode radial factors: mode 0 on rows 0..nr-2, others on rows 1..nr-2
        let mut mode_factors = Vec::with_capacity(nt);
        let last = nr - 2;
        for (kk, &lam) in lambda.iter().enumerate() {
            let first = if kk == 0 { 0 } else { 1 };
            let diag: Vec<f64> = (first..=last)
                .map(|i| a_r.diag[i] + lam * m_r_inv2.diag[i])
                .collect();
            let off: Vec<f64> = (first..last).map(|i| a_r.off[i] + lam * m_r_inv2.off[i]).collect();
            mode_factors.push(SpdTridiag::factor(&diag, &off));
        }

        // nonlinear quadrature
        let mut kinks = Vec::new();
        if params.has_interior_shell() {
            kinks.push(params.radius);
        }
        let rrule = GaussRule::new(RADIAL_POINTS);
        let mut rpoints = Vec::new();
        for (e, w) in r_nodes.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let mut cuts = vec![a];
            cuts.extend(kinks.iter().copied().filter(|&x| a < x && x < b));
            cuts.push(b);
            for seg in cuts.windows(2) {
                for (&tq, &wq) in rrule.nodes.iter().zip(&rrule.weights) {
                    let x = seg[0] + (seg[1] - seg[0]) * tq;
                    let w = c_n * wq * (seg[1] - seg[0]) * x.powi(dim as i32 - 1) * eval_v(&params, x);
                    if w > 0.0 {
                        rpoints.push(RadialPoint {
                            elem: e,
                            t: (x - a) / (b - a),
                            w,
                        });
                    }
                }
            }
        }
        if rpoints.is_empty() {
            return Err(Error::DegenerateWeight { alpha: params.alpha });
        }
        // angular rule normalised per element so that constants integrate
        // exactly against sin^{N-2}
        let arule = GaussRule::new(ANGULAR_POINTS);
        let exact = GaussRule::new(8);
        let mut apoints = Vec::new();
        for (e, w) in theta_nodes.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let h = b - a;
            let want = exact.integrate(a, b, |t| t.sin().powi(k));
            let raw: Vec<f64> = arule
                .nodes
                .iter()
                .zip(&arule.weights)
                .map(|(&t, &wq)| wq * h * (a + h * t).sin().powi(k))
                .collect();
            let sum: f64 = raw.iter().sum();
            for (&t, &wr) in arule.nodes.iter().zip(&raw) {
                apoints.push(AngularPoint {
                    elem: e,
                    t,
                    w: wr * want / sum,
                });
            }
        }

        Ok(Self {
            params,
            r_nodes,
            theta_nodes,
            c_n,
            a_r,
            m_r_inv2,
            a_theta,
            m_theta,
            theta_weights,
            r_weights,
            phi,
            const_norm,
            mode_factors,
            rpoints,
            apoints,
            power: Power::new(params.p),
        })
    }

    pub fn n_r(&self) -> usize {
        self.r_nodes.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta_nodes.len()
    }

    /// Number of interior rows (r_1 .. r_{n_r - 2}).
    fn rows(&self) -> usize {
        self.r_nodes.len() - 2
    }

    /// Full nodal array (n_r × n_θ, row-major) from the unknown vector.
    pub fn to_nodal(&self, x: &[f64]) -> Vec<f64> {
        let nt = self.n_theta();
        let mut full = vec![0.0; self.n_r() * nt];
        full[..nt].iter_mut().for_each(|v| *v = x[0]);
        full[nt..nt + self.rows() * nt].copy_from_slice(&x[1..]);
        full
    }

    /// Unknown vector from a nodal array; the origin value is the angular
    /// mean of row 0.
    pub fn from_nodal(&self, full: &[f64]) -> Vec<f64> {
        let nt = self.n_theta();
        let mut x = Vec::with_capacity(1 + self.rows() * nt);
        x.push(full[..nt].iter().sum::<f64>() / nt as f64);
        x.extend_from_slice(&full[nt..nt + self.rows() * nt]);
        x
    }

    /// Relative L² distance between a nodal field and its angular average.
    pub fn asym_index(&self, full: &[f64]) -> f64 {
        let nt = self.n_theta();
        let total: f64 = self.theta_weights.iter().sum();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &wr) in self.r_weights.iter().enumerate() {
            let row = &full[i * nt..(i + 1) * nt];
            let mean: f64 = row.iter().zip(&self.theta_weights).map(|(u, w)| u * w).sum::<f64>() / total;
            for (u, w) in row.iter().zip(&self.theta_weights) {
                num += wr * w * (u - mean) * (u - mean);
                den += wr * w * u * u;
            }
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    /// Total lumped measure c_N Σ_i Σ_j w_i m_j, equal to |B|.
    pub fn total_measure(&self) -> f64 {
        self.c_n * self.r_weights.iter().sum::<f64>() * self.theta_weights.iter().sum::<f64>()
    }

    /// Radial function (values on the radial nodes) as an unknown vector.
    pub fn from_radial(&self, values: &[f64]) -> Vec<f64> {
        let nt = self.n_theta();
        let mut x = vec![values[0]];
        for &v in &values[1..=self.rows()] {
            x.extend(std::iter::repeat_n(v, nt));
        }
        x
    }
}

fn lumped(nodes: &[f64], rho: impl Fn(f64) -> f64) -> Vec<f64> {
    let rule = GaussRule::new(8);
    let mut w = vec![0.0; nodes.len()];
    for (e, s) in nodes.windows(2).enumerate() {
        let (a, b) = (s[0], s[1]);
        let h = b - a;
        w[e] += rule.integrate(a, b, |x| (b - x) / h * rho(x));
        w[e + 1] += rule.integrate(a, b, |x| (x - a) / h * rho(x));
    }
    w
}

impl QuotientProblem for AxisymOperator {
    fn len(&self) -> usize {
        1 + self.rows() * self.n_theta()
    }

    fn exponent(&self) -> f64 {
        self.params.p
    }

    fn stiffness_apply(&self, x: &[f64], out: &mut [f64]) {
        let nt = self.n_theta();
        let rows = self.rows();
        let full = self.to_nodal(x);
        // row products U M_θ and U A_θ
        let mut um = vec![0.0; (rows + 2) * nt];
        let mut ua = vec![0.0; (rows + 2) * nt];
        for i in 0..=rows {
            let row = &full[i * nt..(i + 1) * nt];
            for j in 0..nt {
                um[i * nt + j] = self.m_theta.apply_row(j, |jj| row[jj]);
                ua[i * nt + j] = self.a_theta.apply_row(j, |jj| row[jj]);
            }
        }
        let c = self.c_n;
        // origin: only A_r couples, summed over the row
        let mut s0 = 0.0;
        for j in 0..nt {
            s0 += self.a_r.diag[0] * um[j] + self.a_r.off[0] * um[nt + j];
        }
        out[0] = c * s0;
        for i in 1..=rows {
            for j in 0..nt {
                let mut v = self.a_r.off[i - 1] * um[(i - 1) * nt + j]
                    + self.a_r.diag[i] * um[i * nt + j]
                    + self.a_r.off[i] * um[(i + 1) * nt + j];
                // the origin row has U A_θ = 0
                if i > 1 {
                    v += self.m_r_inv2.off[i - 1] * ua[(i - 1) * nt + j];
                }
                v += self.m_r_inv2.diag[i] * ua[i * nt + j] + self.m_r_inv2.off[i] * ua[(i + 1) * nt + j];
                out[1 + (i - 1) * nt + j] = c * v;
            }
        }
    }

    fn stiffness_solve(&self, rhs: &[f64], out: &mut [f64]) {
        let nt = self.n_theta();
        let rows = self.rows();
        // modal right-hand sides: G = F Φ for interior rows
        let f = DMatrix::from_row_slice(rows, nt, &rhs[1..]);
        let g = &f * &self.phi;
        let mut w = DMatrix::<f64>::zeros(rows, nt);
        // mode 0 includes the origin
        let mut v0 = Vec::with_capacity(rows + 1);
        v0.push(rhs[0] / self.const_norm);
        v0.extend((0..rows).map(|i| g[(i, 0)]));
        self.mode_factors[0].solve_in_place(&mut v0);
        let origin = v0[0] / self.const_norm;
        for i in 0..rows {
            w[(i, 0)] = v0[i + 1];
        }
        let mut col = vec![0.0; rows];
        for k in 1..nt {
            for i in 0..rows {
                col[i] = g[(i, k)];
            }
            self.mode_factors[k].solve_in_place(&mut col);
            for i in 0..rows {
                w[(i, k)] = col[i];
            }
        }
        let u = &w * self.phi.transpose();
        out[0] = origin / self.c_n;
        for i in 0..rows {
            for j in 0..nt {
                out[1 + i * nt + j] = u[(i, j)] / self.c_n;
            }
        }
    }

    fn nonlinear(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let nt = self.n_theta();
        let full = self.to_nodal(x);
        let mut gfull = vec![0.0; full.len()];
        let mut line = vec![0.0; nt];
        let mut dual = vec![0.0; nt];
        let mut total = 0.0;
        for rp in &self.rpoints {
            let (a, b) = (rp.elem * nt, (rp.elem + 1) * nt);
            for j in 0..nt {
                line[j] = full[a + j] * (1.0 - rp.t) + full[b + j] * rp.t;
            }
            dual.iter_mut().for_each(|d| *d = 0.0);
            let mut sub = 0.0;
            for ap in &self.apoints {
                let u = line[ap.elem] * (1.0 - ap.t) + line[ap.elem + 1] * ap.t;
                let (pw, d) = self.power.eval(u);
                sub += ap.w * pw;
                let dw = ap.w * d;
                dual[ap.elem] += dw * (1.0 - ap.t);
                dual[ap.elem + 1] += dw * ap.t;
            }
            total += rp.w * sub;
            let (wa, wb) = (rp.w * (1.0 - rp.t), rp.w * rp.t);
            for j in 0..nt {
                gfull[a + j] += wa * dual[j];
                gfull[b + j] += wb * dual[j];
            }
        }
        grad[0] = gfull[..nt].iter().sum();
        grad[1..].copy_from_slice(&gfull[nt..nt + self.rows() * nt]);
        total
    }
}
