//! Groundstates without imposed radial symmetry.
//!
//! For N >= 2 the minimisation runs over axially symmetric fields u(r, θ),
//! which contain every groundstate up to rotation. For N = 1 the problem is
//! solved on [-1, 1] directly and "radial" means even.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axisym::AxisymOperator;
use crate::error::{Error, Result};
use crate::fem1d::{dot, Domain1d, Fem1d};
use crate::mesh::{build_angular_grid, build_radial_grid, AngularGrid, RadialGrid};
use crate::minimize::{minimize, Minimizer, QuotientProblem, SolveOptions};
use crate::quadrature::GaussRule;
use crate::radial::{energy_from_quotient, minimize_radial_quotient, RadialResult, DEFAULT_GRADING};
use crate::weight::{eval_v, sphere_area, ProblemParams};

/// Default clustering of the angular nodes toward θ = 0.
pub const DEFAULT_ANGULAR_GRADING: f64 = 2.0;

/// Two starts whose quotients agree to this relative tolerance are ties.
const TIE_TOL: f64 = 1e-10;

/// Tensor grid in (r, θ) for N >= 2, or a symmetric grid of [-1, 1] for N = 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisymGrid {
    pub dim: usize,
    pub radial: RadialGrid,
    /// Polar-angle nodes on [0, π]; absent for N = 1.
    pub angular: Option<AngularGrid>,
    /// Nodes of [-1, 1] (mirror image of the radial nodes); N = 1 only.
    pub line: Option<Vec<f64>>,
}

impl AxisymGrid {
    /// Sum of the lumped measure weights, equal to |B|.
    pub fn total_measure(&self) -> f64 {
        match &self.angular {
            Some(angular) => {
                let rule = GaussRule::new(8);
                let k = (self.dim - 2) as i32;
                let theta: f64 = angular
                    .nodes
                    .windows(2)
                    .map(|w| rule.integrate(w[0], w[1], |t| t.sin().powi(k)))
                    .sum();
                sphere_area(self.dim - 1) * theta * self.radial.measure_weights.iter().sum::<f64>()
            }
            None => {
                let line = self.line.as_ref().expect("N = 1 grid has a line");
                line[line.len() - 1] - line[0]
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match (&self.angular, &self.line) {
            (Some(a), _) => self.radial.n * a.n,
            (None, Some(l)) => l.len(),
            _ => 0,
        }
    }
}

/// Builds the (r, θ) grid with default clustering. For N = 1, `n_theta` is
/// ignored and the line has 2 n_r + 1 nodes.
pub fn build_axisym_grid(params: &ProblemParams, n_r: usize, n_theta: usize) -> Result<AxisymGrid> {
    build_axisym_grid_with(params, n_r, n_theta, DEFAULT_GRADING, DEFAULT_ANGULAR_GRADING)
}

pub fn build_axisym_grid_with(
    params: &ProblemParams,
    n_r: usize,
    n_theta: usize,
    radial_grading: f64,
    angular_grading: f64,
) -> Result<AxisymGrid> {
    if n_r < 32 {
        return Err(Error::InvalidParams(format!("need n_r >= 32, got {n_r}")));
    }
    if params.dim == 1 {
        let radial = build_radial_grid(params, n_r + 1, radial_grading)?;
        let mut line: Vec<f64> = radial.nodes.iter().rev().map(|r| -r).collect();
        line.extend_from_slice(&radial.nodes[1..]);
        return Ok(AxisymGrid {
            dim: 1,
            radial,
            angular: None,
            line: Some(line),
        });
    }
    if n_theta < 16 {
        return Err(Error::InvalidParams(format!("need n_theta >= 16, got {n_theta}")));
    }
    let radial = build_radial_grid(params, n_r, radial_grading)?;
    let angular = build_angular_grid(n_theta, 2.0 / (1.0 + params.alpha), angular_grading);
    Ok(AxisymGrid {
        dim: params.dim,
        radial,
        angular: Some(angular),
        line: None,
    })
}

/// Nodal values of a field on an [`AxisymGrid`]. For N >= 2 `values` is the
/// n_r × n_θ array in row-major order (θ fastest); for N = 1 `r` holds the
/// nodes of [-1, 1] and `theta` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymField {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
}

/// Outcome of one start of the multi-start search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub label: String,
    pub quotient: f64,
    pub asym_index: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallResult {
    pub params: ProblemParams,
    pub s_full: f64,
    pub c_full: f64,
    /// The rescaled minimiser S^{1/(p-1)} u*.
    pub field: AxisymField,
    pub s_peak: f64,
    pub theta_peak: f64,
    pub beta_peak: f64,
    pub asym_index: f64,
    pub nehari_residual: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub best_start: String,
    pub starts: Vec<StartRecord>,
}

enum Discretisation {
    Axisym(Box<AxisymOperator>),
    Line(Fem1d),
}

impl Discretisation {
    fn problem(&self) -> &(dyn QuotientProblem + Sync) {
        match self {
            Discretisation::Axisym(op) => op.as_ref(),
            Discretisation::Line(fem) => fem,
        }
    }

    fn to_nodal(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Discretisation::Axisym(op) => op.to_nodal(x),
            Discretisation::Line(fem) => fem.to_nodal(x),
        }
    }

    fn asym_index(&self, full: &[f64]) -> f64 {
        match self {
            Discretisation::Axisym(op) => op.asym_index(full),
            Discretisation::Line(fem) => {
                // distance to the even part; the line grid is symmetric
                let n = full.len();
                let w = line_weights(&fem.nodes);
                let (mut num, mut den) = (0.0, 0.0);
                for k in 0..n {
                    let even = 0.5 * (full[k] + full[n - 1 - k]);
                    num += w[k] * (full[k] - even).powi(2);
                    den += w[k] * full[k] * full[k];
                }
                if den == 0.0 {
                    0.0
                } else {
                    (num / den).sqrt()
                }
            }
        }
    }

    /// Start vector from a function of (x, y) in the meridian half-plane,
    /// x along the symmetry axis; for N = 1 only y = 0 is used.
    fn start_from(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        match self {
            Discretisation::Axisym(op) => {
                let nt = op.n_theta();
                let mut full = vec![0.0; op.n_r() * nt];
                for (i, &r) in op.r_nodes.iter().enumerate() {
                    for (j, &t) in op.theta_nodes.iter().enumerate() {
                        full[i * nt + j] = f(r * t.cos(), r * t.sin());
                    }
                }
                op.from_nodal(&full)
            }
            Discretisation::Line(fem) => {
                let full: Vec<f64> = fem.nodes.iter().map(|&x| f(x, 0.0)).collect();
                fem.from_nodal(&full)
            }
        }
    }
}

fn line_weights(nodes: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; nodes.len()];
    for (e, s) in nodes.windows(2).enumerate() {
        let h = 0.5 * (s[1] - s[0]);
        w[e] += h;
        w[e + 1] += h;
    }
    w
}

fn discretise(params: &ProblemParams, grid: &AxisymGrid) -> Result<Discretisation> {
    if grid.dim != params.dim {
        return Err(Error::InvalidParams(format!(
            "grid was built for N = {}, params have N = {}",
            grid.dim, params.dim
        )));
    }
    match (&grid.angular, &grid.line) {
        (Some(angular), _) => Ok(Discretisation::Axisym(Box::new(AxisymOperator::new(*params, &grid.radial, angular)?))),
        (None, Some(line)) => Ok(Discretisation::Line(Fem1d::new(*params, Domain1d::Interval, line.clone())?)),
        _ => Err(Error::InvalidParams("grid has neither angular nor line nodes".into())),
    }
}

fn bump(x: f64, y: f64, cx: f64, width: f64) -> f64 {
    let r = (x * x + y * y).sqrt();
    let d2 = ((x - cx).powi(2) + y * y) / (width * width);
    (-d2).exp() * (1.0 - r).max(0.0) + 1e-3 * (1.0 - r * r).max(0.0)
}

fn random_start(seed: u64, index: usize) -> impl Fn(f64, f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // advance to an independent substream per start index
    rng.set_stream(index as u64 + 1);
    let r0: f64 = rng.gen_range(0.05..0.95);
    let t0: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let width: f64 = rng.gen_range(0.05..0.4);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let (cx, cy) = (r0 * t0.cos(), r0 * t0.sin());
    move |x, y| {
        let r = (x * x + y * y).sqrt();
        let d2 = ((x - cx).powi(2) + (y - cy).powi(2)) / (width * width);
        let ripple = 0.1 * (1.0 + (7.0 * x + 5.0 * y + phase).sin());
        ((-d2).exp() + ripple) * (1.0 - r).max(0.0)
    }
}

/// Minimises the full quotient. The radial minimiser on the same radial nodes
/// is computed first and used as one of the starts.
pub fn minimize_full_quotient(params: &ProblemParams, grid: &AxisymGrid, opts: &SolveOptions) -> Result<BallResult> {
    let radial = minimize_radial_quotient(params, &grid.radial, opts)?;
    minimize_full_quotient_from(params, grid, opts, &radial)
}

/// As [`minimize_full_quotient`], reusing a radial result computed on
/// `grid.radial`.
pub fn minimize_full_quotient_from(
    params: &ProblemParams,
    grid: &AxisymGrid,
    opts: &SolveOptions,
    radial: &RadialResult,
) -> Result<BallResult> {
    params.validate()?;
    if radial.profile.nodes != grid.radial.nodes {
        return Err(Error::InvalidParams("radial result was computed on a different radial grid".into()));
    }
    let disc = discretise(params, grid)?;
    let prob = disc.problem();
    let scale = 1.0 / params.alpha.max(2.0);

    let mut starts: Vec<(String, Vec<f64>)> = Vec::new();
    let radial_start = match &disc {
        Discretisation::Axisym(op) => op.from_radial(&radial.profile.values),
        Discretisation::Line(_) => disc.start_from(|x, _| radial.profile.eval(x.abs())),
    };
    starts.push(("radial".into(), radial_start));
    starts.push(("boundary".into(), disc.start_from(|x, y| bump(x, y, 1.0 - scale, scale))));
    starts.push(("origin".into(), disc.start_from(|x, y| bump(x, y, scale, scale))));
    for k in 0..opts.extra_random_starts {
        starts.push((format!("random-{k}"), disc.start_from(random_start(opts.seed, k))));
    }

    let outcomes: Vec<(String, Result<Minimizer>)> = starts
        .into_par_iter()
        .map(|(label, x)| {
            let out = minimize(prob, x, opts);
            (label, out)
        })
        .collect();

    let mut log = Vec::with_capacity(outcomes.len());
    let mut converged: Vec<(usize, Minimizer, f64)> = Vec::new();
    let mut failed_best = f64::INFINITY;
    let mut first_error = None;
    for (idx, (label, out)) in outcomes.into_iter().enumerate() {
        match out {
            Ok(m) => {
                let asym = disc.asym_index(&disc.to_nodal(&m.u));
                log.push(StartRecord {
                    label,
                    quotient: m.quotient,
                    asym_index: asym,
                    iterations: m.iterations,
                    converged: true,
                });
                converged.push((idx, m, asym));
            }
            Err(e) => {
                let (q, it) = match &e {
                    Error::NonConvergence { quotient, iterations, .. } => (*quotient, *iterations),
                    _ => (f64::NAN, 0),
                };
                if q < failed_best {
                    failed_best = q;
                }
                log.push(StartRecord {
                    label,
                    quotient: q,
                    asym_index: f64::NAN,
                    iterations: it,
                    converged: false,
                });
                first_error.get_or_insert(e);
            }
        }
    }

    let best_q = converged.iter().map(|c| c.1.quotient).fold(f64::INFINITY, f64::min);
    if converged.is_empty() || failed_best < best_q * (1.0 - TIE_TOL) {
        // an unconverged start may hold the true minimiser
        return Err(first_error.expect("some start failed"));
    }
    // ties resolved toward the larger asymmetry, then toward the earlier start
    let (idx, best, asym) = converged
        .into_iter()
        .filter(|c| c.1.quotient <= best_q * (1.0 + TIE_TOL))
        .fold(None::<(usize, Minimizer, f64)>, |acc, c| match acc {
            Some(a) if a.2 >= c.2 => Some(a),
            _ => Some(c),
        })
        .expect("at least one converged start");

    let p = params.p;
    let s_full = best.quotient;
    let c_full = energy_from_quotient(s_full, p);
    let rescale = s_full.powf(1.0 / (p - 1.0));
    let x: Vec<f64> = best.u.iter().map(|v| v * rescale).collect();
    let nehari_residual = {
        let mut ax = vec![0.0; x.len()];
        prob.stiffness_apply(&x, &mut ax);
        let mut g = vec![0.0; x.len()];
        let pv = prob.nonlinear(&x, &mut g);
        (dot(&x, &ax) - pv).abs() / pv
    };
    let values = disc.to_nodal(&x);
    let (field, s_peak, theta_peak, beta_peak) = match &disc {
        Discretisation::Axisym(op) => {
            let nt = op.n_theta();
            let (k, &beta) = values
                .iter()
                .enumerate()
                .fold((0, &f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            let field = AxisymField {
                r: op.r_nodes.clone(),
                theta: op.theta_nodes.clone(),
                values: values.clone(),
            };
            (field, op.r_nodes[k / nt], op.theta_nodes[k % nt], beta)
        }
        Discretisation::Line(fem) => {
            let (k, &beta) = values
                .iter()
                .enumerate()
                .fold((0, &f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            let xk = fem.nodes[k];
            let theta = if xk < 0.0 { std::f64::consts::PI } else { 0.0 };
            let field = AxisymField {
                r: fem.nodes.clone(),
                theta: Vec::new(),
                values: values.clone(),
            };
            (field, xk.abs(), theta, beta)
        }
    };

    Ok(BallResult {
        params: *params,
        s_full,
        c_full,
        field,
        s_peak,
        theta_peak,
        beta_peak,
        asym_index: asym,
        nehari_residual,
        iterations: best.iterations,
        gradient_norm: best.gradient_norm,
        best_start: log[idx].label.clone(),
        starts: log,
    })
}

/// Radial and full solves on a common grid.
pub fn solve_pair(
    params: &ProblemParams,
    n_r: usize,
    n_theta: usize,
    opts: &SolveOptions,
) -> Result<(RadialResult, BallResult)> {
    let grid = build_axisym_grid(params, n_r, n_theta)?;
    let radial = minimize_radial_quotient(params, &grid.radial, opts)?;
    let full = minimize_full_quotient_from(params, &grid, opts, &radial)?;
    Ok((radial, full))
}

/// S_rad - S_full, and whether it signals symmetry breaking at tolerance
/// `rel_tol` (the gap and the angular dependence must both be significant).
pub fn symmetry_gap(radial: &RadialResult, full: &BallResult, rel_tol: f64) -> (f64, bool) {
    let gap = radial.s_rad - full.s_full;
    let broken = gap > rel_tol * radial.s_rad && full.asym_index > 10.0 * rel_tol;
    (gap, broken)
}

/// ω(s) = exp(-1/(1 - s²)) on the unit ball, and s ↦ |ω'(s)|.
fn omega(s: f64) -> (f64, f64) {
    if s >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let w = (-1.0 / q).exp();
    (w, w * 2.0 * s / (q * q))
}

/// Quotient of the bump y ↦ ω(|y - c e_1| / ρ) for a ball of radius ρ around
/// c e_1 that lies inside B.
fn bump_quotient(params: &ProblemParams, center: f64, rho: f64) -> f64 {
    let dim = params.dim;
    let n = dim as i32;
    let p = params.p;
    let rule = GaussRule::new(8);
    let panels = 64;
    // ∫|Dw|² = ρ^{N-2} |S^{N-1}| ∫_0^1 ω'(s)² s^{N-1} ds
    let mut grad_int = 0.0;
    for k in 0..panels {
        let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
        grad_int += rule.integrate(a, b, |s| omega(s).1.powi(2) * s.powi(n - 1));
    }
    let energy = rho.powi(n - 2) * sphere_area(dim) * grad_int;

    // ∫ V(|x|) w^{p+1} dx in polar coordinates (s, φ) around the centre
    let weighted = if dim == 1 {
        let mut sum = 0.0;
        for k in 0..panels {
            let (a, b) = (-1.0 + 2.0 * k as f64 / panels as f64, -1.0 + 2.0 * (k + 1) as f64 / panels as f64);
            sum += rule.integrate(a, b, |s| {
                eval_v(params, (center + rho * s).abs()) * omega(s.abs()).0.powf(p + 1.0)
            });
        }
        rho * sum
    } else {
        let c_n = sphere_area(dim - 1);
        let angle_panels = 48;
        let mut sum = 0.0;
        for k in 0..panels {
            let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            sum += rule.integrate(a, b, |s| {
                let radial_part = omega(s).0.powf(p + 1.0) * s.powi(n - 1);
                if radial_part == 0.0 {
                    return 0.0;
                }
                let mut ang = 0.0;
                for m in 0..angle_panels {
                    let (pa, pb) = (
                        std::f64::consts::PI * m as f64 / angle_panels as f64,
                        std::f64::consts::PI * (m + 1) as f64 / angle_panels as f64,
                    );
                    ang += rule.integrate(pa, pb, |phi| {
                        let x = center + rho * s * phi.cos();
                        let y = rho * s * phi.sin();
                        eval_v(params, (x * x + y * y).sqrt().min(1.0)) * phi.sin().powi(n - 2)
                    });
                }
                radial_part * ang
            });
        }
        c_n * rho.powi(n) * sum
    };
    energy / weighted.powf(2.0 / (p + 1.0))
}

/// Upper bound for S_α from rescaled bumps ω(α(x - x_α)/w) with
/// x_α = (1 - 1/α) e_1 (beyond the shell) and x_α = (1/α) e_1 (inside it),
/// where `bump_width` w ∈ (0, 1] shrinks the support radius w/α.
pub fn trial_upper_bound(params: &ProblemParams, bump_width: f64) -> Result<f64> {
    params.validate()?;
    if !(bump_width > 0.0 && bump_width <= 1.0) {
        return Err(Error::InvalidParams(format!("bump width must lie in (0, 1], got {bump_width}")));
    }
    let alpha = params.alpha;
    let big_r = params.radius;
    let rho = bump_width / alpha;
    let mut best: Option<f64> = None;
    if big_r < 1.0 && alpha > 2.0 / (1.0 - big_r) {
        best = Some(bump_quotient(params, 1.0 - 1.0 / alpha, rho));
    }
    if big_r > 0.0 && alpha > 2.0 / big_r {
        let q = bump_quotient(params, 1.0 / alpha, rho);
        best = Some(best.map_or(q, |b| b.min(q)));
    }
    best.ok_or_else(|| {
        Error::InvalidParams(format!(
            "no trial bump fits: need alpha > 2/(1-R) or alpha > 2/R (alpha = {alpha}, R = {big_r})"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_measures() {
        let p3 = ProblemParams::new(3, 2.0, 0.3, 10.0).unwrap();
        let g = build_axisym_grid(&p3, 64, 32).unwrap();
        assert!((g.total_measure() - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-10);
        let p2 = ProblemParams::new(2, 3.0, 0.3, 10.0).unwrap();
        let g = build_axisym_grid(&p2, 64, 32).unwrap();
        assert!((g.total_measure() - std::f64::consts::PI).abs() < 1e-10);
        let p1 = ProblemParams::new(1, 3.0, 0.3, 10.0).unwrap();
        let g = build_axisym_grid(&p1, 64, 0).unwrap();
        assert_eq!(g.line.as_ref().unwrap().len(), 129);
        assert!((g.total_measure() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn line_grid_is_symmetric() {
        let p1 = ProblemParams::new(1, 3.0, 0.3, 10.0).unwrap();
        let g = build_axisym_grid(&p1, 40, 0).unwrap();
        let line = g.line.unwrap();
        let n = line.len();
        for k in 0..n {
            assert_eq!(line[k], -line[n - 1 - k]);
        }
    }

    #[test]
    fn omega_derivative_matches_difference_quotient() {
        for &s in &[0.1, 0.5, 0.8] {
            let h = 1e-6;
            let fd = (omega(s + h).0 - omega(s - h).0) / (2.0 * h);
            assert!((fd + omega(s).1).abs() < 1e-7);
        }
    }

    #[test]
    fn trial_bound_needs_room() {
        let p = ProblemParams::new(3, 2.0, 0.0, 1.5).unwrap();
        assert!(trial_upper_bound(&p, 1.0).is_err());
        let p = ProblemParams::new(3, 2.0, 0.0, 10.0).unwrap();
        assert!(trial_upper_bound(&p, 1.0).unwrap() > 0.0);
    }
}
