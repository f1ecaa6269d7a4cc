//! The shell weight V_{R,α}, its derivative and integrals, and the
//! dimensional constants entering the growth estimates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{beta_fn, log_gamma};

/// ln of the smallest positive normal double, below which `exp` underflows.
const LOG_UNDERFLOW: f64 = -745.0;

/// One instance of the boundary value problem: dimension, exponent, shell
/// radius and weight exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub p: f64,
    pub radius: f64,
    pub alpha: f64,
}

impl ProblemParams {
    /// Validated constructor for a superlinear, Sobolev-subcritical instance.
    pub fn new(dim: usize, p: f64, radius: f64, alpha: f64) -> Result<Self> {
        let params = Self::unchecked(dim, p, radius, alpha);
        params.validate()?;
        Ok(params)
    }

    /// Constructor for the linear (p = 1) eigenvalue problem and other
    /// callers that check admissibility themselves.
    pub fn unchecked(dim: usize, p: f64, radius: f64, alpha: f64) -> Self {
        Self {
            dim,
            p,
            radius,
            alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParams("dimension N must be at least 1".into()));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidParams(format!("exponent p must satisfy p > 1, got {}", self.p)));
        }
        if let Some(pc) = critical_exponent(self.dim) {
            if self.p >= pc {
                return Err(Error::InvalidParams(format!(
                    "exponent p = {} is not Sobolev-subcritical: need p < (N+2)/(N-2) = {pc} for N = {}",
                    self.p, self.dim
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.radius) {
            return Err(Error::InvalidParams(format!("shell radius R must lie in [0, 1], got {}", self.radius)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParams(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        Ok(())
    }

    /// True when the shell of zeroes lies strictly inside the ball.
    pub fn has_interior_shell(&self) -> bool {
        self.radius > 0.0 && self.radius < 1.0
    }

    /// Exponent N - 2 - 2N/(p+1) used to normalise best constants.
    pub fn scaling_exponent(&self) -> f64 {
        let n = self.dim as f64;
        n - 2.0 - 2.0 * n / (self.p + 1.0)
    }
}

/// (N+2)/(N-2) for N >= 3, none otherwise.
pub fn critical_exponent(dim: usize) -> Option<f64> {
    (dim >= 3).then(|| (dim as f64 + 2.0) / (dim as f64 - 2.0))
}

/// |S^{N-1}| = 2 π^{N/2} / Γ(N/2).
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            let half = dim as f64 / 2.0;
            2.0 * PI.powf(half) / log_gamma(half).expect("positive argument").exp()
        }
    }
}

// base^alpha with base in [0, 1], switching to log space for large alpha.
fn pow_weight(base: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    if base <= 0.0 {
        return 0.0;
    }
    if base >= 1.0 {
        return 1.0;
    }
    if alpha > 50.0 {
        let log = alpha * base.ln();
        if log < LOG_UNDERFLOW {
            0.0
        } else {
            log.exp()
        }
    } else {
        base.powf(alpha)
    }
}

/// Position relative to the shell: the base of the power and the slope of the
/// base with respect to r.
fn shell_base(params: &ProblemParams, r: f64) -> (f64, f64) {
    let big_r = params.radius;
    if big_r == 0.0 {
        (r, 1.0)
    } else if big_r == 1.0 {
        (1.0 - r, -1.0)
    } else if r < big_r {
        ((big_r - r) / big_r, -1.0 / big_r)
    } else {
        ((r - big_r) / (1.0 - big_r), 1.0 / (1.0 - big_r))
    }
}

/// V_{R,α}(r) for r in [0, 1].
pub fn eval_v(params: &ProblemParams, r: f64) -> f64 {
    let (base, _) = shell_base(params, r);
    pow_weight(base, params.alpha)
}

/// V'(r). At the kink r = R the derivative is 0 for α > 1; otherwise a
/// [`Error::SingularPoint`] carrying the one-sided limits is returned.
pub fn eval_v_prime(params: &ProblemParams, r: f64) -> Result<f64> {
    let alpha = params.alpha;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let (base, slope) = shell_base(params, r);
    if base > 0.0 {
        return Ok(alpha * slope * pow_weight(base, alpha - 1.0));
    }
    // base == 0: r sits on the zero set of V
    if alpha > 1.0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        let (left, right) = if params.has_interior_shell() {
            (Some(-1.0 / params.radius), Some(1.0 / (1.0 - params.radius)))
        } else {
            // R = 0 at r = 0 or R = 1 at r = 1: V is affine there
            return Ok(slope);
        };
        return Err(Error::SingularPoint {
            radius: params.radius,
            alpha,
            left,
            right,
        });
    }
    Err(Error::SingularPoint {
        radius: params.radius,
        alpha,
        left: None,
        right: None,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact ∫_B V(|x|) dx, by the substitutions s = 1 - r/R and
/// s = 1 - (1-r)/(1-R) and the binomial expansion of r^{N-1}.
pub fn integral_v(params: &ProblemParams) -> f64 {
    let n = params.dim;
    let a1 = params.alpha + 1.0;
    let big_r = params.radius;
    let inner = if big_r > 0.0 {
        big_r.powi(n as i32) * beta_fn(a1, n as f64).expect("positive arguments")
    } else {
        0.0
    };
    let outer: f64 = if big_r < 1.0 {
        (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(n - 1, k)
                    * (1.0 - big_r).powi(k as i32 + 1)
                    * beta_fn(a1, k as f64 + 1.0).expect("positive arguments")
            })
            .sum()
    } else {
        0.0
    };
    sphere_area(n) * (inner + outer)
}

/// I_R = ∫_0^R (1 - r/R)^{α-1} r^β dr = R^{β+1} Γ(α)Γ(β+1)/Γ(α+β+1).
pub fn i_r(params: &ProblemParams, beta_exp: f64) -> Result<f64> {
    if !(beta_exp > -1.0) {
        return Err(domain("I_R", format!("need beta > -1, got {beta_exp}")));
    }
    if !(params.alpha > 0.0) {
        return Err(domain("I_R", format!("need alpha > 0, got {}", params.alpha)));
    }
    if params.radius == 0.0 {
        return Ok(0.0);
    }
    Ok(params.radius.powf(beta_exp + 1.0) * beta_fn(params.alpha, beta_exp + 1.0)?)
}

/// The dimensional constants of the growth estimates for fixed (N, p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperConstants {
    pub dim: usize,
    pub p: f64,
    /// β = N - 1 - (p+1)(N-2)/2.
    pub beta_exp: f64,
    /// K(N,p) of the symmetry-breaking condition.
    pub k: f64,
    /// K^*(N,p), constant of the upper boundary-flux bound.
    pub k_star: f64,
    /// K_*(N,p), constant of the lower boundary-flux bound.
    pub k_lower: f64,
    pub sphere_area: f64,
    /// Symmetry-breaking radius, present when a Sobolev constant was supplied.
    pub r0: Option<f64>,
}

fn require_dim(what: &'static str, dim: usize, min: usize) -> Result<()> {
    if dim < min {
        Err(Error::Dimension { what, min, dim })
    } else {
        Ok(())
    }
}

fn require_subcritical(func: &'static str, dim: usize, p: f64) -> Result<()> {
    if !(p > 1.0) {
        return Err(domain(func, format!("need p > 1, got {p}")));
    }
    if let Some(pc) = critical_exponent(dim) {
        if p >= pc {
            return Err(domain(
                func,
                format!("p = {p} is not subcritical for N = {dim} (critical exponent {pc})"),
            ));
        }
    }
    Ok(())
}

/// β = N - 1 - (p+1)(N-2)/2.
pub fn beta_exponent(dim: usize, p: f64) -> f64 {
    let n = dim as f64;
    n - 1.0 - (p + 1.0) * (n - 2.0) / 2.0
}

/// K^*(N,p) = |S^{N-1}|^{(1-p)/(p+1)} (2(p+1)/(p-1))^{2p/(p+1)}, N >= 2.
pub fn k_star(dim: usize, p: f64) -> Result<f64> {
    require_dim("K*", dim, 2)?;
    if !(p > 1.0) {
        return Err(domain("K*", format!("need p > 1, got {p}")));
    }
    let area = sphere_area(dim);
    Ok(area.powf((1.0 - p) / (p + 1.0)) * (2.0 * (p + 1.0) / (p - 1.0)).powf(2.0 * p / (p + 1.0)))
}

/// K_*(N,p) for N >= 3.
pub fn k_lower(dim: usize, p: f64) -> Result<f64> {
    require_dim("K_*", dim, 3)?;
    require_subcritical("K_*", dim, p)?;
    let n = dim as f64;
    let beta = beta_exponent(dim, p);
    let ln = ((p + 3.0) / 2.0) * 2f64.ln() + ((p - 1.0) / 2.0) * (p + 1.0).ln()
        - ((p + 1.0) / 2.0) * ((p - 1.0) * (n - 2.0)).ln()
        + ((1.0 - p) / 2.0) * sphere_area(dim).ln()
        + log_gamma(beta + 1.0)?;
    Ok(ln.exp())
}

/// Planar analogue of K_*: uses the logarithmic radial bound with exponent
/// ε in (0, 2/(p+1)), and β = 1 - (p+1)ε. Returns (K_*(2,p), β).
pub fn k_lower_planar(p: f64, eps: f64) -> Result<(f64, f64)> {
    if !(p > 1.0) {
        return Err(domain("K_*(2,p)", format!("need p > 1, got {p}")));
    }
    if !(eps > 0.0 && eps < 2.0 / (p + 1.0)) {
        return Err(domain("K_*(2,p)", format!("need 0 < eps < 2/(p+1), got {eps}")));
    }
    let beta = 1.0 - (p + 1.0) * eps;
    let c_eps = crate::special::c_epsilon(eps)?;
    let ln = 4f64.ln() + ((1.0 - p) / 2.0) * PI.ln() + ((p - 1.0) / 2.0) * (p + 1.0).ln()
        - ((p + 1.0) / 2.0) * (p - 1.0).ln()
        + log_gamma(beta + 1.0)?
        + (p + 1.0) * c_eps.ln();
    Ok((ln.exp(), beta))
}

/// K(N,p) = (N-2)^{-(p+1)/2} |S^{N-1}|^{(1-p)/2} Γ(N - (p+1)(N-2)/2), N >= 3.
pub fn k_constant(dim: usize, p: f64) -> Result<f64> {
    require_dim("K", dim, 3)?;
    require_subcritical("K", dim, p)?;
    let n = dim as f64;
    let ln = -((p + 1.0) / 2.0) * (n - 2.0).ln()
        + ((1.0 - p) / 2.0) * sphere_area(dim).ln()
        + log_gamma(n - (p + 1.0) * (n - 2.0) / 2.0)?;
    Ok(ln.exp())
}

/// All constants for (N, p); requires N >= 3.
pub fn compute_constants(dim: usize, p: f64) -> Result<PaperConstants> {
    Ok(PaperConstants {
        dim,
        p,
        beta_exp: beta_exponent(dim, p),
        k: k_constant(dim, p)?,
        k_star: k_star(dim, p)?,
        k_lower: k_lower(dim, p)?,
        sphere_area: sphere_area(dim),
        r0: None,
    })
}

/// The identity K = ((p+1)/2) ((p-1)/(2(p+1)))^{(p+1)/2} K_* evaluated from K_*.
pub fn k_from_k_lower(p: f64, k_lower: f64) -> f64 {
    ((p + 1.0) / 2.0) * ((p - 1.0) / (2.0 * (p + 1.0))).powf((p + 1.0) / 2.0) * k_lower
}

/// Exponent (p+1)/(2N - (p+1)(N-2)) of the symmetry-breaking radius.
fn r0_exponent(dim: usize, p: f64) -> Result<f64> {
    let n = dim as f64;
    let denom = 2.0 * n - (p + 1.0) * (n - 2.0);
    if !(denom > 0.0) {
        return Err(domain("R0", format!("2N - (p+1)(N-2) = {denom} is not positive (critical or supercritical p)")));
    }
    Ok((p + 1.0) / denom)
}

/// R₀ = [e^{-8/(p+1)} K^{-2/(p+1)} S^{-1}]^{(p+1)/(2N-(p+1)(N-2))}.
pub fn r0(dim: usize, p: f64, sobolev: f64) -> Result<f64> {
    require_dim("R0", dim, 3)?;
    let exponent = r0_exponent(dim, p)?;
    if !(sobolev > 0.0) {
        return Err(domain("R0", format!("Sobolev constant must be positive, got {sobolev}")));
    }
    let k = k_constant(dim, p)?;
    let ln_base = -8.0 / (p + 1.0) - (2.0 / (p + 1.0)) * k.ln() - sobolev.ln();
    Ok((exponent * ln_base).exp())
}

/// min{e^{4/(R(p+1))}, e^{4/((1-R)(p+1))}} in log form; +inf at R in {0, 1}.
pub fn log_min_exponential(radius: f64, p: f64) -> f64 {
    let a = if radius > 0.0 { 4.0 / (radius * (p + 1.0)) } else { f64::INFINITY };
    let b = if radius < 1.0 { 4.0 / ((1.0 - radius) * (p + 1.0)) } else { f64::INFINITY };
    a.min(b)
}

/// Envelope of the upper bound on S_α α^{N-2-2N/(p+1)}:
/// min{e^{4/(R(p+1))}, e^{4/((1-R)(p+1))}} (finite for every R in [0, 1]).
pub fn upper_envelope_factor(radius: f64, p: f64) -> f64 {
    log_min_exponential(radius, p).exp()
}

/// Strict symmetry-breaking condition on R for given Sobolev constant S.
pub fn condition_check(params: &ProblemParams, sobolev: f64) -> Result<bool> {
    require_dim("condition", params.dim, 3)?;
    let n = params.dim as f64;
    let p = params.p;
    let radius = params.radius;
    if radius == 0.0 {
        return Ok(true);
    }
    if radius >= 1.0 {
        return Ok(false);
    }
    let k = k_constant(params.dim, p)?;
    let exponent = 2.0 * n / (p + 1.0) - (n - 2.0);
    let lhs = exponent * radius.ln() + log_min_exponential(radius, p);
    let rhs = -(2.0 / (p + 1.0)) * k.ln() - sobolev.ln();
    Ok(lhs < rhs)
}

/// Left-hand side of the explicit lower bound for the Sobolev constant S(N,p).
pub fn sobolev_lower_bound(dim: usize, p: f64) -> Result<f64> {
    require_dim("Sobolev lower bound", dim, 3)?;
    require_subcritical("sobolev_lower_bound", dim, p)?;
    let n = dim as f64;
    let ln = (n - 2.0).ln() + ((p - 1.0) / (p + 1.0)) * sphere_area(dim).ln()
        - (2.0 / (p + 1.0)) * log_gamma(n - (p + 1.0) * (n - 2.0) / 2.0)?
        - 4.0 / (p + 1.0);
    Ok(ln.exp())
}
