//! Gamma and Beta functions, and the asymptotic ratio Γ(α)/Γ(α+β+1).
//!
//! Everything is evaluated in log space so that arguments in the thousands
//! (where Γ itself overflows) stay usable.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Shift target for the recurrence before the Stirling series kicks in.
const STIRLING_MIN: f64 = 15.0;

// B_{2k} / (2k (2k-1)) for k = 1..=9.
const STIRLING_COEFFS: [f64; 9] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
];

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING_COEFFS {
        series += c * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// Natural logarithm of Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("log_gamma", format!("argument must be positive and finite, got {x}")));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    if x >= STIRLING_MIN {
        return Ok(stirling(x));
    }
    // Γ(x) = Γ(x + m) / (x (x+1) ... (x+m-1))
    let mut shifted = x;
    let mut prod = 1.0;
    while shifted < STIRLING_MIN {
        prod *= shifted;
        shifted += 1.0;
    }
    Ok(stirling(shifted) - prod.ln())
}

/// Γ(x), overflowing to infinity past x ≈ 171.
pub fn gamma(x: f64) -> Result<f64> {
    Ok(log_gamma(x)?.exp())
}

/// ln B(a, b).
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain("beta_fn", format!("arguments must be positive, got ({a}, {b})")));
    }
    if let Some(m) = small_integer(b) {
        return Ok(beta_int(a, m).ln());
    }
    if let Some(m) = small_integer(a) {
        return Ok(beta_int(b, m).ln());
    }
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Euler's Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b).
///
/// When one argument is a small positive integer the finite product
/// `(m-1)! / (a (a+1) ... (a+m-1))` is used instead of Gamma differences,
/// which keeps full relative precision for large `a`.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain("beta_fn", format!("arguments must be positive, got ({a}, {b})")));
    }
    if let Some(m) = small_integer(b) {
        return Ok(beta_int(a, m));
    }
    if let Some(m) = small_integer(a) {
        return Ok(beta_int(b, m));
    }
    Ok((log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?).exp())
}

fn small_integer(x: f64) -> Option<u32> {
    (x.fract() == 0.0 && (1.0..=32.0).contains(&x)).then_some(x as u32)
}

// B(a, m) for integer m >= 1.
fn beta_int(a: f64, m: u32) -> f64 {
    let mut value = 1.0 / a;
    for k in 1..m {
        let k = f64::from(k);
        value *= k / (a + k);
    }
    value
}

/// Exact and asymptotic forms of Γ(α)/Γ(α+β+1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRatio {
    pub alpha: f64,
    pub beta_exp: f64,
    /// Γ(α)/Γ(α+β+1).
    pub exact: f64,
    /// α^{-β-1}.
    pub asymptotic: f64,
}

impl GammaRatio {
    pub fn ratio(&self) -> f64 {
        self.exact / self.asymptotic
    }
}

pub fn gamma_ratio(alpha: f64, beta_exp: f64) -> Result<GammaRatio> {
    if !(alpha > 0.0) || !(alpha + beta_exp + 1.0 > 0.0) {
        return Err(domain(
            "gamma_ratio",
            format!("need alpha > 0 and alpha + beta + 1 > 0, got alpha = {alpha}, beta = {beta_exp}"),
        ));
    }
    let exact = (log_gamma(alpha)? - log_gamma(alpha + beta_exp + 1.0)?).exp();
    let asymptotic = (-(beta_exp + 1.0) * alpha.ln()).exp();
    Ok(GammaRatio {
        alpha,
        beta_exp,
        exact,
        asymptotic,
    })
}

/// c_ε = sup over r in (0,1) of r^ε |ln r|^{1/2}, attained at r = e^{-1/(2ε)}.
pub fn c_epsilon(eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(domain("c_epsilon", format!("eps must be positive, got {eps}")));
    }
    Ok((2.0 * std::f64::consts::E * eps).powf(-0.5))
}

/// Location of the supremum in [`c_epsilon`].
pub fn c_epsilon_argmax(eps: f64) -> f64 {
    (-0.5 / eps).exp()
}
