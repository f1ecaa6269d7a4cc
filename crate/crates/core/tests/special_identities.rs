use std::f64::consts::PI;

use emden_core::special::{beta_fn, c_epsilon, c_epsilon_argmax, gamma, gamma_ratio, log_beta, log_gamma};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #[test]
    fn recurrence(x in 0.01f64..150.0) {
        let lhs = log_gamma(x + 1.0).unwrap();
        let rhs = log_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
    }

    #[test]
    fn duplication(x in 0.05f64..60.0) {
        // Γ(x) Γ(x + 1/2) = 2^{1-2x} √π Γ(2x)
        let lhs = log_gamma(x).unwrap() + log_gamma(x + 0.5).unwrap();
        let rhs = (1.0 - 2.0 * x) * 2f64.ln() + 0.5 * PI.ln() + log_gamma(2.0 * x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
    }

    #[test]
    fn reflection(x in 0.01f64..0.99) {
        let prod = gamma(x).unwrap() * gamma(1.0 - x).unwrap();
        prop_assert!(rel(prod, PI / (PI * x).sin()) <= 1e-13);
    }

    #[test]
    fn beta_from_gammas(a in 0.1f64..40.0, b in 0.1f64..40.0) {
        let direct = log_beta(a, b).unwrap();
        let via = log_gamma(a).unwrap() + log_gamma(b).unwrap() - log_gamma(a + b).unwrap();
        prop_assert!((direct - via).abs() <= 1e-12 * direct.abs().max(1.0));
        prop_assert!(rel(beta_fn(a, b).unwrap(), beta_fn(b, a).unwrap()) <= 1e-13);
    }

    #[test]
    fn gamma_ratio_envelope(alpha in 100f64..5000.0, beta in -3f64..3.0) {
        let r = gamma_ratio(alpha, beta).unwrap().ratio();
        let slack = 2.0 * (beta.abs() + 1.0).powi(2) / alpha;
        prop_assert!(r >= 1.0 - slack && r <= 1.0 + slack, "ratio {r}");
    }

    #[test]
    fn c_epsilon_is_the_supremum(eps in 0.02f64..5.0, s in 0.0f64..1.0) {
        let f = |r: f64| r.powf(eps) * (-r.ln()).sqrt();
        let c = c_epsilon(eps).unwrap();
        let r = s.clamp(1e-12, 1.0 - 1e-12);
        prop_assert!(f(r) <= c * (1.0 + 1e-14));
        prop_assert!(rel(f(c_epsilon_argmax(eps)), c) <= 1e-14);
    }
}

#[test]
fn factorials_and_half_integers() {
    let mut fact = 1.0f64;
    for n in 1..=30u32 {
        assert!(rel(gamma(f64::from(n)).unwrap(), fact) <= 1e-13, "n = {n}");
        fact *= f64::from(n);
    }
    // Γ(n + 1/2) = (2n)! √π / (4^n n!)
    let mut value = PI.sqrt();
    for n in 0..20u32 {
        let x = f64::from(n) + 0.5;
        assert!(rel(gamma(x).unwrap(), value) <= 1e-13, "x = {x}");
        value *= x;
    }
}

#[test]
fn beta_of_integers_matches_factorials() {
    // B(m, n) = (m-1)!(n-1)!/(m+n-1)!
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    for m in 1..12u32 {
        for n in 1..12u32 {
            let exact = fact(m - 1) * fact(n - 1) / fact(m + n - 1);
            assert!(rel(beta_fn(f64::from(m), f64::from(n)).unwrap(), exact) <= 1e-13);
        }
    }
}
