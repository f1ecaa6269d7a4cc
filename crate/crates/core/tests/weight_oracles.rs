use std::f64::consts::PI;

use emden_core::weight::{
    beta_exponent, condition_check, eval_v, eval_v_prime, integral_v, k_constant, k_lower, k_star, r0, sphere_area,
    ProblemParams,
};
use emden_core::Error;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn choose(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// ∫_B V for integer α by expanding both branches of V in powers of r.
fn integral_by_expansion(dim: u32, radius: f64, k: u32) -> f64 {
    let m = dim - 1;
    let mut inner = 0.0;
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        inner += sign * choose(k, j) * radius.powi((m + 1) as i32) / f64::from(j + m + 1);
    }
    let mut outer = 0.0;
    for j in 0..=k {
        let e = f64::from(j + m + 1);
        outer += choose(k, j) * (-radius).powi((k - j) as i32) * (1.0 - radius.powf(e)) / e;
    }
    outer /= (1.0 - radius).powi(k as i32);
    let area = [2.0, 2.0 * PI, 4.0 * PI][m as usize];
    area * (inner + outer)
}

#[test]
fn integral_matches_polynomial_expansion() {
    for dim in 1..=3u32 {
        for radius in [0.1, 0.35, 0.5, 0.65] {
            for k in 0..=6u32 {
                let q = ProblemParams::new(dim as usize, 1.5, radius, f64::from(k)).unwrap();
                let exact = integral_by_expansion(dim, radius, k);
                assert!(rel(integral_v(&q), exact) <= 1e-11, "N={dim} R={radius} k={k}");
            }
        }
    }
}

#[test]
fn endpoint_weights() {
    // R = 0: ∫ |x|^α = |S^{N-1}|/(N+α); R = 1: |S^{N-1}| B(α+1, N)
    for dim in 1..=4usize {
        for alpha in [0.0, 0.5, 7.0, 120.0] {
            let area = sphere_area(dim);
            let q0 = ProblemParams::unchecked(dim, 1.5, 0.0, alpha);
            assert!(rel(integral_v(&q0), area / (dim as f64 + alpha)) <= 1e-13);
            let q1 = ProblemParams::unchecked(dim, 1.5, 1.0, alpha);
            // B(α+1, N) = Γ(α+1)(N-1)!/Γ(α+N+1)
            let exact = (1..dim).map(|i| i as f64).product::<f64>()
                / (0..dim).map(|i| alpha + 1.0 + i as f64).product::<f64>();
            assert!(rel(integral_v(&q1), area * exact) <= 1e-13, "N={dim} alpha={alpha}");
        }
    }
}

#[test]
fn constants_for_three_dimensions() {
    assert!(rel(k_constant(3, 2.0).unwrap(), 0.25) <= 1e-14);
    assert_eq!(beta_exponent(3, 2.0), 0.5);
    assert!(rel(sphere_area(4), 2.0 * PI * PI) <= 1e-14);
    assert!(rel(sphere_area(5), 8.0 * PI * PI / 3.0) <= 1e-14);
    // K^* = |S^2|^{-1/3} 6^{4/3} at (3, 2)
    assert!(rel(k_star(3, 2.0).unwrap(), (4.0 * PI).powf(-1.0 / 3.0) * 6f64.powf(4.0 / 3.0)) <= 1e-14);
}

#[test]
fn planar_constants_are_refused() {
    assert!(matches!(k_constant(2, 3.0), Err(Error::Dimension { min: 3, dim: 2, .. })));
    assert!(matches!(k_lower(2, 3.0), Err(Error::Dimension { .. })));
    assert!(k_star(2, 3.0).is_ok());
    assert!(k_constant(3, 5.0).is_err());
}

#[test]
fn condition_holds_below_r0() {
    for (p, s) in [(2.0, 11.144), (3.0, 10.118), (1.5, 10.948)] {
        let radius = r0(3, p, s).unwrap();
        assert!(radius > 0.0 && radius < 0.5);
        for f in [0.01, 0.5, 0.99] {
            let q = ProblemParams::new(3, p, f * radius, 10.0).unwrap();
            assert!(condition_check(&q, s).unwrap(), "p={p} R={}", f * radius);
        }
        assert!(!condition_check(&ProblemParams::new(3, p, 1.0, 10.0).unwrap(), s).unwrap());
    }
}

fn params_strategy() -> impl Strategy<Value = ProblemParams> {
    (1usize..=3, 0.0f64..=1.0, 0.0f64..200.0).prop_map(|(dim, radius, alpha)| ProblemParams::unchecked(dim, 2.0, radius, alpha))
}

proptest! {
    #[test]
    fn weight_is_a_unit_bump_with_a_zero_shell(q in params_strategy(), r in 0.0f64..=1.0) {
        let v = eval_v(&q, r);
        prop_assert!((0.0..=1.0).contains(&v));
        if q.alpha > 0.0 {
            prop_assert_eq!(eval_v(&q, q.radius), 0.0);
        }
        if q.radius < 1.0 {
            prop_assert!(rel(eval_v(&q, 1.0), 1.0) <= 1e-15);
        }
    }

    #[test]
    fn derivative_matches_central_difference(q in params_strategy(), r in 0.01f64..0.99) {
        prop_assume!((r - q.radius).abs() > 0.02 && q.alpha > 0.0 && q.alpha < 60.0);
        let h = 1e-6;
        let fd = (eval_v(&q, r + h) - eval_v(&q, r - h)) / (2.0 * h);
        let d = eval_v_prime(&q, r).unwrap();
        let scale = q.alpha / q.radius.min(1.0 - q.radius).max(0.02);
        prop_assert!((d - fd).abs() <= 1e-6 * scale.max(1.0), "{d} vs {fd}");
    }

    #[test]
    fn integral_is_monotone_in_alpha(q in params_strategy(), extra in 0.1f64..10.0) {
        let more = ProblemParams::unchecked(q.dim, q.p, q.radius, q.alpha + extra);
        prop_assert!(integral_v(&more) < integral_v(&q));
        prop_assert!(integral_v(&q) <= sphere_area(q.dim) / q.dim as f64 * (1.0 + 1e-14));
    }
}
