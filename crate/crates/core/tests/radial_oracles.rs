use emden_core::experiments::sobolev_constant;
use emden_core::mesh::build_radial_grid;
use emden_core::minimize::SolveOptions;
use emden_core::radial::{solve_radial, DEFAULT_GRADING};
use emden_core::weight::{sphere_area, ProblemParams};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Shooting for -Δu = |x|^α u^p with u(0) = 1, u'(0) = 0. Returns the first
/// zero ρ and J = ∫_0^ρ r^{α+N-1} u^{p+1} dr.
fn shoot(dim: usize, p: f64, alpha: f64) -> (f64, f64) {
    let n = dim as f64;
    let rhs = |r: f64, y: [f64; 3]| -> [f64; 3] {
        let up = y[0].max(0.0).powf(p);
        [y[1], -(n - 1.0) / r * y[1] - r.powf(alpha) * up, r.powf(alpha + n - 1.0) * y[0].max(0.0).powf(p + 1.0)]
    };
    let step = |r: f64, y: [f64; 3], h: f64| -> [f64; 3] {
        let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
        let k1 = rhs(r, y);
        let k2 = rhs(r + h / 2.0, add(y, k1, h / 2.0));
        let k3 = rhs(r + h / 2.0, add(y, k2, h / 2.0));
        let k4 = rhs(r + h, add(y, k3, h));
        [0, 1, 2].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    };
    // series start away from the singular point
    let mut r: f64 = 1e-4;
    let mut y = [
        1.0 - r.powf(2.0 + alpha) / ((2.0 + alpha) * (n + alpha)),
        -r.powf(1.0 + alpha) / (n + alpha),
        r.powf(alpha + n) / (alpha + n),
    ];
    let h = 1e-4;
    loop {
        let next = step(r, y, h);
        if next[0] <= 0.0 {
            // secant on the length of the last step
            let (mut a, mut b) = (0.0, h);
            let (mut fa, mut fb) = (y[0], next[0]);
            for _ in 0..60 {
                let s = b - fb * (b - a) / (fb - fa);
                let fs = step(r, y, s)[0];
                (a, fa, b, fb) = (b, fb, s, fs);
                if fs.abs() < 1e-16 {
                    break;
                }
            }
            let last = step(r, y, b);
            return (r + b, last[2]);
        }
        y = next;
        r += h;
    }
}

/// S and the peak height on the unit ball from the shooting solution and
/// the scaling v(x) = ρ^{(2+α)/(p-1)} u(ρ x).
fn shooting_oracle(dim: usize, p: f64, alpha: f64) -> (f64, f64) {
    let (rho, j) = shoot(dim, p, alpha);
    let n = dim as f64;
    let e = (2.0 + alpha) * (p + 1.0) / (p - 1.0) - alpha - n;
    let area = if dim == 1 { 2.0 } else { sphere_area(dim) };
    let m = area * rho.powf(e) * j;
    (m.powf((p - 1.0) / (p + 1.0)), rho.powf((2.0 + alpha) / (p - 1.0)))
}

#[test]
fn lane_emden_and_henon_match_shooting() {
    let opts = SolveOptions::default();
    for (dim, p) in [(1, 3.0), (2, 3.0), (3, 2.0), (3, 4.0)] {
        for alpha in [0.0, 2.0, 7.5] {
            let (s, beta) = shooting_oracle(dim, p, alpha);
            let q = ProblemParams::new(dim, p, 0.0, alpha).unwrap();
            let res = solve_radial(&q, 4097, &opts).unwrap();
            assert!(rel(res.s_rad, s) <= 1e-6, "N={dim} p={p} a={alpha}: {} vs {s}", res.s_rad);
            assert!(rel(res.beta_peak, beta) <= 1e-4, "N={dim} p={p} a={alpha}: {} vs {beta}", res.beta_peak);
            assert_eq!(res.s_peak, 0.0);
        }
    }
}

#[test]
fn sobolev_constant_is_grid_independent() {
    let opts = SolveOptions::default();
    for p in [1.5, 2.0, 3.0, 4.0] {
        let q = ProblemParams::new(3, p, 1.0, 0.0).unwrap();
        let grid = build_radial_grid(&q, 2049, DEFAULT_GRADING).unwrap();
        let a = sobolev_constant(3, p, &grid, &opts).unwrap();
        let b = sobolev_constant(3, p, &grid.refined(), &opts).unwrap();
        assert!(rel(a, b) <= 1e-6, "p={p}: {a} vs {b}");
        let (s, _) = shooting_oracle(3, p, 0.0);
        assert!(rel(b, s) <= 1e-6, "p={p}: {b} vs shooting {s}");
    }
}

#[test]
fn sobolev_scaled_by_sphere_decreases_in_p() {
    let opts = SolveOptions::default();
    let scaled: Vec<f64> = [1.25, 1.5, 2.0, 2.5, 3.0, 4.0]
        .iter()
        .map(|&p| {
            let q = ProblemParams::new(3, p, 1.0, 0.0).unwrap();
            let grid = build_radial_grid(&q, 2049, DEFAULT_GRADING).unwrap();
            sobolev_constant(3, p, &grid, &opts).unwrap() * sphere_area(3).powf(2.0 / (p + 1.0))
        })
        .collect();
    assert!(scaled.windows(2).all(|w| w[1] < w[0]), "{scaled:?}");
}

#[test]
fn first_eigenvalue_of_the_ball() {
    // p = 1, α = 0: the radial quotient is j_{N/2-1,1}^2
    use emden_core::radial::eigen_lower_bound_p1;
    let opts = SolveOptions::default();
    for (dim, j) in [(1usize, std::f64::consts::FRAC_PI_2), (2, 2.404_825_557_695_773), (3, std::f64::consts::PI)] {
        let q = ProblemParams::unchecked(dim, 1.0, 1.0, 0.0);
        let grid = build_radial_grid(&q, 4097, DEFAULT_GRADING).unwrap();
        let lambda = eigen_lower_bound_p1(&q, &grid, &opts).unwrap();
        assert!(rel(lambda, j * j) <= 1e-6, "N={dim}: {lambda}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radial_solutions_are_decreasing_solutions(
        dim in 1usize..=3,
        radius in prop_oneof![Just(0.0), Just(1.0), 0.05f64..0.95],
        alpha in 0.0f64..80.0,
    ) {
        let p = if dim == 3 { 2.0 } else { 3.0 };
        let q = ProblemParams::new(dim, p, radius, alpha).unwrap();
        let res = solve_radial(&q, 513, &SolveOptions::default()).unwrap();
        let v = &res.profile.values;
        prop_assert!(res.s_rad > 0.0);
        prop_assert_eq!(*v.last().unwrap(), 0.0);
        prop_assert!(v.iter().all(|x| *x >= 0.0));
        // u' = -r^{1-N} ∫ V u^p s^{N-1} ds <= 0 for every radial solution
        prop_assert!(v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        prop_assert!(res.residuals.nehari_residual <= 1e-8);
        prop_assert!(rel(res.beta_peak, v[0]) <= 1e-15);
    }
}
