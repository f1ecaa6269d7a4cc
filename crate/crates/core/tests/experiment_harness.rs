use emden_core::experiments::{
    concentration_track, fit_exponent, fit_power_law, moving_shell, sweep_alpha, GridSpec, Quantity,
    DEFAULT_BREAK_TOL,
};
use emden_core::minimize::SolveOptions;
use emden_core::weight::ProblemParams;
use emden_core::Error;

const GRID: GridSpec = GridSpec { n_r: 64, n_theta: 32 };

fn template(dim: usize, radius: f64) -> ProblemParams {
    let p = if dim == 3 { 2.0 } else { 3.0 };
    ProblemParams::new(dim, p, radius, 10.0).unwrap()
}

#[test]
fn rows_do_not_depend_on_the_rest_of_the_sweep() {
    let opts = SolveOptions::default();
    let t = template(3, 0.4);
    let a = sweep_alpha(&t, &[10.0, 40.0], GRID, &opts, DEFAULT_BREAK_TOL).unwrap();
    let b = sweep_alpha(&t, &[40.0, 90.0, 160.0], GRID, &opts, DEFAULT_BREAK_TOL).unwrap();
    assert_eq!(a[1], b[0]);
    assert!(sweep_alpha(&t, &[40.0, 10.0], GRID, &opts, DEFAULT_BREAK_TOL).is_err());
}

#[test]
fn failed_rows_are_captured() {
    let opts = SolveOptions {
        max_iter: 1,
        polish: false,
        ..SolveOptions::default()
    };
    let rows = sweep_alpha(&template(2, 0.5), &[10.0, 20.0], GRID, &opts, DEFAULT_BREAK_TOL).unwrap();
    for r in &rows {
        assert!(!r.is_ok());
        assert!(r.status.contains("did not converge"), "{}", r.status);
        assert!(r.s_rad.is_none() && r.broken.is_none() && r.scaled_s_full.is_none());
    }
    let err = fit_exponent(&rows, Quantity::SRad, (0.0, 100.0)).unwrap_err();
    assert!(matches!(err, Error::InsufficientData(_)));
}

#[test]
fn scaled_columns_follow_their_definitions() {
    let opts = SolveOptions::default();
    let rows = sweep_alpha(&template(3, 1.0), &[20.0, 80.0], GRID, &opts, DEFAULT_BREAK_TOL).unwrap();
    for r in &rows {
        let a = r.params.alpha;
        // N - 2 - 2N/(p+1) = -1 and 2/(p-1) = 2 at (3, 2)
        assert!((r.scaled_s_rad.unwrap() - r.s_rad.unwrap() / a).abs() <= 1e-12 * r.s_rad.unwrap());
        assert!((r.scaled_beta.unwrap() - r.beta_peak.unwrap() / (a * a)).abs() <= 1e-12 * r.beta_peak.unwrap());
        let c = r.s_rad.unwrap().powi(3) / 6.0;
        assert!((r.c_rad.unwrap() - c).abs() <= 1e-12 * c);
    }
}

#[test]
fn power_law_fit_reports_quality() {
    let xs = [1.0, 2.0, 4.0, 8.0, 16.0];
    let noisy: Vec<f64> = xs.iter().zip([1.0, 1.1, 0.9, 1.05, 0.95]).map(|(x, f)| f * x * x).collect();
    let fit = fit_power_law(&xs, &noisy).unwrap();
    assert!((fit.slope - 2.0).abs() < 0.05);
    assert!(fit.r_squared < 1.0 && fit.r_squared > 0.99);
    assert!(fit_power_law(&[1.0, 2.0], &[1.0, -1.0]).is_err());
}

#[test]
fn moving_shell_and_concentration_summaries() {
    let opts = SolveOptions::default();
    let report = moving_shell(1.0, &[20.0, 80.0], &template(2, 0.5), GRID, &opts, DEFAULT_BREAK_TOL).unwrap();
    assert!((report.records[0].params.radius - 0.05).abs() < 1e-15);
    assert!((report.records[1].params.radius - 0.0125).abs() < 1e-15);
    assert!(moving_shell(0.0, &[20.0], &template(2, 0.5), GRID, &opts, DEFAULT_BREAK_TOL).is_err());

    let rows = sweep_alpha(&template(3, 1.0), &[20.0, 40.0, 80.0], GRID, &opts, DEFAULT_BREAK_TOL).unwrap();
    let summary = concentration_track(&rows);
    assert!(summary.distances.iter().all(|d| d.1 == 0.0));
    assert!(summary.distance_nonincreasing && summary.beta_increasing);
    let (lo, hi) = (summary.scaled_beta_min.unwrap(), summary.scaled_beta_max.unwrap());
    assert!(lo > 0.0 && hi / lo < 2.0);
}
