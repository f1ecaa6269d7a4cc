//! Parameter sweeps and the derived quantities compared against the growth,
//! symmetry and concentration statements.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{build_axisym_grid, minimize_full_quotient_from, symmetry_gap};
use crate::error::{Error, Result};
use crate::mesh::RadialGrid;
use crate::minimize::SolveOptions;
use crate::radial::minimize_radial_quotient;
use crate::weight::ProblemParams;

/// Default relative tolerance for declaring symmetry breaking.
pub const DEFAULT_BREAK_TOL: f64 = 1e-4;

/// Grid sizes for a paired radial/full solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_r: 256, n_theta: 128 }
    }
}

/// One row of a sweep. Numeric fields are `None` when the row failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub params: ProblemParams,
    /// "ok" or the error message.
    pub status: String,
    pub s_rad: Option<f64>,
    pub s_full: Option<f64>,
    pub c_rad: Option<f64>,
    pub c_full: Option<f64>,
    pub gap: Option<f64>,
    pub broken: Option<bool>,
    pub s_peak: Option<f64>,
    pub beta_peak: Option<f64>,
    pub asym_index: Option<f64>,
    pub scaled_s_full: Option<f64>,
    pub scaled_s_rad: Option<f64>,
    pub scaled_beta: Option<f64>,
    pub a_over_b: Option<f64>,
    pub nehari_residual: Option<f64>,
    pub pohozaev_residual: Option<f64>,
    pub lemma3_slack: Option<f64>,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(params: ProblemParams, err: &Error) -> Self {
        Self {
            params,
            status: err.to_string(),
            s_rad: None,
            s_full: None,
            c_rad: None,
            c_full: None,
            gap: None,
            broken: None,
            s_peak: None,
            beta_peak: None,
            asym_index: None,
            scaled_s_full: None,
            scaled_s_rad: None,
            scaled_beta: None,
            a_over_b: None,
            nehari_residual: None,
            pohozaev_residual: None,
            lemma3_slack: None,
        }
    }
}

/// S α^{N-2-2N/(p+1)}, undefined at α = 0.
pub fn scaled_quotient(params: &ProblemParams, s: f64) -> Option<f64> {
    (params.alpha > 0.0).then(|| s * params.alpha.powf(params.scaling_exponent()))
}

/// β α^{-2/(p-1)}, undefined at α = 0.
pub fn scaled_peak(params: &ProblemParams, beta: f64) -> Option<f64> {
    (params.alpha > 0.0).then(|| beta * params.alpha.powf(-2.0 / (params.p - 1.0)))
}

fn solve_record(params: ProblemParams, grid: GridSpec, opts: &SolveOptions, rel_tol: f64) -> Result<SweepRecord> {
    params.validate()?;
    let g = build_axisym_grid(&params, grid.n_r, grid.n_theta)?;
    let radial = minimize_radial_quotient(&params, &g.radial, opts)?;
    let full = minimize_full_quotient_from(&params, &g, opts, &radial)?;
    let (gap, broken) = symmetry_gap(&radial, &full, rel_tol);
    let d = radial.residuals;
    let a_over_b = match (d.a_alpha, d.b_alpha) {
        (Some(a), Some(b)) => Some(a / b),
        _ => None,
    };
    Ok(SweepRecord {
        params,
        status: "ok".into(),
        s_rad: Some(radial.s_rad),
        s_full: Some(full.s_full),
        c_rad: Some(radial.c_rad),
        c_full: Some(full.c_full),
        gap: Some(gap),
        broken: Some(broken),
        s_peak: Some(full.s_peak),
        beta_peak: Some(full.beta_peak),
        asym_index: Some(full.asym_index),
        scaled_s_full: scaled_quotient(&params, full.s_full),
        scaled_s_rad: scaled_quotient(&params, radial.s_rad),
        scaled_beta: scaled_peak(&params, full.beta_peak),
        a_over_b,
        nehari_residual: Some(d.nehari_residual.max(full.nehari_residual)),
        pohozaev_residual: Some(d.pohozaev_residual),
        lemma3_slack: d.lemma3_slack,
    })
}

/// Radial and full solve for one parameter set; failures become a row with
/// the error in `status`.
pub fn sweep_row(params: ProblemParams, grid: GridSpec, opts: &SolveOptions, rel_tol: f64) -> SweepRecord {
    solve_record(params, grid, opts, rel_tol).unwrap_or_else(|e| SweepRecord::failed(params, &e))
}

fn check_increasing(values: &[f64], what: &str) -> Result<()> {
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// Solves every row of an α sweep (rows run in parallel); the output is in
/// the order of `alphas`.
pub fn sweep_alpha(
    template: &ProblemParams,
    alphas: &[f64],
    grid: GridSpec,
    opts: &SolveOptions,
    rel_tol: f64,
) -> Result<Vec<SweepRecord>> {
    check_increasing(alphas, "alphas")?;
    Ok(alphas
        .par_iter()
        .map(|&alpha| {
            let params = ProblemParams::unchecked(template.dim, template.p, template.radius, alpha);
            sweep_row(params, grid, opts, rel_tol)
        })
        .collect())
}

/// Quantity selector for [`fit_exponent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    SRad,
    SFull,
    BetaPeak,
    CRad,
}

impl Quantity {
    pub fn of(&self, record: &SweepRecord) -> Option<f64> {
        match self {
            Quantity::SRad => record.s_rad,
            Quantity::SFull => record.s_full,
            Quantity::BetaPeak => record.beta_peak,
            Quantity::CRad => record.c_rad,
        }
    }
}

/// Least-squares line through (ln α, ln q).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Fits ln y = slope ln x + intercept.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<ExponentFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParams("x and y lengths differ".into()));
    }
    if xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InsufficientData("need at least two positive points".into()));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(ExponentFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        window: (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(0.0, f64::max)),
        points: xs.len(),
    })
}

/// Log–log slope of a quantity against α over rows with α in `window`.
pub fn fit_exponent(records: &[SweepRecord], quantity: Quantity, window: (f64, f64)) -> Result<ExponentFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.is_ok() && r.params.alpha >= window.0 && r.params.alpha <= window.1)
        .filter_map(|r| quantity.of(r).map(|q| (r.params.alpha, q)))
        .unzip();
    if xs.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "need at least 5 rows in the window [{}, {}], found {}",
            window.0,
            window.1,
            xs.len()
        )));
    }
    let mut fit = fit_power_law(&xs, &ys)?;
    fit.window = window;
    Ok(fit)
}

/// Best constant of the subcritical embedding on the ball: the radial quotient
/// with V ≡ 1.
pub fn sobolev_constant(dim: usize, p: f64, grid: &RadialGrid, opts: &SolveOptions) -> Result<f64> {
    let params = ProblemParams::new(dim, p, 1.0, 0.0)?;
    Ok(minimize_radial_quotient(&params, grid, opts)?.s_rad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingShellReport {
    pub delta: f64,
    pub records: Vec<SweepRecord>,
    /// Smallest α from which every later row is broken.
    pub broken_from: Option<f64>,
}

/// Sweep with shell radius R(α) = α^{-δ}.
pub fn moving_shell(
    delta: f64,
    alphas: &[f64],
    template: &ProblemParams,
    grid: GridSpec,
    opts: &SolveOptions,
    rel_tol: f64,
) -> Result<MovingShellReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParams(format!("delta must be positive, got {delta}")));
    }
    check_increasing(alphas, "alphas")?;
    let records: Vec<SweepRecord> = alphas
        .par_iter()
        .map(|&alpha| {
            let radius = if alpha > 0.0 { alpha.powf(-delta).min(1.0) } else { 1.0 };
            let params = ProblemParams::unchecked(template.dim, template.p, radius, alpha);
            sweep_row(params, grid, opts, rel_tol)
        })
        .collect();
    let broken_from = broken_tail_start(&records);
    Ok(MovingShellReport {
        delta,
        records,
        broken_from,
    })
}

/// α of the first row of the longest all-broken tail of a sweep.
pub fn broken_tail_start(records: &[SweepRecord]) -> Option<f64> {
    let mut start = None;
    for r in records.iter().rev() {
        if r.broken == Some(true) {
            start = Some(r.params.alpha);
        } else {
            break;
        }
    }
    start
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    /// min(s_peak, 1 - s_peak) per successful row, in row order.
    pub distances: Vec<(f64, f64)>,
    /// The distances never increase along the rows.
    pub distance_nonincreasing: bool,
    pub min_distance: Option<f64>,
    pub scaled_beta_min: Option<f64>,
    pub scaled_beta_max: Option<f64>,
    /// Peak heights strictly increase from the first to the last row.
    pub beta_increasing: bool,
}

/// Peak-location and peak-height trends of a fixed-R sweep.
pub fn concentration_track(records: &[SweepRecord]) -> ConcentrationSummary {
    let ok: Vec<&SweepRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let distances: Vec<(f64, f64)> = ok
        .iter()
        .filter_map(|r| r.s_peak.map(|s| (r.params.alpha, s.min(1.0 - s))))
        .collect();
    let distance_nonincreasing = distances.windows(2).all(|w| w[1].1 <= w[0].1);
    let min_distance = distances.iter().map(|d| d.1).reduce(f64::min);
    let scaled: Vec<f64> = ok.iter().filter_map(|r| r.scaled_beta).collect();
    let betas: Vec<f64> = ok.iter().filter_map(|r| r.beta_peak).collect();
    ConcentrationSummary {
        distances,
        distance_nonincreasing,
        min_distance,
        scaled_beta_min: scaled.iter().copied().reduce(f64::min),
        scaled_beta_max: scaled.iter().copied().reduce(f64::max),
        beta_increasing: betas.len() >= 2 && betas.last() > betas.first(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub radius: f64,
    pub status: String,
    pub s_full: Option<f64>,
    /// |S(R) - S(endpoint)| / S(endpoint).
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityTable {
    pub alpha: f64,
    pub endpoint: f64,
    pub endpoint_s_full: f64,
    pub rows: Vec<ContinuityRow>,
    /// Deviations shrink along the list (reported, not required).
    pub deviation_shrinking: bool,
}

/// S_full along a list of radii approaching `endpoint` (0 or 1).
pub fn continuity_in_r(
    template: &ProblemParams,
    alpha: f64,
    radii: &[f64],
    endpoint: f64,
    grid: GridSpec,
    opts: &SolveOptions,
) -> Result<ContinuityTable> {
    if endpoint != 0.0 && endpoint != 1.0 {
        return Err(Error::InvalidParams(format!("endpoint must be 0 or 1, got {endpoint}")));
    }
    let end_params = ProblemParams::new(template.dim, template.p, endpoint, alpha)?;
    let end = solve_record(end_params, grid, opts, DEFAULT_BREAK_TOL)?;
    let end_s = end.s_full.expect("successful row");
    let rows: Vec<ContinuityRow> = radii
        .par_iter()
        .map(|&radius| {
            let params = ProblemParams::unchecked(template.dim, template.p, radius, alpha);
            let rec = sweep_row(params, grid, opts, DEFAULT_BREAK_TOL);
            ContinuityRow {
                radius,
                status: rec.status.clone(),
                s_full: rec.s_full,
                deviation: rec.s_full.map(|s| (s - end_s).abs() / end_s),
            }
        })
        .collect();
    let devs: Vec<f64> = rows.iter().filter_map(|r| r.deviation).collect();
    let deviation_shrinking = devs.windows(2).all(|w| w[1] <= w[0]);
    Ok(ContinuityTable {
        alpha,
        endpoint,
        endpoint_s_full: end_s,
        rows,
        deviation_shrinking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let xs = [10.0, 20.0, 40.0, 80.0, 160.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.7)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.slope - 1.7).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_five_rows() {
        let params = ProblemParams::new(3, 2.0, 0.0, 10.0).unwrap();
        let mut rec = SweepRecord::failed(params, &Error::InvalidParams("x".into()));
        rec.status = "ok".into();
        rec.s_rad = Some(1.0);
        let rows = vec![rec; 4];
        assert!(matches!(
            fit_exponent(&rows, Quantity::SRad, (1.0, 100.0)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn broken_tail() {
        let params = ProblemParams::new(2, 3.0, 0.0, 10.0).unwrap();
        let mk = |a: f64, b: bool| {
            let mut r = SweepRecord::failed(ProblemParams { alpha: a, ..params }, &Error::InvalidParams("x".into()));
            r.broken = Some(b);
            r
        };
        let rows = vec![mk(1.0, true), mk(2.0, false), mk(3.0, true), mk(4.0, true)];
        assert_eq!(broken_tail_start(&rows), Some(3.0));
        assert_eq!(broken_tail_start(&rows[..2]), None);
    }

    #[test]
    fn rejects_unsorted_alphas() {
        let params = ProblemParams::new(3, 2.0, 0.0, 10.0).unwrap();
        let r = sweep_alpha(&params, &[10.0, 5.0], GridSpec::default(), &SolveOptions::default(), 1e-4);
        assert!(r.is_err());
    }
}
