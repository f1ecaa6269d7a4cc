//! Invariant suite run by `verify`.

use anyhow::{Context, Result};
use emden_core::ball::solve_pair;
use emden_core::mesh::build_radial_grid;
use emden_core::radial::{diagnostics, energy_from_quotient, minimize_radial_quotient, RadialResult, DEFAULT_GRADING};
use emden_core::weight::ProblemParams;
use serde::Serialize;

use crate::config::{default_exponent, RunConfig};
use crate::output::{num, to_json, Artifact, Format, Table};
use crate::commands::Outcome;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub check: &'static str,
    pub params: Option<ProblemParams>,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(check: &'static str, params: ProblemParams, value: f64, bound: f64) -> Self {
        Self {
            check,
            params: Some(params),
            value,
            bound,
            passed: value <= bound,
        }
    }

    fn at_least(check: &'static str, params: ProblemParams, value: f64, bound: f64) -> Self {
        Self {
            check,
            params: Some(params),
            value,
            bound,
            passed: value >= bound,
        }
    }

    fn failed(check: &'static str, params: Option<ProblemParams>) -> Self {
        Self {
            check,
            params,
            value: f64::NAN,
            bound: f64::NAN,
            passed: false,
        }
    }
}

/// Identity checks for one parameter set: radial solves on a grid and its
/// refinement, and a full solve.
pub fn check_params(params: ProblemParams, cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let solves = params.validate().and_then(|_| {
        let coarse = build_radial_grid(&params, cfg.verify.n, DEFAULT_GRADING)?;
        let fine = coarse.refined();
        let a = minimize_radial_quotient(&params, &coarse, &cfg.solver)?;
        let b = minimize_radial_quotient(&params, &fine, &cfg.solver)?;
        let (radial, full) = solve_pair(&params, cfg.grid.n_r, cfg.grid.n_theta, &cfg.solver)?;
        Ok((a, b, radial.s_rad, full.s_full))
    });
    let (coarse, fine, s_rad, s_full) = match solves {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{params:?}: {e}");
            out.push(Check::failed("solve", Some(params)));
            return out;
        }
    };
    let d = &fine.residuals;
    let p = params.p;
    out.push(Check::at_most("nehari_residual", params, d.nehari_residual, 1e-8));
    let rate = (coarse.residuals.pohozaev_residual / d.pohozaev_residual).log2();
    out.push(Check {
        check: "pohozaev_rate",
        params: Some(params),
        value: rate,
        bound: 2.0,
        passed: (rate - 2.0).abs() <= 0.3,
    });
    if let Some(v) = d.ni_violation {
        out.push(Check::at_most("ni_violation", params, v, 0.0));
    }
    let c = energy_from_quotient(fine.s_rad, p);
    out.push(Check::at_most("energy_relation", params, ((d.functional - c) / c).abs(), 1e-10));
    out.push(Check::at_most("full_below_radial", params, (s_full - s_rad) / s_rad, 1e-6));
    if let (Some(slack), Some(a), Some(b)) = (d.lemma3_slack, d.a_alpha, d.b_alpha) {
        out.push(Check::at_least("radial_estimate_slack", params, slack / (a + b), -1e-6));
    }
    out
}

fn round_trip(path: &str) -> Result<Check> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    let result: RadialResult = serde_json::from_value(value["result"].clone()).context("reading the result object")?;
    let again = diagnostics(&result.params, &result)?;
    let stored = result.residuals;
    let pairs = [
        (stored.nehari_residual, again.nehari_residual),
        (stored.pohozaev_residual, again.pohozaev_residual),
        (stored.boundary_flux, again.boundary_flux),
        (stored.functional, again.functional),
        (stored.dirichlet, again.dirichlet),
        (stored.weighted_power, again.weighted_power),
    ];
    let worst = pairs
        .iter()
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(Check {
        check: "result_round_trip",
        params: Some(result.params),
        value: worst,
        bound: 1e-12,
        passed: worst <= 1e-12,
    })
}

pub fn verify(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let mut checks = Vec::new();
    if let Some(path) = &cfg.verify.result {
        checks.push(round_trip(path)?);
    }
    for &dim in &cfg.verify.dims {
        let p = cfg.problem.p.unwrap_or_else(|| default_exponent(dim));
        for &radius in &cfg.verify.radii {
            for &alpha in &cfg.verify.alphas {
                checks.extend(check_params(ProblemParams::unchecked(dim, p, radius, alpha), cfg));
            }
        }
    }
    let ok = checks.iter().all(|c| c.passed);
    let main = match format {
        Format::Csv => {
            let mut t = Table::new(&["check", "N", "p", "R", "alpha", "value", "bound", "passed"]);
            for c in &checks {
                let (n, p, r, a) = match c.params {
                    Some(q) => (q.dim.to_string(), num(q.p), num(q.radius), num(q.alpha)),
                    None => Default::default(),
                };
                t.push(vec![c.check.into(), n, p, r, a, num(c.value), num(c.bound), c.passed.to_string()]);
            }
            Artifact::new("verify.csv", t.to_csv()?)
        }
        Format::Json => Artifact::new("verify.json", to_json(&serde_json::json!({ "config": cfg, "checks": &checks }))?),
    };
    Ok(Outcome { main, extra: vec![], ok })
}
