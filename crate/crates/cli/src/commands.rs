//! One function per subcommand. Each returns its artifacts; nothing is
//! written until the whole command has finished.

use anyhow::Result;
use emden_core::ball::{solve_pair, symmetry_gap, BallResult};
use emden_core::experiments::{continuity_in_r, moving_shell, sobolev_constant, sweep_alpha, SweepRecord};
use emden_core::mesh::build_radial_grid;
use emden_core::radial::{solve_radial, RadialResult, DEFAULT_GRADING};
use emden_core::weight::{
    beta_exponent, k_constant, k_lower, k_star, r0, sobolev_lower_bound, sphere_area, ProblemParams,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{num, opt_bool, opt_num, to_json, Artifact, Format, Table};

pub struct Outcome {
    /// Written to stdout when no output directory is given.
    pub main: Artifact,
    pub extra: Vec<Artifact>,
    pub ok: bool,
}

fn main_artifact(stem: &str, format: Format, csv: impl FnOnce() -> Result<Vec<u8>>, json: impl FnOnce() -> Result<Vec<u8>>) -> Result<Artifact> {
    Ok(match format {
        Format::Csv => Artifact::new(format!("{stem}.csv"), csv()?),
        Format::Json => Artifact::new(format!("{stem}.json"), json()?),
    })
}

fn status_of<T>(r: &emden_core::Result<T>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.to_string(),
    }
}

#[derive(Serialize)]
struct ConstantRow {
    quantity: &'static str,
    value: Option<f64>,
    status: String,
}

pub fn constants(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let dim = cfg.problem.dim;
    let p = cfg.exponent();
    let mut rows = Vec::new();
    let mut add = |quantity, r: emden_core::Result<f64>| {
        rows.push(ConstantRow {
            quantity,
            status: status_of(&r),
            value: r.ok(),
        })
    };
    add("beta", Ok(beta_exponent(dim, p)));
    add("sphere_area", Ok(sphere_area(dim)));
    add("K", k_constant(dim, p));
    add("K_star", k_star(dim, p));
    add("K_lower", k_lower(dim, p));
    add("sobolev_lower_bound", sobolev_lower_bound(dim, p));
    if let Some(s) = cfg.sobolev.value {
        add("R0", r0(dim, p, s));
    }
    let ok = rows.iter().all(|r| r.status == "ok");
    let main = main_artifact(
        "constants",
        format,
        || {
            let mut t = Table::new(&["N", "p", "quantity", "value", "status"]);
            for r in &rows {
                t.push(vec![dim.to_string(), num(p), r.quantity.into(), opt_num(r.value), r.status.clone()]);
            }
            t.to_csv()
        },
        || to_json(&serde_json::json!({ "N": dim, "p": p, "constants": &rows })),
    )?;
    Ok(Outcome { main, extra: vec![], ok })
}

#[derive(Serialize)]
struct RadialReport<'a> {
    config: &'a RunConfig,
    status: String,
    result: Option<RadialResult>,
}

pub fn solve_radial_cmd(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let params = cfg.params();
    let solved = params.validate().and_then(|_| solve_radial(&params, cfg.grid.n, &cfg.solver));
    let report = RadialReport {
        config: cfg,
        status: status_of(&solved),
        result: solved.ok(),
    };
    let ok = report.result.is_some();
    let profile_csv = || {
        let mut t = Table::new(&["r", "u"]);
        if let Some(res) = &report.result {
            for (r, u) in res.profile.nodes.iter().zip(&res.profile.values) {
                t.push(vec![num(*r), num(*u)]);
            }
        }
        t.to_csv()
    };
    let json = to_json(&report)?;
    let (main, extra) = match format {
        Format::Json => (Artifact::new("result.json", json), ok.then(|| profile_csv().map(|b| Artifact::new("profile.csv", b)))),
        Format::Csv => (Artifact::new("profile.csv", profile_csv()?), Some(Ok(Artifact::new("result.json", json)))),
    };
    Ok(Outcome {
        main,
        extra: extra.transpose()?.into_iter().collect(),
        ok,
    })
}

#[derive(Serialize)]
struct BallReport<'a> {
    config: &'a RunConfig,
    status: String,
    gap: Option<f64>,
    broken: Option<bool>,
    radial: Option<RadialResult>,
    full: Option<BallResult>,
}

pub fn solve_ball_cmd(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let params = cfg.params();
    let solved = params
        .validate()
        .and_then(|_| solve_pair(&params, cfg.grid.n_r, cfg.grid.n_theta, &cfg.solver));
    let status = status_of(&solved);
    let (radial, full) = match solved {
        Ok((r, f)) => (Some(r), Some(f)),
        Err(_) => (None, None),
    };
    let (gap, broken) = match (&radial, &full) {
        (Some(r), Some(f)) => {
            let (g, b) = symmetry_gap(r, f, cfg.sweep.break_tol);
            (Some(g), Some(b))
        }
        _ => (None, None),
    };
    let report = BallReport {
        config: cfg,
        status,
        gap,
        broken,
        radial,
        full,
    };
    let ok = report.full.is_some();
    let field_csv = || {
        let two_d = params.dim >= 2;
        let mut t = Table::new(if two_d { &["r", "theta", "u"] } else { &["x", "u"] });
        if let Some(full) = &report.full {
            let f = &full.field;
            if two_d {
                let nt = f.theta.len();
                for (k, u) in f.values.iter().enumerate() {
                    t.push(vec![num(f.r[k / nt]), num(f.theta[k % nt]), num(*u)]);
                }
            } else {
                for (x, u) in f.r.iter().zip(&f.values) {
                    t.push(vec![num(*x), num(*u)]);
                }
            }
        }
        t.to_csv()
    };
    let json = to_json(&report)?;
    let (main, extra) = match format {
        Format::Json => (Artifact::new("result.json", json), ok.then(|| field_csv().map(|b| Artifact::new("field.csv", b)))),
        Format::Csv => (Artifact::new("field.csv", field_csv()?), Some(Ok(Artifact::new("result.json", json)))),
    };
    Ok(Outcome {
        main,
        extra: extra.transpose()?.into_iter().collect(),
        ok,
    })
}

const SWEEP_COLUMNS: &[&str] = &[
    "N",
    "p",
    "R",
    "alpha",
    "status",
    "S_rad",
    "S_full",
    "C_rad",
    "C_full",
    "gap",
    "broken",
    "s_peak",
    "beta_peak",
    "asym_index",
    "scaled_S_full",
    "scaled_S_rad",
    "scaled_beta",
    "A_over_B",
    "nehari_residual",
    "pohozaev_residual",
    "lemma3_slack",
];

fn sweep_table(records: &[SweepRecord]) -> Table {
    let mut t = Table::new(SWEEP_COLUMNS);
    for r in records {
        let q = &r.params;
        t.push(vec![
            q.dim.to_string(),
            num(q.p),
            num(q.radius),
            num(q.alpha),
            r.status.clone(),
            opt_num(r.s_rad),
            opt_num(r.s_full),
            opt_num(r.c_rad),
            opt_num(r.c_full),
            opt_num(r.gap),
            opt_bool(r.broken),
            opt_num(r.s_peak),
            opt_num(r.beta_peak),
            opt_num(r.asym_index),
            opt_num(r.scaled_s_full),
            opt_num(r.scaled_s_rad),
            opt_num(r.scaled_beta),
            opt_num(r.a_over_b),
            opt_num(r.nehari_residual),
            opt_num(r.pohozaev_residual),
            opt_num(r.lemma3_slack),
        ]);
    }
    t
}

pub fn sweep(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let records = sweep_alpha(&cfg.params(), &cfg.sweep.alphas, cfg.grid_spec(), &cfg.solver, cfg.sweep.break_tol)?;
    let ok = records.iter().all(SweepRecord::is_ok);
    let main = main_artifact(
        "sweep",
        format,
        || sweep_table(&records).to_csv(),
        || to_json(&serde_json::json!({ "config": cfg, "records": &records })),
    )?;
    Ok(Outcome { main, extra: vec![], ok })
}

pub fn moving_shell_cmd(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let report = moving_shell(
        cfg.moving_shell.delta,
        &cfg.sweep.alphas,
        &cfg.params(),
        cfg.grid_spec(),
        &cfg.solver,
        cfg.sweep.break_tol,
    )?;
    match report.broken_from {
        Some(a) => eprintln!("broken for every alpha >= {a}"),
        None => eprintln!("the last row is not broken"),
    }
    let ok = report.records.iter().all(SweepRecord::is_ok);
    let main = main_artifact(
        "moving_shell",
        format,
        || sweep_table(&report.records).to_csv(),
        || to_json(&serde_json::json!({ "config": cfg, "report": &report })),
    )?;
    Ok(Outcome { main, extra: vec![], ok })
}

pub fn continuity_cmd(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let table = continuity_in_r(
        &cfg.params(),
        cfg.problem.alpha,
        &cfg.continuity.radii,
        cfg.continuity.endpoint,
        cfg.grid_spec(),
        &cfg.solver,
    )?;
    let ok = table.rows.iter().all(|r| r.status == "ok");
    let main = main_artifact(
        "continuity",
        format,
        || {
            let mut t = Table::new(&["alpha", "R", "status", "S_full", "deviation"]);
            t.push(vec![num(table.alpha), num(table.endpoint), "ok".into(), num(table.endpoint_s_full), num(0.0)]);
            for r in &table.rows {
                t.push(vec![num(table.alpha), num(r.radius), r.status.clone(), opt_num(r.s_full), opt_num(r.deviation)]);
            }
            t.to_csv()
        },
        || to_json(&serde_json::json!({ "config": cfg, "table": &table })),
    )?;
    Ok(Outcome { main, extra: vec![], ok })
}

#[derive(Serialize)]
struct SobolevRow {
    dim: usize,
    p: f64,
    status: String,
    sobolev: Option<f64>,
    lower_bound: Option<f64>,
}

pub fn sobolev_cmd(cfg: &RunConfig, format: Format) -> Result<Outcome> {
    let dim = cfg.problem.dim;
    let rows: Vec<SobolevRow> = cfg
        .sobolev
        .exponents
        .iter()
        .map(|&p| {
            let s = ProblemParams::new(dim, p, 1.0, 0.0)
                .and_then(|params| build_radial_grid(&params, cfg.grid.n, DEFAULT_GRADING))
                .and_then(|grid| sobolev_constant(dim, p, &grid, &cfg.solver));
            SobolevRow {
                dim,
                p,
                status: status_of(&s),
                sobolev: s.ok(),
                lower_bound: sobolev_lower_bound(dim, p).ok(),
            }
        })
        .collect();
    let ok = rows.iter().all(|r| r.status == "ok");
    let main = main_artifact(
        "sobolev",
        format,
        || {
            let mut t = Table::new(&["N", "p", "status", "S", "lower_bound"]);
            for r in &rows {
                t.push(vec![r.dim.to_string(), num(r.p), r.status.clone(), opt_num(r.sobolev), opt_num(r.lower_bound)]);
            }
            t.to_csv()
        },
        || to_json(&serde_json::json!({ "config": cfg, "rows": &rows })),
    )?;
    Ok(Outcome { main, extra: vec![], ok })
}
