use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emden-lab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL: &str = "[grid]\nn = 513\nn_r = 48\nn_theta = 24\n";

#[test]
fn constants_for_three_dimensions() {
    let o = run(&["constants", "--dim", "3", "--p", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let value = |name: &str| -> f64 {
        let line = text.lines().find(|l| l.split(',').nth(2) == Some(name)).unwrap();
        line.split(',').nth(3).unwrap().parse().unwrap()
    };
    assert!((value("K") - 0.25).abs() < 1e-15);
    assert_eq!(value("beta"), 0.5);
    assert!(value("sobolev_lower_bound") > 0.0);
}

#[test]
fn planar_constants_are_refused_by_name() {
    let o = run(&["constants", "--dim", "2", "--p", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let k = text.lines().find(|l| l.contains(",K,")).unwrap();
    assert!(k.contains("requires N >= 3"), "{k}");
    assert!(text.lines().any(|l| l.contains(",K_star,") && l.ends_with(",ok")));
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[problem]\ndim = 3\nalpah = 4\n");
    let out = dir.path().join("out");
    let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpah"));
    assert!(!out.exists());

    let cfg = write_config(dir.path(), "[problem]\nradius = 1.5\n");
    let o = run(&["solve-radial", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn sweep_schema_and_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}[problem]\ndim = 2\nradius = 0.0\n[sweep]\nalphas = [5, 30]\n"));
    let o = run(&["sweep", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    for col in ["scaled_S_full", "scaled_S_rad", "scaled_beta", "A_over_B", "gap", "broken", "status"] {
        assert!(header.contains(&col), "missing {col}");
    }
    let alpha_col = header.iter().position(|c| *c == "alpha").unwrap();
    let alphas: Vec<f64> = lines.map(|l| l.split(',').nth(alpha_col).unwrap().parse().unwrap()).collect();
    assert_eq!(alphas, vec![5.0, 30.0]);
    // 17 significant digits
    let first = text.lines().nth(1).unwrap();
    let s_rad = first.split(',').nth(header.iter().position(|c| *c == "S_rad").unwrap()).unwrap();
    assert_eq!(s_rad.split('e').next().unwrap().replace(['.', '-'], "").len(), 17, "{s_rad}");
}

#[test]
fn failed_rows_keep_the_run_going() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}[solver]\nmax_iter = 1\npolish = false\n[sweep]\nalphas = [5, 30]\n"),
    );
    let o = run(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    for row in text.lines().skip(1) {
        assert!(row.contains("did not converge"));
        assert!(row.contains(",,,"), "numeric columns should be empty: {row}");
    }
}

#[test]
fn dirichlet_ball_is_not_broken() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}[problem]\ndim = 3\nradius = 1.0\nalpha = 40\n"));
    let out = dir.path().join("ball");
    let o = run(&["solve-ball", "--config", &cfg, "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "ok");
    assert_eq!(json["broken"], false);
    assert_eq!(json["config"]["problem"]["alpha"], 40.0);
    let field = std::fs::read_to_string(out.join("field.csv")).unwrap();
    assert_eq!(field.lines().next(), Some("r,theta,u"));
    assert_eq!(field.lines().count(), 1 + 48 * 24);
}

#[test]
fn result_round_trip_reproduces_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}[problem]\ndim = 3\nradius = 0.4\nalpha = 25\n"));
    let out = dir.path().join("radial");
    let o = run(&["solve-radial", "--config", &cfg, "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let profile = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    assert_eq!(profile.lines().count(), 1 + 513);

    let result = out.join("result.json");
    let cfg = write_config(
        dir.path(),
        &format!("[verify]\ndims = []\nresult = {:?}\n", result.to_str().unwrap()),
    );
    let o = run(&["verify", "--config", &cfg]);
    assert!(o.status.success(), "{}", stdout(&o));
    let row = stdout(&o).lines().nth(1).unwrap().to_owned();
    assert!(row.starts_with("result_round_trip,") && row.ends_with(",true"), "{row}");
}

#[test]
fn sobolev_and_continuity_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}[problem]\ndim = 3\nalpha = 10\n[sobolev]\nexponents = [2.0, 6.0]\n[continuity]\nradii = [0.01]\nendpoint = 0\n"),
    );
    let o = run(&["sobolev", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().contains(",ok,"));
    assert!(text.lines().nth(2).unwrap().contains("subcritical"));

    let o = run(&["continuity", "--config", &cfg, "--format", "json"]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(json["table"]["rows"][0]["deviation"].as_f64().unwrap() < 0.05);
}
