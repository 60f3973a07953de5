use std::path::Path;
use std::process::{Command, Output};

use paramp_core::grid::Grid2D;

const DPA_POINT: &str = r#"
name = "one"
observables = ["xi", "gain", "efficiency", "squeezing"]

[[models]]
label = "dpa"
kind = "DPA"

[[axes]]
name = "lambda"
start = 0.0
stop = 0.0
count = 1
"#;

fn paramp(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_paramp"));
    cmd.args(args).env_remove("PARAMP_CONFIG").env_remove("PARAMP_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

/// Metadata JSON and (header, rows) of a CSV with a `#` block.
fn read_csv(path: &Path) -> (serde_json::Value, Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let meta: String = text.lines().take_while(|l| l.starts_with('#')).map(|l| &l[2..]).collect::<Vec<_>>().join("\n");
    let body: String = text.lines().skip_while(|l| l.starts_with('#')).collect::<Vec<_>>().join("\n");
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (serde_json::from_str(&meta).unwrap(), header, rows)
}

fn col(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[i].parse().unwrap()
}

#[test]
fn undriven_dpa_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    std::fs::write(&cfg, DPA_POINT).unwrap();
    let out_dir = dir.path().join("out");
    ok(&paramp(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()], &[]));
    let (meta, header, rows) = read_csv(&out_dir.join("one.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(meta["rows"], 1);
    let row = &rows[0];
    assert!((col(&header, row, "gain") - 1.0).abs() < 1e-6);
    assert!((col(&header, row, "efficiency") - 1.0).abs() < 1e-6);
    assert!(col(&header, row, "xi").abs() < 1e-9);
    assert!((col(&header, row, "squeezing") - 1.0).abs() < 1e-6);
    assert_eq!(row[header.iter().position(|h| h == "status").unwrap()], "ok");
}

#[test]
fn reruns_are_byte_identical_and_env_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    std::fs::write(&cfg, DPA_POINT.replace("stop = 0.0\ncount = 1", "stop = 0.3\ncount = 4")).unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("run{k}"));
        ok(&paramp(
            &["sweep", "--out", out_dir.to_str().unwrap()],
            &[("PARAMP_CONFIG", cfg.to_str().unwrap()), ("PARAMP_DIM", "40"), ("PARAMP_MAX_DIM", "160")],
        ));
        runs.push(std::fs::read(out_dir.join("one.csv")).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    let (meta, _, _) = read_csv(&dir.path().join("run0/one.csv"));
    assert_eq!(meta["config"]["solver"]["dim"], 40);
    assert_eq!(meta["config"]["solver"]["max_dim"], 160);
}

#[test]
fn dim_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    std::fs::write(&cfg, DPA_POINT).unwrap();
    let out_dir = dir.path().join("out");
    ok(&paramp(
        &["sweep", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--dim", "50"],
        &[("PARAMP_DIM", "40")],
    ));
    let (meta, _, _) = read_csv(&out_dir.join("one.csv"));
    assert_eq!(meta["config"]["solver"]["dim"], 50);
}

#[test]
fn invalid_config_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, DPA_POINT.replace("kind = \"DPA\"", "kind = \"DPA\"\nkerr = 0.01")).unwrap();
    let out = paramp(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert!(!dir.path().join("one.csv").exists());

    let out = paramp(&["sweep", "--config", cfg.to_str().unwrap()], &[("PARAMP_UNITS", "furlongs")]);
    assert!(!out.status.success());
}

#[test]
fn params_reports_kerr_free_sts() {
    let out = paramp(
        &["params", "--topology", "sts-inductor", "--lj", "80", "--c", "4", "--l", "100", "--flux", "-1.5707963267948966", "--json"],
        &[],
    );
    ok(&out);
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["kerr_free"], true);
    assert!(r["cubic"].as_f64().unwrap() < 0.0);

    let si = paramp(
        &["params", "--topology", "sts-inductor", "--lj", "80", "--c", "4", "--l", "100", "--flux", "-1.5707963267948966", "--json", "--units", "si"],
        &[],
    );
    ok(&si);
    let s: serde_json::Value = serde_json::from_slice(&si.stdout).unwrap();
    let ratio = s["lambda"].as_f64().unwrap() / r["lambda"].as_f64().unwrap();
    assert!((ratio - 300.0).abs() < 1e-9, "{ratio}");
}

#[test]
fn stability_writes_csv_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    ok(&paramp(
        &["stability", "--out", dir.path().to_str().unwrap(), "--delta-range", "0.3,0.3", "--lambda-range", "0.4,0.8", "--resolution", "1,41"],
        &[],
    ));
    let grid = Grid2D::read_binary(std::fs::File::open(dir.path().join("stability.pgrd")).unwrap()).unwrap();
    assert_eq!((grid.x().len(), grid.y().len()), (1, 41));
    assert_eq!(grid.values.first(), Some(&2.0));
    assert_eq!(grid.values.last(), Some(&3.0));
    let (meta, header, rows) = read_csv(&dir.path().join("stability.csv"));
    assert_eq!(header, ["delta[kappa]", "lambda[kappa]", "count"]);
    assert_eq!(rows.len(), 41);
    assert_eq!(meta["cubic"], -2e-4);
}

#[test]
fn wigner_is_normalised() {
    let dir = tempfile::tempdir().unwrap();
    ok(&paramp(&["wigner", "--out", dir.path().to_str().unwrap(), "--lambda", "0.3", "--points", "61", "--dim", "40"], &[]));
    let (meta, _, rows) = read_csv(&dir.path().join("wigner.csv"));
    assert_eq!(rows.len(), 61 * 61);
    assert!((meta["normalization"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    let grid = Grid2D::read_binary(std::fs::File::open(dir.path().join("wigner.pgrd")).unwrap()).unwrap();
    assert_eq!(grid.values.len(), 61 * 61);
}

#[test]
fn figure_dump_round_trips() {
    let out = paramp(&["figure", "fig3", "--dump"], &[]);
    ok(&out);
    let cfg = paramp_cli::SweepConfig::from_toml(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg, paramp_cli::figure_recipe("fig3").unwrap());
    assert!(!paramp(&["figure", "fig9"], &[]).status.success());
}
