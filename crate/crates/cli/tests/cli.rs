use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dsgc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsgc")).args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|f| f.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

#[test]
fn cir_preset_run_writes_stats_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cir");
    let o = dsgc(&["run", "--preset", "ex3_cir", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let (header, rows) = read_csv(&out.join("stats.csv"));
    assert_eq!(header, ["t", "mean_1", "var_1"]);
    let last = rows.last().unwrap();
    assert!((last[0] - 3.0).abs() < 1e-12);
    assert!((last[1] - 0.6).abs() < 2e-3, "terminal mean {}", last[1]);

    let (header, rows) = read_csv(&out.join("diagnostics.csv"));
    assert_eq!(
        header[..8],
        ["t_j", "cond_A", "l1_objective", "residual", "node_count", "lp_iters", "fallbacks", "clamps"]
    );
    assert_eq!(rows.len(), 29);
    assert!(rows.iter().all(|r| r[4] >= 1.0 && r[4] <= 5.0));
    assert!(out.join("errors.csv").exists());
}

#[test]
fn config_file_run_accepts_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ou.cfg");
    fs::write(
        &cfg,
        "# plain OU\nmodel = ou\nb = 2\nmu = 0.5\nsigma = 1\nu0 = normal(1, 0.01)\nT = 1\ndelta_t = 0.1\nN = 3\n",
    )
    .unwrap();
    let out = dir.path().join("ou");
    let o = dsgc(&["run", "--config", cfg.to_str().unwrap(), "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("9 restarts"), "{stdout}");
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dsgc(&["run", "--config", dir.path().join("nope.cfg").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));

    let empty = dir.path().join("empty.cfg");
    fs::write(&empty, "").unwrap();
    let o = dsgc(&["run", "--config", empty.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model"));

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "model = cir\nb = 2\nmu = 0.6\nsigma = 0.5\nu0 = 1\nT = 1.0\ndelta_t = 0.3\n").unwrap();
    let o = dsgc(&["run", "--config", bad.to_str().unwrap(), "--out", dir.path().join("y").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(dsgc(&["run", "--preset", "fig9"]).status.code(), Some(1));
    assert_eq!(dsgc(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn degree_sweep_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = dsgc(&["sweep", "--preset", "ex3_cir", "--axis", "N", "--values", "1,2,4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("summary.csv"));
    assert_eq!(header[0], "N");
    assert_eq!(rows.len(), 3);
    let eps_var = header.iter().position(|h| h == "eps_var_1").unwrap();
    assert!(rows[2][eps_var] < rows[1][eps_var] && rows[1][eps_var] < rows[0][eps_var]);
    assert!(out.join("N_4.csv").exists());
}

#[test]
fn monte_carlo_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc");
    let o = dsgc(&["mc", "--preset", "ex3_cir", "--samples", "2000", "--repeats", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("mc_summary.csv"));
    assert!((rows[0][1] - 0.601).abs() < 0.01, "MC mean {}", rows[0][1]);
    assert!(out.join("mc_errors.csv").exists());
}
