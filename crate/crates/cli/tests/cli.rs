use std::process::{Command, Output};

fn hetflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetflow")).args(args).env_remove("HETFLOW_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows as `column -> values`, skipping the schema comment.
fn columns(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema_version=1"));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn positive_regular_trajectory_is_monotone_and_bounded() {
    let o = hetflow(&["homothety", "--case", "positive", "--kappa", "0.1", "--mu", "1", "--t-end", "50"]);
    assert!(o.status.success());
    let (h, rows) = columns(&stdout(&o));
    assert_eq!(&h[..3], &["t", "sigma", "f"]);
    let sigma = col(&h, &rows, "sigma");
    assert!(sigma.windows(2).all(|w| w[1] >= w[0]));
    assert!(sigma.iter().all(|s| s.is_finite() && *s < 10.0));
}

#[test]
fn flat_balanced_case_is_constant() {
    let o = hetflow(&["homothety", "--case", "flat", "--kappa", "1", "--mu", "2"]);
    let (h, rows) = columns(&stdout(&o));
    for name in ["sigma", "sigma_closed"] {
        assert!(col(&h, &rows, name).iter().all(|&s| s == 1.0), "{name}");
    }
}

#[test]
fn su2_collapses_at_t_max() {
    let o = hetflow(&["homothety", "--case", "su2", "--kappa", "2", "--t-end", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert!(last.ends_with(",collapse"), "{last}");
    let t: f64 = last.split(',').next().unwrap().parse().unwrap();
    let t_max = 2.0 / 4.0 * ((27.0f64 / 8.0).ln() - 1.0);
    assert!((t - t_max).abs() < 1e-9 * t_max, "{t} vs {t_max}");
}

#[test]
fn negative_sweep_splits_at_six() {
    let o =
        hetflow(&["sweep", "--case", "negative", "--kappa-min", "5", "--kappa-max", "7", "--kappa-n", "3", "--mu-max", "0", "--mu-n", "1"]);
    let (h, rows) = columns(&stdout(&o));
    let tag = h.iter().position(|x| x == "tag").unwrap();
    let tags: Vec<&str> = rows.iter().map(|r| r[tag].as_str()).collect();
    assert_eq!(tags[1], "static");
    assert_ne!(tags[0], tags[2]);
}

#[test]
fn sweep_output_is_byte_identical_and_thread_independent() {
    let args = ["sweep", "--case", "positive", "--kappa-n", "9", "--mu-n", "9", "--cross-check"];
    let a = hetflow(&args);
    let b = hetflow(&args);
    let c = Command::new(env!("CARGO_BIN_EXE_hetflow")).args(args).env("HETFLOW_THREADS", "1").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn soliton_start_gives_constant_flow_columns() {
    let o =
        hetflow(&["flow", "--algebra", "heisenberg", "--metric", "0.1,1,1", "--f", "0.31622776601683794", "--kappa", "10", "--t-end", "1"]);
    assert!(o.status.success());
    let (h, rows) = columns(&stdout(&o));
    for name in ["g00", "g11", "g22", "f"] {
        let v = col(&h, &rows, name);
        assert!(v.iter().all(|x| (x - v[0]).abs() <= 1e-9 * v[0].abs()), "{name}");
    }
}

#[test]
fn flow_matches_homothety_on_einstein_data() {
    // Unit metric on the hyperbolic algebra with c = 1/√6 has scalar curvature −1.
    let c = (1.0f64 / 6.0).sqrt().to_string();
    let f = hetflow(&["flow", "--algebra", "hyperbolic", "--param", &c, "--f", "0.5", "--kappa", "0.3", "--t-end", "2"]);
    let h = hetflow(&["homothety", "--case", "negative", "--model", "flow-reduced", "--kappa", "0.3", "--mu", "0.5", "--t-end", "2"]);
    assert!(f.status.success() && h.status.success());
    let (fh, frows) = columns(&stdout(&f));
    let (t_flow, vol) = (col(&fh, &frows, "t"), col(&fh, &frows, "volume_scale"));
    let (hh, hrows) = columns(&stdout(&h));
    let (t_h, sigma) = (col(&hh, &hrows, "t"), col(&hh, &hrows, "sigma"));
    assert!((t_flow.last().unwrap() - t_h.last().unwrap()).abs() < 1e-9);
    assert!((vol.last().unwrap() - sigma.last().unwrap()).abs() <= 1e-6);
}

#[test]
fn non_spd_metric_is_a_numerical_error() {
    let o = hetflow(&["flow", "--algebra", "r3", "--metric", "1,0,-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("positive definite"));
}

#[test]
fn heisenberg_soliton_check_passes_with_unit_dilaton() {
    let o = hetflow(&["soliton-check", "--algebra", "heisenberg", "--kappa", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["pass"], true);
    assert_eq!(v["f"], 1.0);
    assert_eq!(v["classification"]["case"], "One");
}

#[test]
fn non_soliton_fails_verification() {
    let o = hetflow(&["soliton-check", "--algebra", "su2", "--f", "1", "--kappa", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn identities_suite_passes() {
    let o = hetflow(&["verify", "--suite", "identities", "--trials", "100", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["suites"][0]["suite"], "identities");
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out.csv");
    std::fs::write(&cfg, "{\"kappa\": 1.0, \"kapa\": 2}").unwrap();
    let o = hetflow(&["--config", cfg.to_str().unwrap(), "homothety", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

    std::fs::write(&cfg, "{\"kappa\": ").unwrap();
    assert_eq!(hetflow(&["--config", cfg.to_str().unwrap(), "homothety"]).status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out.csv");
    std::fs::write(&cfg, r#"{"case": "flat", "kappa": 1.0, "mu": 3.0, "t_end": 1.0}"#).unwrap();
    let o = hetflow(&["--config", cfg.to_str().unwrap(), "homothety", "--mu", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let (h, rows) = columns(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(col(&h, &rows, "f")[0], 2.0);
}

#[test]
fn bad_inputs_are_config_errors() {
    for args in [
        &["homothety", "--case", "spherical"][..],
        &["homothety", "--kappa", "nan"],
        &["homothety", "--t-start", "1"],
        &["sweep", "--kappa-min", "2", "--kappa-max", "1"],
        &["flow", "--algebra", "so3"],
        &["flow"],
        &["verify", "--suite", "nope"],
        &["frobnicate"],
    ] {
        assert_eq!(hetflow(args).status.code(), Some(1), "{args:?}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_hetflow")).args(["verify", "--suite", "static"]).env("HETFLOW_THREADS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn negative_kappa_is_a_domain_error() {
    assert_eq!(hetflow(&["homothety", "--kappa=-1"]).status.code(), Some(2));
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(hetflow(&["--help"]).status.code(), Some(0));
    assert_eq!(hetflow(&["--version"]).status.code(), Some(0));
}
