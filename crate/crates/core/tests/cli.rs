//! End-to-end runs of the command-line runner.

use std::fs;

use koksma_lab::cli::run;

fn args(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn equidistant_points_have_star_discrepancy_one_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pts.txt");
    fs::write(&input, "0\n0.25\n0.5\n0.75\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&args(&["discrepancy", input.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("discrepancy.json")).unwrap()).unwrap();
    assert_eq!(v["d_star"].as_f64().unwrap(), 0.25);
    assert_eq!(v["run"]["command"], "discrepancy");
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let out = dir.path().join("out");
    for body in ["{not json", r#"{"n_points": -1}"#, r#"{"unknown": 1}"#, r#"{"eps": 1.0}"#, "[1, 2]"] {
        fs::write(&cfg, body).unwrap();
        let code = run(&args(&["generate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]));
        assert_eq!(code, 2, "config {body}");
        assert!(!out.exists(), "config {body} left artifacts");
    }
    assert_eq!(run(&args(&["generate", "--threads", "0", "--out", out.to_str().unwrap()])), 2);
    assert_eq!(run(&args(&["selftest", "--only", "12", "--out", out.to_str().unwrap()])), 2);
    assert!(!out.exists());
}

#[test]
fn generate_embeds_seed_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gen.json");
    fs::write(&cfg, r#"{"points": {"kind": "sampled_power"}, "n_points": 50, "seed": 9}"#).unwrap();
    let out = dir.path().join("a");
    assert_eq!(run(&args(&["generate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let text = fs::read_to_string(out.join("orbit.csv")).unwrap();
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(header["seed"], 9);
    assert_eq!(header["config"]["n_points"], 50);
    assert_eq!(lines.next().unwrap(), "n,s_n,value,radius");
    assert_eq!(lines.count(), 50);

    let again = dir.path().join("b");
    run(&args(&["generate", "--config", cfg.to_str().unwrap(), "--out", again.to_str().unwrap()]));
    assert_eq!(text, fs::read_to_string(again.join("orbit.csv")).unwrap());

    let other = dir.path().join("c");
    run(&args(&["generate", "--config", cfg.to_str().unwrap(), "--seed", "10", "--out", other.to_str().unwrap()]));
    assert_ne!(text, fs::read_to_string(other.join("orbit.csv")).unwrap());
}

#[test]
fn constants_are_written() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&args(&["constants", "--out", dir.path().to_str().unwrap()])), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("constants.json")).unwrap()).unwrap();
    assert!((v["lil_power_orbit"].as_f64().unwrap() - 0.7071067811865475).abs() < 1e-15);
    assert!((v["kesten"].as_f64().unwrap() - 0.20264236728467555).abs() < 1e-15);
    assert!((v["fukuyama_base2"].as_f64().unwrap() - 1.0183501544346311).abs() < 1e-15);
}

#[test]
fn checks_pass_and_selftest_subset_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    assert_eq!(run(&args(&["vdc", "--out", &p("vdc")])), 0);
    assert_eq!(run(&args(&["lemma5", "--out", &p("l5")])), 0);
    assert_eq!(run(&args(&["dyadic", "--out", &p("dy")])), 0);
    assert_eq!(run(&args(&["selftest", "--only", "1,2,5", "--threads", "1", "--out", &p("s1")])), 0);
    assert_eq!(run(&args(&["selftest", "--only", "1,2,5", "--threads", "3", "--out", &p("s2")])), 0);
    for name in ["c1_oracle.csv", "c2_sandwich.csv", "c5_fourier.csv", "selftest_summary.json"] {
        assert_eq!(fs::read(dir.path().join("s1").join(name)).unwrap(), fs::read(dir.path().join("s2").join(name)).unwrap());
    }
}

#[test]
fn small_lil_and_clt_runs() {
    let dir = tempfile::tempdir().unwrap();
    let lil = dir.path().join("lil.json");
    fs::write(&lil, r#"{"points": {"kind": "power", "x": 1.5}, "n_max": 2000, "grid": {"kind": "nform"}}"#).unwrap();
    let out = dir.path().join("lil");
    assert_eq!(run(&args(&["lil", "--config", lil.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let csv = fs::read_to_string(out.join("lil.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("N,d_star"));

    let clt = dir.path().join("clt.json");
    fs::write(&clt, r#"{"n_terms": 64, "n_draws": 100}"#).unwrap();
    let out = dir.path().join("clt");
    assert_eq!(run(&args(&["clt", "--config", clt.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    assert_eq!(fs::read_to_string(out.join("clt.csv")).unwrap().lines().count(), 102);

    fs::write(&clt, r#"{"n_terms": 64, "n_draws": 10}"#).unwrap();
    let out = dir.path().join("clt_bad");
    assert_eq!(run(&args(&["clt", "--config", clt.to_str().unwrap(), "--out", out.to_str().unwrap()])), 2);
    assert!(!out.exists());
}
