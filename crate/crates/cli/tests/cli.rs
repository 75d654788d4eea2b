use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracns::grid::{Field, GridSpec};
use serde_json::Value;

fn fracns(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracns")).args(args).output().unwrap()
}

fn run(dir: &Path, config: &str, sub: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args: Vec<&str> = sub.to_vec();
    let (c, o) = (cfg.to_str().unwrap().to_string(), out.to_str().unwrap().to_string());
    args.extend(["--config", &c, "--out-dir", &o]);
    (fracns(&args), out)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const BELTRAMI: &str = r#"{
  "grid": {"d": 3, "n": 8},
  "solver": {"alpha": 0.8, "t_end": 0.5, "nodes": 6},
  "data": {"initial": {"preset": "abc_beltrami_3d", "amplitude": 0.05}},
  "run": {"trials": 2}
}"#;

#[test]
fn minimal_config_runs_and_lists_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), r#"{"grid": {"d": 3, "n": 8}, "solver": {"alpha": 0.8}}"#, &["kernel"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = json(&out.join("kernel.manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let files = m["files"].as_array().unwrap();
    assert_eq!(files[0]["path"], "kernel_profile.csv");
    let (sha, _) = fracns_cli::manifest::sha256_file(&out.join("kernel_profile.csv")).unwrap();
    assert_eq!(files[0]["sha256"], sha.as_str());
    let csv = fs::read_to_string(out.join("kernel_profile.csv")).unwrap();
    assert!(csv.starts_with("alpha,t,r,g,grad_g,decay_ratio\n"));
}

#[test]
fn alpha_out_of_range_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), r#"{"grid": {"d": 3, "n": 8}, "solver": {"alpha": 1.2}}"#, &["picard"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha out of (0.5, 1]"));
    let m = json(&out.join("picard.manifest.json"));
    assert_eq!(m["status"], "failed");
    assert_eq!(m["failure"]["exit_code"], 2);
    assert!(m["files"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_keys_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run(
        dir.path(),
        r#"{"grid": {"d": 3, "n": 8, "spacing": 1}, "solver": {"alpha": 0.8, "tolerance": 1e-9}}"#,
        &["solve"],
    );
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("grid.spacing") && e.contains("solver.tolerance"), "{e}");
}

#[test]
fn missing_and_malformed_configs_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = fracns(&["solve", "--config", "/nonexistent/config.json", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let (o, _) = run(dir.path(), r#"{"grid": {"d": 3"#, &["solve"]);
    assert_eq!(o.status.code(), Some(5));
    let o = fracns(&["solve", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&out.join("solve.manifest.json"))["failure"]["exit_code"], 2);
}

#[test]
fn picard_on_beltrami_writes_trajectory_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), BELTRAMI, &["picard", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let rep = json(&out.join("picard_report.json"));
    assert_eq!(rep["report"]["converged"], true);
    assert_eq!(rep["report"]["within_two_delta"], true);
    assert!(rep["c_b"]["c_b"].as_f64().unwrap() > 0.0);
    let index = json(&out.join("picard_trajectory/trajectory.json"));
    assert_eq!(index["times"].as_array().unwrap().len(), 6);
    assert!(out.join("picard_trajectory/u_0005.fnsv").exists());
    assert!(!out.join("picard_trajectory/.incomplete").exists());
    let m = json(&out.join("picard.manifest.json"));
    assert!(m["invalid"].as_array().unwrap().is_empty());
    assert_eq!(m["files"].as_array().unwrap().len(), 9);
    let traj = fracns_cli::manifest::read_trajectory(&out.join("picard_trajectory")).unwrap();
    assert!(traj.max_divergence() < 1e-10);
}

#[test]
fn norm_with_constant_exponent_is_classical() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridSpec::new(2, 16, 3.0).unwrap();
    let f = Field::from_fn(g, 2, |x, c| (x[0] + 0.3 * c as f64).sin() * (1.0 + x[1])).unwrap();
    let path = dir.path().join("f.fnsv");
    fracns::io::save(&path, &f).unwrap();
    let cfg = r#"{"grid": {"d": 2, "n": 16, "length": 3.0}, "solver": {"alpha": 0.8},
                 "exponents": {"space": {"kind": "constant", "p0": 3.5}}}"#;
    let (o, out) = run(dir.path(), cfg, &["norm", "--field", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let got: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    let want = (f.magnitude().iter().map(|m| m.powf(3.5)).sum::<f64>() * g.cell_volume()).powf(1.0 / 3.5);
    assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
    let rep = json(&out.join("norm.json"));
    assert!((rep["classical"].as_f64().unwrap() - want).abs() <= 1e-10 * want);
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if p.is_dir() {
            v.extend(outputs(&p).into_iter().map(|(n, b)| (format!("{name}/{n}"), b)));
        } else if !name.ends_with(".manifest.json") {
            v.push((name, fs::read(&p).unwrap()));
        }
    }
    v.sort();
    v
}

#[test]
fn outputs_are_deterministic_for_fixed_seed() {
    let cfg = r#"{"grid": {"d": 2, "n": 16}, "solver": {"alpha": 0.7, "t_end": 0.3, "nodes": 5},
                 "data": {"initial": {"preset": "random_divfree", "amplitude": 0.2}}, "run": {"trials": 2}}"#;
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (oa, outa) = run(a.path(), cfg, &["picard", "--seed", "11"]);
    let (ob, outb) = run(b.path(), cfg, &["picard", "--seed", "11"]);
    let (oc, outc) = run(c.path(), cfg, &["picard", "--seed", "12"]);
    assert!(oa.status.success() && ob.status.success() && oc.status.success());
    assert_eq!(outputs(&outa), outputs(&outb));
    assert_ne!(outputs(&outa), outputs(&outc));
    let (ma, mb) = (json(&outa.join("picard.manifest.json")), json(&outb.join("picard.manifest.json")));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(ma["files"], mb["files"]);
    assert_eq!(ma["seed"], 11);
}

#[test]
fn divergence_exits_with_numerical_failure() {
    let cfg = r#"{"grid": {"d": 2, "n": 16}, "solver": {"alpha": 0.6, "t_end": 2.0, "nodes": 9, "viscosity": 0.01},
                 "data": {"initial": {"preset": "random_divfree", "amplitude": 50.0, "seed": 3}}, "run": {"trials": 0}}"#;
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), cfg, &["picard"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&out.join("picard_report.json"))["report"]["diverged"], true);
    assert!(!out.join("picard_trajectory").exists());
    let m = json(&out.join("picard.manifest.json"));
    assert_eq!(m["failure"]["exit_code"], 3);
    assert_eq!(m["files"].as_array().unwrap().len(), 2);
}

#[test]
fn solve_then_theorem1_on_the_trajectory() {
    let cfg = r#"{"grid": {"d": 3, "n": 8}, "solver": {"alpha": 1.0, "t_end": 0.5, "nodes": 9},
                 "exponents": {"time": {"kind": "constant", "p0": 5.0}, "q": 6.0},
                 "data": {"initial": {"preset": "abc_beltrami_3d", "amplitude": 0.1}},
                 "run": {"times": [0.125, 0.25, 0.5], "format": "json"}}"#;
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), cfg, &["solve"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let traj = out.join("solve_trajectory");
    let (o, _) = run(dir.path(), cfg, &["theorem1", "--trajectory", traj.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&out.join("theorem1_verdict.json"));
    assert_eq!(v["exponents"]["admissible"], true);
    assert_eq!(v["smallness"]["holds"], true);
    assert_eq!(v["solution"]["within_bound"], true);
    let sweep = json(&out.join("theorem1_sweep.json"));
    assert_eq!(sweep.as_array().unwrap().len(), 3);

    fs::write(traj.join(".incomplete"), b"").unwrap();
    let (o, _) = run(dir.path(), cfg, &["theorem1", "--trajectory", traj.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn theorem1_rejects_inadmissible_exponents() {
    let cfg = r#"{"grid": {"d": 3, "n": 8}, "solver": {"alpha": 0.6},
                 "exponents": {"time": {"kind": "constant", "p0": 2.5}, "q": 3.0}}"#;
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), cfg, &["theorem1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&out.join("theorem1_verdict.json"))["exponents"]["admissible"], false);
}

#[test]
fn theorem2_with_tensor_forcing() {
    let cfg = r#"{"grid": {"d": 3, "n": 8, "length": 3.141592653589793}, "solver": {"alpha": 0.8, "t_end": 0.5},
                 "exponents": {"space": {"kind": "sinusoidal", "p0": 4.0, "a": 1.0, "period": 3.141592653589793}},
                 "data": {"initial": {"preset": "bump", "amplitude": 0.01},
                          "forcing": {"kind": "tensor", "amplitude": 0.01, "seed": 4}},
                 "run": {"times": [0.5, 1.0], "nodes_per_unit": 8, "trials": 2}}"#;
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), cfg, &["theorem2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&out.join("theorem2_verdict.json"));
    assert!(v["force_norm"].as_f64().unwrap() > 0.0);
    assert!(v["sweep"]["force"]["ratios"][0].as_f64().unwrap() > 0.0);
    assert!(fs::read_to_string(out.join("theorem2_sweep.csv")).unwrap().starts_with("T,initial,force,bilinear\n"));
}

#[test]
fn operators_check_reports_ensemble() {
    let cfg = r#"{"grid": {"d": 2, "n": 16}, "solver": {"alpha": 0.8},
                 "run": {"seed": 5, "operators": {"operator": "maximal", "ensemble": 4}}}"#;
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), cfg, &["operators-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("operators_report.json"));
    assert_eq!(r["ensemble_size"], 4);
    assert_eq!(r["seed"], 5);
    assert!(r["ratio_sup"].as_f64().unwrap() >= 1.0);
}

#[test]
fn report_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), r#"{"grid": {"d": 3, "n": 8}, "solver": {"alpha": 0.8}}"#, &["kernel", "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = fracns(&["report", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("report.json"));
    assert_eq!(r[0]["subcommand"], "kernel");
    assert_eq!(r[0]["files"], 2);
    fs::write(out.join("decay_report.json"), "{}").unwrap();
    let o = fracns(&["report", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("decay_report.json"));
}

#[test]
fn subcommands_share_an_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["picard", "solve", "kernel"] {
        let (o, _) = run(dir.path(), BELTRAMI, &[sub]);
        assert_eq!(o.status.code(), Some(0), "{sub}: {}", stderr(&o));
    }
    let out = dir.path().join("out");
    let o = fracns(&["report", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("report.json"));
    assert_eq!(r.as_array().unwrap().len(), 3);
}
