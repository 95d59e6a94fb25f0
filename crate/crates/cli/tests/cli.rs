use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use due_cli::{cmd_compare, CliError, RunOptions};
use due_core::ErrorCategory;
use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn due(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_due")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn base(network: &Path, algorithm: &str, iterations: usize) -> Value {
    let mut solver = json!({"algorithm": algorithm, "tau0": 10.0, "max_iterations": iterations});
    match algorithm {
        "fbf" => {
            solver["alpha"] = "pow(2, -0.9, 1)".into();
            solver["beta"] = "affine_pow(0.7, -0.7, 2, -0.7)".into();
        }
        "ifbf" => {
            solver["beta"] = "pow(10, -2, 1)".into();
            solver["eps"] = "pow(1, -5, 32)".into();
        }
        _ => {}
    }
    json!({
        "name": algorithm,
        "network_dir": network,
        "t1": 2.0,
        "num_intervals": 70,
        "output_dir": format!("out_{algorithm}"),
        "solver": solver,
    })
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ifbf.json", &base(&data("nguyen"), "ifbf", 4));
    let o = due(&["run", "-c", cfg.to_str().unwrap(), "--seed", "7", "--dump-dnl"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out_ifbf");
    for f in ["iterations.csv", "flows.csv", "delays.csv", "gaps.csv", "dnl.csv", "summary.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let iterations = fs::read_to_string(out.join("iterations.csv")).unwrap();
    assert_eq!(iterations.lines().count(), 5);
    assert_eq!(fs::read_to_string(out.join("gaps.csv")).unwrap().lines().count(), 5);
    assert_eq!(fs::read_to_string(out.join("flows.csv")).unwrap().lines().count(), 1 + 24 * 70);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["solver"]["operator_calls"], 8);
    assert_eq!(summary["config"]["solver"]["seed"], 7);
    assert!(summary["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    let (assigned, total) = (summary["totals"]["assigned_demand"].as_f64().unwrap(), summary["totals"]["total_demand"].as_f64().unwrap());
    assert!((assigned - total).abs() <= 1e-9 * total);
    // wall time appears only in the summary
    assert!(!iterations.contains("time"));
}

#[test]
fn missing_links_file_is_a_parse_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net");
    fs::create_dir(&net).unwrap();
    for f in ["nodes.csv", "od.csv", "paths.csv"] {
        fs::copy(data("nguyen").join(f), net.join(f)).unwrap();
    }
    let cfg = write(dir.path(), "c.json", &base(&net, "fb", 2));
    let o = due(&["run", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("[parse]") && e.contains("links.csv"), "{e}");
}

#[test]
fn cfl_violation_names_the_link() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = base(&data("nguyen"), "fb", 2);
    v["num_intervals"] = 4.into();
    let cfg = write(dir.path(), "c.json", &v);
    let o = due(&["run", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let e = stderr(&o);
    assert!(e.contains("[config]") && e.contains("CFL") && e.contains("on link"), "{e}");
}

#[test]
fn config_mistakes_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = base(&data("nguyen"), "fb", 2);
    v["gama"] = 2.into();
    let o = due(&["run", "-c", write(dir.path(), "typo.json", &v).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("gama"));

    fs::write(dir.path().join("broken.json"), "{\"t1\": ").unwrap();
    let o = due(&["run", "-c", dir.path().join("broken.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("broken.json"));

    let mut v = base(&data("nguyen"), "ifbf", 2);
    v["solver"]["beta"] = "pow(1, -1".into();
    let o = due(&["run", "-c", write(dir.path(), "sched.json", &v).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("column"), "{}", stderr(&o));

    let o = due(&["run", "-c", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_reports_pass_and_fail() {
    let o = due(&["validate", data("nguyen").to_str().unwrap()]);
    assert!(o.status.success());
    let table = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(table.contains("PASS") && !table.contains("FAIL"), "{table}");

    let dir = tempfile::tempdir().unwrap();
    for f in ["nodes.csv", "links.csv", "od.csv", "paths.csv"] {
        fs::copy(data("nguyen").join(f), dir.path().join(f)).unwrap();
    }
    let paths = dir.path().join("paths.csv");
    fs::write(&paths, fs::read_to_string(&paths).unwrap().replace("2,1,2,18,11", "2,1,2,11,18")).unwrap();
    let o = due(&["validate", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let table = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(table.contains("FAIL") && table.contains("paths.csv:3"), "{table}");
}

#[test]
fn compare_aligns_three_methods() {
    let dir = tempfile::tempdir().unwrap();
    let cfgs: Vec<PathBuf> =
        ["fb", "fbf", "ifbf"].iter().map(|a| write(dir.path(), &format!("{a}.json"), &base(&data("nguyen"), a, 3))).collect();
    let out = dir.path().join("cmp");
    let report = cmd_compare(&cfgs, &out, &RunOptions::default()).unwrap();
    assert_eq!(report.runs.len(), 3);
    let energies = fs::read_to_string(out.join("energies.csv")).unwrap();
    let mut lines = energies.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,energy_fb,tau_fb,residual_fb,energy_fbf,tau_fbf,residual_fbf,energy_ifbf,tau_ifbf,residual_ifbf"
    );
    assert_eq!(lines.count(), 3);
    assert_eq!(fs::read_to_string(out.join("gap_summary.csv")).unwrap().lines().count(), 4);
    assert_eq!(fs::read_to_string(out.join("gaps_by_od.csv")).unwrap().lines().next().unwrap(), "od,fb,fbf,ifbf");
    for a in ["fb", "fbf", "ifbf"] {
        assert!(out.join(a).join("summary.json").is_file());
    }
}

#[test]
fn compare_rejects_single_and_mismatched_configs() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", &base(&data("nguyen"), "fb", 2));
    let err = cmd_compare(std::slice::from_ref(&a), dir.path(), &RunOptions::default()).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Config);

    let mut v = base(&data("nguyen"), "ifbf", 2);
    v["num_intervals"] = 80.into();
    let b = write(dir.path(), "b.json", &v);
    let err = cmd_compare(&[a.clone(), b], dir.path(), &RunOptions::default()).unwrap_err();
    assert!(matches!(err, CliError::Config { .. }));
    assert!(err.to_string().contains("80 intervals"), "{err}");

    let mut v = base(&data("sioux_falls"), "fbf", 2);
    v["num_intervals"] = 70.into();
    let c = write(dir.path(), "c.json", &v);
    let err = cmd_compare(&[a.clone(), c], dir.path(), &RunOptions::default()).unwrap_err();
    assert!(err.to_string().contains("network"), "{err}");

    let o = due(&["compare", "-c", a.to_str().unwrap(), "-o", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn presets_parse_and_check() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = due_cli::RunConfig::load(&path).unwrap();
        cfg.check().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(cfg.network_path().join("links.csv").is_file());
        n += 1;
    }
    assert!(n >= 7);
}
