use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bicomb::PropertyReport;
use bicomb_cli::run::{validate_manifest, RunManifest};

fn bicomb(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bicomb"));
    cmd.args(args).env_remove("BICOMB_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn euclidean_axioms_pass_with_one_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[run]\nspaces = [\"euclidean\"]\nchecks = [\"axioms\"]\noutput = \"out\"\n[check.axioms]\nn = 200\n",
    );
    let out = bicomb(&["verify", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("out");
    let rep: PropertyReport =
        serde_json::from_str(&fs::read_to_string(dir.join("euclidean__axioms.json")).unwrap()).unwrap();
    assert!(rep.passed && rep.n == 200);
    let m = validate_manifest(&dir).unwrap();
    assert_eq!(m.reports.len(), 1);
}

#[test]
fn negative_control_exits_one_with_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg =
        write(tmp.path(), "c.toml", "[run]\nspaces = [\"broken\"]\nchecks = [\"axioms\"]\n[check.axioms]\nn = 100\n");
    let out = bicomb(&["verify", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
    let rep: PropertyReport =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/broken__axioms.json")).unwrap()).unwrap();
    assert!(!rep.passed);
    assert!(rep.witness.get("x").is_some());
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown_space = write(tmp.path(), "a.toml", "[run]\nspaces = [\"mars\"]\n");
    let unknown_check = write(tmp.path(), "b.toml", "[run]\nspaces = [\"h2\"]\nchecks = [\"vibes\"]\n");
    let broken_toml = write(tmp.path(), "c.toml", "[run\n");
    for cfg in [unknown_space, unknown_check, broken_toml] {
        assert_eq!(bicomb(&["verify", &cfg], &[("BICOMB_OUT", tmp.path())]).status.code(), Some(2));
    }
    assert_eq!(bicomb(&["verify", "/nonexistent.toml"], &[]).status.code(), Some(2));
    assert_eq!(bicomb(&["frobnicate"], &[]).status.code(), Some(2));
}

#[test]
fn output_directory_comes_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[run]\nspaces = [\"h2\"]\nchecks = [\"g_profile\"]\n");
    let env_out = tmp.path().join("env-out");
    let out = bicomb(&["verify", &cfg], &[("BICOMB_OUT", &env_out)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(env_out.join("h2__g_profile.json").exists());
    assert!(env_out.join("summary.csv").exists());
}

#[test]
fn manifest_reruns_reproduce_the_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[run]\nspaces = [\"h2\", \"tree\"]\nchecks = [\"a_convex\", \"four_point\"]\n[check.a_convex]\nn = 300\nseed = 9\n",
    );
    let first = tmp.path().join("first");
    assert_eq!(bicomb(&["verify", &cfg, "--out", first.to_str().unwrap()], &[]).status.code(), Some(0));
    let second = tmp.path().join("second");
    let manifest = first.join("manifest.json");
    let out = bicomb(&["verify", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(first.join("summary.csv")).unwrap(), fs::read(second.join("summary.csv")).unwrap());
    let m1: RunManifest = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    let m2 = validate_manifest(&second).unwrap();
    assert_eq!(m1.config_sha256, m2.config_sha256);
    // Tampering with a report breaks validation.
    fs::write(second.join("h2__a_convex.json"), "{}").unwrap();
    assert!(validate_manifest(&second).is_err());
}

#[test]
fn summary_is_identical_across_parallelism() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "spaces = [\"h2\", \"sl2r-model\"]\nchecks = [\"axioms\", \"a_convex\", \"shadow\"]\n[check.axioms]\nn = 400\n[check.a_convex]\nn = 400\n[check.shadow]\nn = 20\n";
    let mut csv = Vec::new();
    for p in [1, 4] {
        let cfg = write(tmp.path(), &format!("p{p}.toml"), &format!("[run]\nparallelism = {p}\n{body}"));
        let dir = tmp.path().join(format!("o{p}"));
        assert_eq!(bicomb(&["verify", &cfg, "--out", dir.to_str().unwrap()], &[]).status.code(), Some(0));
        csv.push(fs::read(dir.join("summary.csv")).unwrap());
    }
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn tightspan_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ts");
    let path3 = write(tmp.path(), "p3.txt", "0 1\n1 2\n");
    let o = bicomb(&["tightspan", &path3, "--samples", "30", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("tightspan.json")).unwrap()).unwrap();
    assert_eq!(summary["delta"], 0.0);
    assert!(summary["tree"].is_object());
    assert_eq!(fs::read_to_string(out.join("metric.csv")).unwrap(), "0,1,2\n1,0,1\n2,1,0\n");

    let cycle = write(tmp.path(), "c4.txt", "# unit square\n0 1\n1 2\n2 3\n3 0\n");
    let o = bicomb(&["tightspan", &cycle, "--seed", "3", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("delta=1 "));

    let empty = write(tmp.path(), "empty.txt", "");
    assert_eq!(bicomb(&["tightspan", &empty], &[("BICOMB_OUT", &out)]).status.code(), Some(2));
    let split = write(tmp.path(), "split.txt", "0 1\n2 3\n");
    assert_eq!(bicomb(&["tightspan", &split], &[("BICOMB_OUT", &out)]).status.code(), Some(2));
    let garbage = write(tmp.path(), "bad.txt", "0 one\n");
    assert_eq!(bicomb(&["tightspan", &garbage], &[("BICOMB_OUT", &out)]).status.code(), Some(2));
}

#[test]
fn plot_emits_one_curve_per_shadow_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[run]\nspaces = [\"h2\"]\nchecks = [\"shadow\", \"constants_sweep\"]\n[check.shadow]\nn = 10\n",
    );
    let reports = tmp.path().join("r");
    assert_eq!(bicomb(&["verify", &cfg, "--out", reports.to_str().unwrap()], &[]).status.code(), Some(0));
    let shadow = reports.join("h2__shadow.json");
    let sweep = reports.join("h2__constants_sweep.json");
    let rep: PropertyReport = serde_json::from_str(&fs::read_to_string(&shadow).unwrap()).unwrap();
    let plots = tmp.path().join("plots");
    let o = bicomb(&["plot", shadow.to_str().unwrap(), sweep.to_str().unwrap(), "--out", plots.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let curves = fs::read_dir(&plots)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_str().unwrap().starts_with("h2__shadow__curve_"))
        .count();
    assert_eq!(curves, rep.series.len());
    assert!(curves > 0);
    assert!(plots.join("h2__constants_sweep__constants.svg").exists());
    // The sweep's T curve grows as delta shrinks.
    let sweep_rep: PropertyReport = serde_json::from_str(&fs::read_to_string(&sweep).unwrap()).unwrap();
    let t = sweep_rep.series.iter().find(|s| s.label == "T").unwrap();
    assert!(t.points.windows(2).all(|w| w[0].0 > w[1].0 && w[0].1 < w[1].1));

    assert_eq!(bicomb(&["plot", "--out", plots.to_str().unwrap()], &[]).status.code(), Some(2));
    let bad = write(tmp.path(), "bad.json", "{\"check\": 3}");
    assert_eq!(bicomb(&["plot", &bad, "--out", plots.to_str().unwrap()], &[]).status.code(), Some(2));
}
