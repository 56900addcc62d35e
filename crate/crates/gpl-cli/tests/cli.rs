use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use gpl::io::{fmt, read_json, write_csv, write_json, write_samples, SamplesMeta};
use gpl::lattice::{build_sampling_set, SequenceDescriptor};
use gpl::reconstruction::sample_sis;
use gpl::signal::{random_sis, Profile};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn gpl(args: &[&str], threads: Option<&str>) -> (i32, String) {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gpl"));
    c.args(args);
    match threads {
        Some(t) => c.env("GPL_THREADS", t),
        None => c.env_remove("GPL_THREADS"),
    };
    let o = c.output().unwrap();
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr),
    )
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> (i32, String) {
    let mut a = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    a.extend_from_slice(extra);
    gpl(&a, None)
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut m = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                m.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    m
}

#[test]
fn density_report_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, code) in [
        ("compact-nyquist", 0),
        ("sis-dense", 0),
        ("sis-sparse", 2),
        ("compact-coarse-frequency", 2),
        ("sis-rational", 2),
        ("compact-half-line", 0),
    ] {
        let out = tmp.path().join(name);
        let (c, msg) = run("density-report", &configs().join(format!("density/{name}.json")), &out, &[]);
        assert_eq!(c, code, "{name}: {msg}");
        let table = std::fs::read_to_string(out.join("report.txt")).unwrap();
        assert!(table.contains("overall:"));
        let report: serde_json::Value = read_json(&out.join("report.json")).unwrap();
        assert_eq!(report["schema_version"], 1);
    }
}

#[test]
fn invalid_configs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version":1,"seed":0,"unknown":true}"#).unwrap();
    assert_eq!(run("forward-check", &bad, &tmp.path().join("a"), &[]).0, 2);
    std::fs::write(&bad, r#"{"schema_version":1,"seed":0,"class":{"class":"compact","c":0.0}}"#).unwrap();
    assert_eq!(run("forward-check", &bad, &tmp.path().join("b"), &[]).0, 2);
    // A config declared for another experiment.
    assert_eq!(run("reconstruct", &configs().join("forward-check.json"), &tmp.path().join("c"), &[]).0, 2);
    assert_eq!(run("forward-check", &tmp.path().join("missing.json"), &tmp.path().join("d"), &[]).0, 1);
    let (c, _) = gpl(
        &["forward-check", "--config", configs().join("forward-check.json").to_str().unwrap(), "--out", tmp.path().join("e").to_str().unwrap()],
        Some("many"),
    );
    assert_eq!(c, 2);
}

#[test]
fn forward_check_and_probe_succeed() {
    let tmp = tempfile::tempdir().unwrap();
    let (c, msg) = run("forward-check", &configs().join("forward-check.json"), &tmp.path().join("f"), &[]);
    assert_eq!(c, 0, "{msg}");
    let csv = std::fs::read_to_string(tmp.path().join("f/checks.csv")).unwrap();
    assert!(csv.starts_with("check,max_error,tolerance,pass\n"));
    assert_eq!(csv.matches(",true\n").count(), 7);
    let (c, msg) = run("uniqueness-probe", &configs().join("uniqueness-probe.json"), &tmp.path().join("p"), &["--trials", "10"]);
    assert_eq!(c, 0, "{msg}");
    assert_eq!(std::fs::read_to_string(tmp.path().join("p/pairs.csv")).unwrap().lines().count(), 11);
}

#[test]
fn reconstruct_is_byte_identical_across_runs_and_thread_caps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("reconstruct-sis.json");
    let dirs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (d, t) in dirs.iter().zip([None, Some("1"), Some("3")]) {
        let a = ["reconstruct", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--trials", "6"];
        let (c, msg) = gpl(&a, t);
        assert_eq!(c, 0, "{msg}");
    }
    let first = tree(&dirs[0]);
    assert!(first.contains_key(Path::new("trials.csv")));
    assert!(first.contains_key(Path::new("signals/trial_0005.csv")));
    for d in &dirs[1..] {
        assert!(tree(d) == first, "outputs differ in {}", d.display());
    }
}

#[test]
fn seed_override_changes_truths() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("reconstruct-sis.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("reconstruct", &cfg, &a, &["--trials", "2"]).0, 0);
    assert_eq!(run("reconstruct", &cfg, &b, &["--trials", "2", "--seed", "99"]).0, 0);
    let s: serde_json::Value = read_json(&b.join("summary.json")).unwrap();
    assert_eq!(s["seed"], 99);
    assert_ne!(
        std::fs::read(a.join("signals/trial_0000.csv")).unwrap(),
        std::fs::read(b.join("signals/trial_0000.csv")).unwrap()
    );
}

#[test]
fn unmet_tolerance_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = read_json(&configs().join("reconstruct-sis.json")).unwrap();
    v["tolerances"]["median_phase_dist"] = 0.0.into();
    let cfg = tmp.path().join("strict.json");
    write_json(&cfg, &v).unwrap();
    let (c, msg) = run("reconstruct", &cfg, &tmp.path().join("o"), &["--trials", "2"]);
    assert_eq!(c, 3, "{msg}");
}

#[test]
fn reconstructs_modulus_samples_from_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let beta = std::f64::consts::SQRT_2;
    let spec = random_sis(beta, -2, 5, 3, Profile::Smooth).unwrap();
    let set = build_sampling_set(
        &SequenceDescriptor::affine(beta / 2.5, 0.0).unwrap().truncated(12),
        &SequenceDescriptor::affine(1.0, 0.0).unwrap().truncated(4),
        0.0,
        12,
    )
    .unwrap();
    let s = sample_sis(&spec, &set).unwrap();
    write_samples(tmp.path(), "sq", &s, 12, serde_json::json!({"beta": beta})).unwrap();
    // Same samples stored as moduli.
    let mut meta: SamplesMeta = read_json(&tmp.path().join("sq.json")).unwrap();
    meta.quantity = gpl::io::Quantity::Modulus;
    meta.csv = "mod.csv".into();
    write_json(&tmp.path().join("mod.json"), &meta).unwrap();
    write_csv(
        &tmp.path().join("mod.csv"),
        &["x", "omega", "value"],
        set.points.iter().zip(&s.values).map(|((x, w), v)| vec![fmt(*x), fmt(*w), fmt(v.sqrt())]),
    )
    .unwrap();

    let mut outs = Vec::new();
    for stem in ["sq", "mod"] {
        let cfg = tmp.path().join(format!("{stem}-cfg.json"));
        std::fs::write(
            &cfg,
            format!(
                r#"{{"schema_version":1,"seed":0,
                    "class":{{"class":"shift_invariant","beta":{{"value":{beta},"tag":"irrational","symbol":"sqrt2"}}}},
                    "truth":{{"k_min":-2,"len":5}},
                    "input":{{"samples":"{stem}.json"}}}}"#
            ),
        )
        .unwrap();
        let out = tmp.path().join(format!("out-{stem}"));
        let (c, msg) = run("reconstruct", &cfg, &out, &[]);
        assert_eq!(c, 0, "{msg}");
        let d: serde_json::Value = read_json(&out.join("diagnostics/trial_0000.json")).unwrap();
        assert!(d["residual"].as_f64().unwrap() < 1e-8, "{d}");
        outs.push(out);
    }
    assert!(outs[0].join("signals/trial_0000.csv").exists());
}
