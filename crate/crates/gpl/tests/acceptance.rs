//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p gpl --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use gpl::experiments::{run, CheckResult, ExperimentConfig, ExperimentKind, Status};
use gpl::lattice::{build_sampling_set, validate_uniqueness_config, SequenceDescriptor, Verdict};
use gpl::reconstruction::{
    reconstruct_compact, reconstruct_sis, reconstruct_sis_fourier, sample_signal, sample_sis, synthesize_fourier_dual,
    CompactReconConfig, SisReconConfig,
};
use gpl::signal::{random_compact, random_sis, CompactClassSpec, Grid, Profile, SisSpec};
use gpl::C64;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("gpl-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn forward(checks: &[&str]) -> (bool, String, Duration) {
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{"schema_version":1,"seed":2024,"forward":{{"checks":{}}}}}"#,
        serde_json::to_string(checks).unwrap()
    ))
    .unwrap();
    let t = Instant::now();
    let o = run(ExperimentKind::ForwardCheck, &cfg, &scratch(checks[0])).unwrap();
    let el = t.elapsed();
    let results: Vec<CheckResult> = serde_json::from_value(o.summary["checks"].clone()).unwrap();
    let detail = results
        .iter()
        .map(|r| format!("{} {:.2e} < {:.0e}", r.check.name(), r.max_error, r.tolerance))
        .collect::<Vec<_>>()
        .join(", ");
    (o.status == Status::Success, detail, el)
}

fn reconstruct(config: &str, out: &Path) -> (gpl::experiments::RunOutcome, Duration) {
    let cfg = ExperimentConfig::load(&configs().join(config)).unwrap();
    let t = Instant::now();
    let o = run(ExperimentKind::Reconstruct, &cfg, out).unwrap();
    (o, t.elapsed())
}

fn c1() -> (bool, String) {
    let (ok, d, el) = forward(&["sis_spectrogram"]);
    (ok && el < Duration::from_secs(30), format!("{d}, {el:.1?}"))
}

fn c2() -> (bool, String) {
    let (ok, d, _) = forward(&["gabor_closed_form", "frft_fixed_point"]);
    (ok, d)
}

fn c3() -> (bool, String) {
    let (ok, d, _) = forward(&["frft_group_law", "ambiguity_rotation"]);
    (ok, d)
}

fn c4() -> (bool, String) {
    let (ok, d, _) = forward(&["band_limit"]);
    (ok, d)
}

fn c5() -> (bool, String) {
    let (ok, d, _) = forward(&["periodicity"]);
    (ok, d)
}

fn batch_detail(o: &gpl::experiments::RunOutcome, el: Duration) -> String {
    format!(
        "median {}, max {}, max rank-1 gap {}, errors {}, {el:.1?}",
        o.summary["median_phase_dist"], o.summary["max_phase_dist"], o.summary["max_rank1_gap"], o.summary["errors"]
    )
}

fn c6() -> (bool, String) {
    let (o, el) = reconstruct("reconstruct-compact.json", &scratch("c6"));
    let ok = o.status == Status::Success && o.summary["trials"] == 20 && el < Duration::from_secs(300);
    (ok, batch_detail(&o, el))
}

fn c7() -> (bool, String) {
    let (o, el) = reconstruct("reconstruct-sis.json", &scratch("c7"));
    let ok = o.status == Status::Success && o.summary["trials"] == 20 && el < Duration::from_secs(120);
    (ok, batch_detail(&o, el))
}

const ALPHAS: [f64; 3] = [0.1, PI / 3.0, 3.0];

fn c8() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    let aff = |a: f64, n: usize| SequenceDescriptor::affine(a, 0.0).unwrap().truncated(n);

    let class = CompactClassSpec::new(1.0).unwrap();
    let set = build_sampling_set(&aff(1.0, 6), &aff(0.5, 6), 0.0, 6).unwrap();
    let f = random_compact(&class, 8, Profile::Nonvanishing, class.default_grid());
    let cfg = CompactReconConfig::default();
    let base = sample_signal(&f, &set);
    let rec = reconstruct_compact(&base, &class, &cfg).unwrap();
    for a in ALPHAS {
        let s = sample_signal(&f.scale(C64::from_polar(1.0, a)), &set);
        let same = s.values == base.values && reconstruct_compact(&s, &class, &cfg).unwrap() == rec;
        ok &= same;
        if !same {
            notes.push(format!("compact differs at {a}"));
        }
    }

    let beta = SQRT_2;
    let set = build_sampling_set(&aff(beta / 2.5, 16), &aff(1.0, 4), 0.0, 16).unwrap();
    let spec = random_sis(beta, -3, 7, 8, Profile::Smooth).unwrap();
    let scfg = SisReconConfig::default();
    let base = sample_sis(&spec, &set).unwrap();
    let rec = reconstruct_sis(&base, beta, (-3, 3), &scfg).unwrap();
    for a in ALPHAS {
        let s = sample_sis(&spec.scaled(C64::from_polar(1.0, a)), &set).unwrap();
        let same = s.values == base.values && reconstruct_sis(&s, beta, (-3, 3), &scfg).unwrap() == rec;
        ok &= same;
        if !same {
            notes.push(format!("shift-invariant differs at {a}"));
        }
    }

    let d = SisSpec::new(beta, -1, vec![C64::new(0.4, 0.2), C64::new(1.0, 0.0), C64::new(-0.3, 0.5)]).unwrap();
    let f = synthesize_fourier_dual(&d, Grid::symmetric(6.0, 1.0 / 64.0).unwrap());
    let set = build_sampling_set(&aff(1.0, 4), &aff(beta / 2.5, 12), 0.0, 4).unwrap();
    let base = sample_signal(&f, &set);
    let rec = reconstruct_sis_fourier(&base, beta, (-1, 1), &scfg).unwrap();
    for a in ALPHAS {
        let s = sample_signal(&f.scale(C64::from_polar(1.0, a)), &set);
        let same = s.values == base.values && reconstruct_sis_fourier(&s, beta, (-1, 1), &scfg).unwrap() == rec;
        ok &= same;
        if !same {
            notes.push(format!("Fourier-dual differs at {a}"));
        }
    }
    let detail = if notes.is_empty() {
        "compact, shift-invariant and Fourier-dual pipelines identical for all alphas".into()
    } else {
        notes.join("; ")
    };
    (ok, detail)
}

fn c9() -> (bool, String) {
    use Verdict::{Fail, Pass};
    let expected: [(&str, [Verdict; 2]); 6] = [
        ("compact-nyquist", [Pass, Pass]),
        ("sis-dense", [Pass, Pass]),
        ("sis-sparse", [Fail, Pass]),
        ("compact-coarse-frequency", [Pass, Fail]),
        ("sis-rational", [Pass, Fail]),
        ("compact-half-line", [Pass, Pass]),
    ];
    let mut bad = Vec::new();
    for (name, want) in expected {
        let cfg = ExperimentConfig::load(&configs().join(format!("density/{name}.json"))).unwrap();
        let set = cfg.sampling.as_ref().unwrap().build().unwrap();
        let got: Vec<Verdict> = validate_uniqueness_config(cfg.class.as_ref().unwrap(), &set)
            .checks
            .iter()
            .map(|c| c.verdict)
            .collect();
        if got != want {
            bad.push(format!("{name}: got {got:?}, want {want:?}"));
        }
    }
    let detail = if bad.is_empty() { "6 of 6 configurations match".into() } else { bad.join("; ") };
    (bad.is_empty(), detail)
}

fn read_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
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

fn c10() -> (bool, String) {
    let mut cfg = ExperimentConfig::load(&configs().join("reconstruct-compact.json")).unwrap();
    cfg.trials = 3;
    let (a, b) = (scratch("c10a"), scratch("c10b"));
    run(ExperimentKind::Reconstruct, &cfg, &a).unwrap();
    run(ExperimentKind::Reconstruct, &cfg, &b).unwrap();
    let sis = ExperimentConfig::load(&configs().join("reconstruct-sis.json")).unwrap();
    run(ExperimentKind::Reconstruct, &sis, &a.join("sis")).unwrap();
    run(ExperimentKind::Reconstruct, &sis, &b.join("sis")).unwrap();
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    let same = ta == tb && !ta.is_empty();
    (same, format!("{} files compared", ta.len()))
}

type Criterion = fn() -> (bool, String);

fn main() {
    let criteria: [(u32, Criterion); 10] = [
        (1, c1),
        (2, c2),
        (3, c3),
        (4, c4),
        (5, c5),
        (6, c6),
        (7, c7),
        (8, c8),
        (9, c9),
        (10, c10),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let (ok, detail) = f();
        println!("criterion {n}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
