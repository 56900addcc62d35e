//! End-to-end behaviour of the compact-support pipeline.

use gpl::experiments::{run, ExperimentConfig, ExperimentKind, Status};
use gpl::lattice::{build_sampling_set, SamplingSet, SequenceDescriptor};
use gpl::reconstruction::{reconstruct_compact, sample_signal, CompactReconConfig};
use gpl::signal::{random_compact, relative_phase_distance, CompactClassSpec, Profile};

fn set(nx: usize, nw: usize, step: f64) -> SamplingSet {
    build_sampling_set(
        &SequenceDescriptor::affine(1.0, 0.0).unwrap().truncated(nx),
        &SequenceDescriptor::affine(step, 0.0).unwrap().truncated(nw),
        0.0,
        nx,
    )
    .unwrap()
}

#[test]
fn larger_windows_do_not_hurt() {
    let class = CompactClassSpec::new(2.0).unwrap();
    let f = random_compact(&class, 3, Profile::Nonvanishing, class.default_grid());
    let mut prev = f64::INFINITY;
    for (nx, nw) in [(8, 6), (12, 9), (16, 12)] {
        let (u, d) = reconstruct_compact(&sample_signal(&f, &set(nx, nw, 0.25)), &class, &CompactReconConfig::default()).unwrap();
        let dist = relative_phase_distance(&f, &u).unwrap();
        assert!(dist <= prev + 1e-8, "({nx}, {nw}): {dist} after {prev}");
        assert!(d.residual.is_finite());
        prev = dist;
    }
    assert!(prev < 1e-3);
}

#[test]
fn shannon_violation_shows_in_pipeline_residual() {
    let class = CompactClassSpec::new(2.0).unwrap();
    let f = random_compact(&class, 5, Profile::Nonvanishing, class.default_grid());
    let cfg = CompactReconConfig {
        refine: false,
        ..Default::default()
    };
    // Half the Nyquist rate 1/(2c).
    let (_, d) = reconstruct_compact(&sample_signal(&f, &set(16, 6, 0.5)), &class, &cfg).unwrap();
    assert!(d.residual > 1e-3, "{}", d.residual);
}

#[test]
fn rotated_lattice_round_trip() {
    let cfg = ExperimentConfig::from_json(
        r#"{"schema_version":1,"seed":4,"trials":2,
            "class":{"class":"compact","c":2.0},
            "sampling":{"x_seq":{"kind":"affine","a":1.0,"b":0.0,"truncation":16},
                        "w_seq":{"kind":"affine","a":0.25,"b":0.0,"truncation":12},
                        "theta":0.7,"truncation":16},
            "tolerances":{"max_phase_dist":0.05}}"#,
    )
    .unwrap();
    let out = std::env::temp_dir().join(format!("gpl-rotated-{}", std::process::id()));
    let o = run(ExperimentKind::Reconstruct, &cfg, &out).unwrap();
    assert_eq!(o.status, Status::Success, "{}", o.summary);
}
