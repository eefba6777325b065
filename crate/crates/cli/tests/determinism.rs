//! Two runs of the same configuration must agree byte-for-byte once the
//! timing block is stripped.

use cupflow_cli::{report_without_timings, run_pipeline, RunConfig};

const CONFIG: &str = r#"
m = 1
n = 1
k = 3
eps = 0.05
seed = 42
s_steps = 2
radius = 6.0

[certificate]
samples = 200
smallness_grid = 16

[multistart]
starts = 8
perturbation = 0.05

[tolerances]
solver = 1e-10
solver_iters = 80
cluster_radius = 1e-3

[audit]
shell_samples = 12
interior_samples = 20
rest_starts = 2
tail_samples = 6

[[hamiltonian.terms]]
amplitude = 0.06
freq_x = [1, 0]
form = [
  [1.0, 0.0, 0.0, 0.0],
  [0.0, 1.0, 0.0, 0.0],
  [0.0, 0.0, 0.8, 0.0],
  [0.0, 0.0, 0.0, 0.8],
]

[[hamiltonian.terms]]
amplitude = 0.04
freq_x = [0, 1]
form = [
  [1.0, 0.0, 0.0, 0.0],
  [0.0, 1.0, 0.0, 0.0],
  [0.0, 0.0, 0.8, 0.0],
  [0.0, 0.0, 0.0, 0.8],
]
"#;

#[test]
fn identical_seeds_give_identical_reports() {
    let run = || {
        let cfg = RunConfig::from_toml(CONFIG).unwrap();
        let report = run_pipeline(cfg).unwrap();
        report_without_timings(&report).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
    assert!(first.contains("\"schema_version\": 1"));
}

#[test]
fn report_lands_at_the_configured_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut cfg = RunConfig::from_toml(CONFIG).unwrap();
    cfg.output = Some(out.clone());
    run_pipeline(cfg).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["seed"], 42);
    assert!(value["timings"]["seconds"].is_object());
}

#[test]
fn bad_configs_are_rejected() {
    assert!(RunConfig::from_toml("m = 1\nn = 1\nk = 1\n").is_err());
    assert!(RunConfig::from_toml("m = 1\nn = 1\nk = 3\neps = 0.3\n").is_err());
    assert!(RunConfig::from_toml("m = 0\nn = 1\nk = 3\n").is_err());
    assert!(RunConfig::from_toml("m = 1\nn = 1\nk = 3\nunknown_knob = 2\n").is_err());
}

#[test]
fn radius_accepts_auto_and_fixed() {
    let auto = RunConfig::from_toml("m = 1\nn = 1\nk = 3\nradius = \"auto\"\n").unwrap();
    assert!(matches!(
        auto.radius,
        cupflow_cli::RadiusConfig::Auto(_)
    ));
    let fixed = RunConfig::from_toml("m = 1\nn = 1\nk = 3\nradius = 5.5\n").unwrap();
    match fixed.radius {
        cupflow_cli::RadiusConfig::Fixed(r) => assert_eq!(r, 5.5),
        _ => panic!("expected a fixed radius"),
    }
}
