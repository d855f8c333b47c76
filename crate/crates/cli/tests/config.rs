//! Configuration parsing and validation.

use loopeq_cli::config::apply_override;
use loopeq_cli::{run, CliError, Command, ExperimentConfig};

#[test]
fn defaults_round_trip() {
    let cfg = ExperimentConfig::from_json("{}", &[]).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ExperimentConfig::from_json(&text, &[]).unwrap(), cfg);
}

#[test]
fn partial_sections_keep_other_defaults() {
    let cfg = ExperimentConfig::from_json(r#"{"params": {"b": 3}, "sampling": {"seed": 4}}"#, &[]).unwrap();
    assert_eq!(cfg.params.b, 3);
    assert_eq!(cfg.params.n, 1);
    assert_eq!(cfg.sampling.seed, 4);
    assert_eq!(cfg.sampling.samples, ExperimentConfig::default().sampling.samples);
}

#[test]
fn overrides_apply_after_the_file() {
    let cfg = ExperimentConfig::from_json(
        r#"{"model": "truncated"}"#,
        &["model=modified".into(), "solve.mode=certified".into(), "bad=[{\"corner\":[0,0],\"axes\":[0,1]}]".into()],
    )
    .unwrap();
    assert_eq!(cfg.model, loopeq::engine::Model::Modified);
    assert_eq!(cfg.solve.mode, loopeq::engine::SolveMode::Certified);
    assert_eq!(cfg.bad_set(&cfg.lattice().unwrap()).unwrap().len(), 1);
}

#[test]
fn invalid_values_are_rejected_before_running() {
    let cases = [
        r#"{"lattice": {"l": 0, "d": 2}}"#,
        r#"{"lattice": {"l": 2, "d": 3}}"#,
        r#"{"loop": {"corner": [2, 2], "axes": [0, 1], "r": 1, "s": 1}}"#,
        r#"{"loop": {"corner": [0, 0], "axes": [1, 1], "r": 1, "s": 1}}"#,
        r#"{"params": {"n": 0}}"#,
        r#"{"norm": {"lambda": 2.0, "gamma": 1.0, "rho": 0.5}}"#,
        r#"{"sampling": {"samples": 5}}"#,
        r#"{"lemmas": {"cases": 0}}"#,
        r#"{"model": "other"}"#,
        r#"{"unknown": true}"#,
        r#"[1, 2]"#,
    ];
    for c in cases {
        assert!(matches!(ExperimentConfig::from_json(c, &[]), Err(CliError::Config(_))), "{c}");
    }
    let mut cfg = ExperimentConfig::default();
    cfg.params.n = 0;
    assert!(matches!(run(Command::Area, &cfg), Err(CliError::Config(_))));
}

#[test]
fn override_syntax() {
    let mut v = serde_json::json!({});
    apply_override(&mut v, "a.b=3").unwrap();
    apply_override(&mut v, "a.c=text").unwrap();
    assert_eq!(v, serde_json::json!({"a": {"b": 3, "c": "text"}}));
    assert!(apply_override(&mut v, "novalue").is_err());
    assert!(apply_override(&mut v, "a..b=1").is_err());
    assert!(apply_override(&mut v, "a.b.c=1").is_err());
}

#[test]
fn exit_codes_are_distinct() {
    use loopeq_cli::exit;
    let codes = [
        exit::OK,
        exit::ASSERTION,
        CliError::Config(String::new()).exit_code(),
        CliError::Capacity(String::new()).exit_code(),
        CliError::Runtime(String::new()).exit_code(),
    ];
    let mut sorted = codes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), codes.len());
    assert_eq!(CliError::from(loopeq::Error::Capacity("x".into())).exit_code(), exit::CAPACITY);
}
