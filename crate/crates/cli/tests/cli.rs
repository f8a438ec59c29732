use std::path::Path;
use std::process::{Command, Output};

use ptlab_cli::descriptor::{Descriptor, RegularityInput};
use ptlab_cli::{load_descriptor, parse_descriptor, save_descriptor, DescriptorError};
use ptlab_core::fixtures;
use ptlab_core::logreg::{build_tower, quadric_preset, unramified_rlr, BaseElem, BaseRing};
use ptlab_core::monoid::{quadric, MonoidDescriptor};
use ptlab_core::series::Cutoff;
use ptlab_core::tower::TowerDesc;
use serde_json::Value;

fn ptlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptlab")).args(args).env_remove("PTLAB_THREADS").output().expect("runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn exit_codes() {
    let ok = ptlab(&["tower", "verify", "--preset", "quadric"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&ok)["pass"], Value::Bool(true));
    let fail = ptlab(&["tower", "verify", "--preset", "sabotage_d"]);
    assert_eq!(fail.status.code(), Some(1));
    assert_eq!(report(&fail)["failing"], serde_json::json!(["d"]));
    for bad in [
        vec!["tower", "verify", "--preset", "nonexistent"],
        vec!["tower", "verify", "--preset", "quadric", "--p", "4"],
        vec!["tower", "verify", "--preset", "quadric", "--cutoff", "0"],
        vec!["tower", "verify", "--preset", "quadric", "--cutoff", "x/2"],
        vec!["tower", "verify"],
        vec!["monoid", "check", "/nonexistent/monoid.json"],
        vec!["tower", "frobnicate"],
    ] {
        let out = ptlab(&bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(out.stdout.is_empty(), "{bad:?}");
    }
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_ptlab"))
        .args(["tower", "build", "--preset", "quadric"])
        .env("PTLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PTLAB_THREADS"));
}

#[test]
fn empty_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "empty.json", "");
    let err = load_descriptor::<MonoidDescriptor>(Path::new(&path)).unwrap_err();
    assert!(matches!(err, DescriptorError::ParseError { line: 1, .. }), "{err:?}");
    let out = ptlab(&["monoid", "check", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn parse_errors_carry_line_and_field() {
    let text = "{\n  \"ambient_rank\": 2,\n  \"scale_base\": 2,\n  \"level\": 0,\n  \"generators\": [[1, 0], [0, \"x\"]]\n}\n";
    match parse_descriptor::<MonoidDescriptor>(text).unwrap_err() {
        DescriptorError::ParseError { line, field, .. } => {
            assert_eq!(line, 5);
            assert_eq!(field, "generators[1][1]");
        }
        other => panic!("{other:?}"),
    }
    let trailing = "{\"ambient_rank\": 1, \"scale_base\": 2, \"level\": 0, \"generators\": [[1]]} extra";
    assert!(matches!(parse_descriptor::<MonoidDescriptor>(trailing), Err(DescriptorError::ParseError { .. })));
}

#[test]
fn wrong_generator_length_is_an_invariant_violation() {
    let text = r#"{"ambient_rank": 2, "scale_base": 2, "level": 0, "generators": [[1, 0], [0, 1, 1]]}"#;
    match parse_descriptor::<MonoidDescriptor>(text).unwrap_err() {
        DescriptorError::InvariantViolation { field, .. } => assert_eq!(field, "generators[1]"),
        other => panic!("{other:?}"),
    }
    let mut pres = quadric_preset(2);
    pres.f[0].exponent.push(0);
    let text = serde_json::to_string(&pres).unwrap();
    match parse_descriptor::<ptlab_core::logreg::LogRegPresentation>(&text).unwrap_err() {
        DescriptorError::InvariantViolation { field, .. } => assert_eq!(field, "f[0].exponent"),
        other => panic!("{other:?}"),
    }
    let mut tower = fixtures::perfect_principal(2);
    tower.transitions[1] = vec![vec![2, 0]];
    match parse_descriptor::<TowerDesc>(&serde_json::to_string(&tower).unwrap()).unwrap_err() {
        DescriptorError::InvariantViolation { field, .. } => assert_eq!(field, "transitions[1]"),
        other => panic!("{other:?}"),
    }
}

fn round_trip<D: Descriptor + PartialEq + std::fmt::Debug>(d: &D) {
    let text = save_descriptor(d);
    assert!(text.ends_with('\n'));
    let (back, _) = parse_descriptor::<D>(&text).unwrap();
    assert_eq!(&back, d);
    assert_eq!(save_descriptor(&back), text);
}

#[test]
fn descriptors_round_trip() {
    round_trip(&quadric(3).descriptor());
    round_trip(&MonoidDescriptor { ambient_rank: 1, scale_base: 2, level: 0, generators: vec![vec![2], vec![3]] });
    round_trip(&quadric_preset(2));
    round_trip(&unramified_rlr(3, 3));
    round_trip(&build_tower(&quadric_preset(2), 2, &Cutoff::new(7, 2), 3).unwrap());
    round_trip(&fixtures::nondomain_torsion(3));
    for ax in fixtures::SABOTAGE_AXIOMS {
        round_trip(&fixtures::sabotaged(ax).unwrap());
    }
    round_trip(&RegularityInput {
        base: BaseRing::zp(2, 1),
        elements: vec![BaseElem { terms: vec![(vec![], 2), (vec![2], 1)] }],
        exponents: vec![3],
    });
}

#[test]
fn tower_files_and_presentation_files() {
    let dir = tempfile::tempdir().unwrap();
    let pres = write(dir.path(), "pres.json", &save_descriptor(&quadric_preset(2)));
    let by_file = ptlab(&["tower", "verify", &pres]);
    let by_preset = ptlab(&["tower", "verify", "--preset", "quadric"]);
    assert_eq!(by_file.stdout, by_preset.stdout);
    let built = ptlab(&["tower", "build", &pres]);
    assert_eq!(built.status.code(), Some(0));
    let tower = write(dir.path(), "tower.json", std::str::from_utf8(&built.stdout).unwrap());
    let from_tower = ptlab(&["tower", "verify", &tower]);
    assert_eq!(from_tower.stdout, by_preset.stdout);
    let both = ptlab(&["tower", "verify", &pres, "--preset", "quadric"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn output_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = ptlab(&["tower", "tilt", "--preset", "unramified_rlr", "-o", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.ends_with("}\n"));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["matches"], Value::Bool(true));
}

#[test]
fn monoid_commands() {
    let dir = tempfile::tempdir().unwrap();
    let numerical = write(
        dir.path(),
        "n23.json",
        r#"{"ambient_rank": 1, "scale_base": 2, "level": 0, "generators": [[2], [3]]}"#,
    );
    let v = report(&ptlab(&["monoid", "check", &numerical]));
    assert_eq!(v["saturated"], Value::Bool(false));
    assert_eq!(v["hilbert_basis"], serde_json::json!([[1]]));
    let quad = write(dir.path(), "quadric.json", &save_descriptor(&quadric(2).descriptor()));
    let cg = report(&ptlab(&["monoid", "classgroup", &quad]));
    assert_eq!(cg["class_group"]["display"], Value::String("Z".into()));
    assert_eq!(cg["prime_to_p"]["finite"], Value::Bool(true));
    let div = report(&ptlab(&["monoid", "divide", &quad, "--i", "1"]));
    assert_eq!(div["layer_quotient_order"], Value::String("8".into()));
    assert_eq!(div["exact_in_next_layer"], Value::Bool(true));
    let emb = report(&ptlab(&["monoid", "embed", &quad]));
    assert_eq!(emb["facet_count"], serde_json::json!(4));
}

#[test]
fn regularity_commands() {
    let dir = tempfile::tempdir().unwrap();
    let input = RegularityInput {
        base: BaseRing::zp(2, 1),
        elements: vec![BaseElem::constant(4)],
        exponents: vec![2],
    };
    let path = write(dir.path(), "k.json", &save_descriptor(&input));
    let v = report(&ptlab(&["regularity", "kummer", &path]));
    assert_eq!(v["regular"], Value::Bool(false));
    let omega = report(&ptlab(&["regularity", "omega", "--base", "fp", "--d", "3"]));
    assert_eq!(omega["dimension"], serde_json::json!(3));
    let bad = RegularityInput { exponents: vec![1], ..input };
    let path = write(dir.path(), "bad.json", &save_descriptor(&bad));
    let out = ptlab(&["regularity", "kummer", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exponents[0]"));
}
