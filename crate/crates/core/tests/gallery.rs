use std::path::PathBuf;

use perispec::gallery::{build_scenario, list, run_scenario, Overrides};
use perispec::verdicts::EngineOptions;
use serde_json::Value;

fn golden(file: &str) -> Value {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", file].iter().collect();
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn check_against_golden(file: &str, name: &str, overrides: &Overrides) {
    let expected = golden(file);
    let scenario = build_scenario(name, overrides).unwrap();
    let run = run_scenario(&scenario, &EngineOptions::default()).unwrap();

    assert_eq!(serde_json::to_value(&run.params).unwrap(), expected["params"]);
    let golden_assertions = expected["assertions"].as_array().unwrap();
    assert_eq!(run.assertions.len(), golden_assertions.len(), "{name}: assertion count");
    for (got, want) in run.assertions.iter().zip(golden_assertions) {
        assert_eq!(got.name, want["name"].as_str().unwrap());
        match (got.tolerance, want["tolerance"].as_f64()) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-15 * b, "{name}/{}: tolerance", got.name),
            (a, b) => assert_eq!(a, b, "{name}/{}: tolerance", got.name),
        }
        assert!(got.passed, "{name}/{} failed, measured {}", got.name, got.measured);
    }
    let spr = expected["spectral_radius"].as_f64().unwrap();
    assert!((run.report.spr - spr).abs() <= 1e-8, "{name}: spr {} vs {spr}", run.report.spr);
    assert!(run.report.violations().is_empty());
    assert!(run.passed);
}

#[test]
fn every_scenario_has_a_golden_file() {
    for name in list() {
        let g = golden(&format!("{name}.json"));
        assert_eq!(g["name"], name);
    }
}

#[test]
fn weakly_expanding() {
    check_against_golden("weakly_expanding.json", "weakly_expanding", &Overrides::new());
}

#[test]
fn nagler() {
    check_against_golden("nagler.json", "nagler", &Overrides::new());
}

#[test]
fn diagonal_strip() {
    check_against_golden("diagonal_strip.json", "diagonal_strip", &Overrides::new());
}

#[test]
fn sequence_positive_diagonal() {
    check_against_golden("sequence_positive_diagonal.json", "sequence_positive_diagonal", &Overrides::new());
}

#[test]
fn irreducible_one_diagonal() {
    check_against_golden("irreducible_one_diagonal.json", "irreducible_one_diagonal", &Overrides::new());
}

#[test]
fn partition_with_overlap() {
    check_against_golden("partition.json", "partition", &Overrides::new());
}

#[test]
fn partition_cyclic() {
    let overrides: Overrides = [("overlap".to_string(), 0.0)].into_iter().collect();
    check_against_golden("partition_cyclic.json", "partition", &overrides);
}

#[test]
fn nagler_seeds_all_pass() {
    for seed in 0..25 {
        for (d, terms) in [(3, 1), (5, 2), (8, 4), (10, 6)] {
            let overrides: Overrides = [("seed", seed as f64), ("d", d as f64), ("terms", terms as f64)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            let s = build_scenario("nagler", &overrides).unwrap();
            let run = run_scenario(&s, &EngineOptions::default()).unwrap();
            for a in &run.assertions {
                assert!(a.passed, "seed {seed}, d {d}: {} measured {}", a.name, a.measured);
            }
        }
    }
}

#[test]
fn scenarios_are_deterministic() {
    for name in list() {
        let a = build_scenario(name, &Overrides::new()).unwrap();
        let b = build_scenario(name, &Overrides::new()).unwrap();
        assert_eq!(a.operator.matrix(), b.operator.matrix(), "{name}");
    }
}
