mod common;

use common::assets;
use frenet_racer::env::Algorithm;
use frenet_racer::harness::{RunConfig, SweepKind, SweepSpec};
use serde_json::Value;

fn schema() -> Value {
    serde_json::from_str(&std::fs::read_to_string(assets().join("configs/run_config.schema.json")).unwrap()).unwrap()
}

/// Every object in the serialized config has exactly the schema's properties.
fn same_shape(schema: &Value, value: &Value, path: &str) {
    let Some(obj) = value.as_object() else { return };
    let props = schema["properties"].as_object().unwrap_or_else(|| panic!("{path}: no properties"));
    let mut a: Vec<&String> = obj.keys().collect();
    let mut b: Vec<&String> = props.keys().collect();
    a.sort();
    b.sort();
    assert_eq!(a, b, "{path}");
    assert_eq!(schema["additionalProperties"], false, "{path}");
    for (k, v) in obj {
        same_shape(&props[k], v, &format!("{path}.{k}"));
    }
}

#[test]
fn schema_tracks_the_config_types() {
    let mut cfg = RunConfig::new(Algorithm::Partial);
    cfg.sweep = Some(SweepSpec {
        kind: SweepKind::Mass,
        values: vec![0.5],
        positions: vec![0.1],
        laps: 3,
    });
    let value = serde_json::to_value(&cfg).unwrap();
    same_shape(&schema(), &value, "config");
}

#[test]
fn bundled_configs_match_schema_and_parse() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    for entry in std::fs::read_dir(assets().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.ends_with(".schema.json") {
            continue;
        }
        let value: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
        RunConfig::load(&path).unwrap();
        let round = serde_json::to_value(RunConfig::load(&path).unwrap()).unwrap();
        assert!(validator.is_valid(&round), "{name}: serialized form");
    }
}

#[test]
fn schema_rejects_what_the_loader_rejects() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    for bad in [
        r#"{"algorithm": "mpc"}"#,
        r#"{"algorithm": "partial", "td3": {"gama": 0.9}}"#,
        r#"{"track": "porto"}"#,
        r#"{"algorithm": "partial", "sweep": {"kind": "wind", "values": [1]}}"#,
    ] {
        let v: Value = serde_json::from_str(bad).unwrap();
        assert!(!validator.is_valid(&v), "schema accepted {bad}");
        assert!(RunConfig::from_json(bad).is_err(), "loader accepted {bad}");
    }
}
