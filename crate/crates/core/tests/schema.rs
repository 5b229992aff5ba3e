use std::path::PathBuf;

use otr_bounds::io::parse_study;
use serde_json::{json, Value};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(root().join("schema/study.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn every_fixture_conforms() {
    let v = validator();
    for entry in std::fs::read_dir(root().join("fixtures")).unwrap() {
        let path = entry.unwrap().path();
        let doc: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{}: {errors:?}", path.display());
    }
}

/// Documents the schema rejects are also rejected by the parser, and vice versa.
#[test]
fn schema_and_parser_agree() {
    let v = validator();
    let arms = json!({"control": {"n": 10, "mean": 0.4, "variance": 0.24},
                      "treatment": {"n": 10, "mean": 0.5, "variance": 0.25}});
    let cases = [
        (json!({"outcome_space": {"type": "binary"}, "direction": "higher_better", "arms": arms}), true),
        (json!({"direction": "higher_better", "arms": arms}), false),
        (json!({"outcome_space": {"type": "binary"}, "direction": "up", "arms": arms}), false),
        (json!({"outcome_space": {"type": "binary"}, "direction": "higher_better", "arms": arms, "extra": 1}), false),
        (json!({"outcome_space": {"type": "binary", "values": [0, 1]}, "direction": "higher_better", "arms": arms}), false),
        (json!({"outcome_space": {"type": "binary"}, "direction": "higher_better",
                "arms": {"control": {"n": 10, "mean": 0.4, "variance": -1},
                         "treatment": {"n": 10, "mean": 0.5, "variance": 0.25}}}), false),
        (json!({"outcome_space": {"type": "binary"}, "direction": "higher_better", "arms": arms,
                "options": {"mean_se": "as-printed", "alpha": 0.1}}), true),
        (json!({"outcome_space": {"type": "binary"}, "direction": "higher_better", "arms": arms,
                "options": {"alpha": 2}}), false),
    ];
    for (doc, ok) in cases {
        assert_eq!(v.is_valid(&doc), ok, "schema on {doc}");
        assert_eq!(parse_study(doc.to_string().as_bytes()).is_ok(), ok, "parser on {doc}");
    }
}
