use std::collections::BTreeSet;
use std::path::Path;

use metrocontrol::experiment::ScenarioConfig;

fn configs_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_validate() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") || path.ends_with("schema.json") {
            continue;
        }
        let cfg = ScenarioConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let back: ScenarioConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn schema_lists_every_config_field() {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(configs_dir().join("schema.json")).unwrap()).unwrap();
    let listed: BTreeSet<String> = schema["properties"].as_object().unwrap().keys().cloned().collect();
    let cfg = ScenarioConfig::from_path(&configs_dir().join("custom.json")).unwrap();
    let mut full = serde_json::to_value(&cfg).unwrap();
    let obj = full.as_object_mut().unwrap();
    for key in ["weights", "output"] {
        obj.insert(key.into(), serde_json::json!(null));
    }
    let fields: BTreeSet<String> = obj.keys().cloned().collect();
    assert_eq!(listed, fields);
    for key in listed {
        let probe = format!(r#"{{"scenario":"dc","grid":{{"t_max":1}},"control":"dc","{key}_x":1}}"#);
        assert!(ScenarioConfig::from_json(&probe).is_err());
    }
}
