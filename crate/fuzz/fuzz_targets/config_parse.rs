#![no_main]

use libfuzzer_sys::fuzz_target;
use metrocontrol::experiment::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ScenarioConfig::from_json(text) {
        // validation must reject or accept, never panic
        let _ = cfg.validate();
        let again = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ScenarioConfig::from_json(&again).unwrap(), cfg);
    }
});
