#![no_main]

use libfuzzer_sys::fuzz_target;
use metrocontrol::dynamics::{ControlSchedule, DcField, ParameterPoint, ScheduleSpec, TimeGrid};

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<ScheduleSpec>(data) else {
        return;
    };
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<ScheduleSpec>(&text).unwrap(), spec);

    // rebuild explicit profiles on a grid that fits them; kind-only specs
    // would run the optimizers, which is out of scope here
    let steps = if !spec.alpha.is_empty() {
        spec.alpha.len().saturating_sub(1)
    } else if !spec.segments.is_empty() {
        64
    } else {
        return;
    };
    if !(2..=256).contains(&steps) {
        return;
    }
    let grid = TimeGrid::new(1.0, steps).unwrap();
    let x = ParameterPoint::uniform(vec![1.0, 0.5]).unwrap();
    if let Ok(s) = ControlSchedule::from_spec(&spec, &DcField, &x, &grid) {
        assert!(s.frames().iter().all(|r| r.is_rotation()));
    }
});
