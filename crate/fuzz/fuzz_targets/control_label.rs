#![no_main]

use libfuzzer_sys::fuzz_target;
use metrocontrol::dynamics::ScheduleKind;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(kind) = s.parse::<ScheduleKind>() {
            let label = kind.label();
            assert_eq!(label.parse::<ScheduleKind>().unwrap(), kind, "{s:?} -> {label:?}");
        }
    }
});
