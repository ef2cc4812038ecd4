#![no_main]

use libfuzzer_sys::fuzz_target;
use metrocontrol::experiment::{parse_sweep_csv, sweep_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rows) = parse_sweep_csv(text) else {
        return;
    };
    let Some(n) = rows.first().map(|r| r.n_params()) else {
        return;
    };
    let again = sweep_csv(&rows, n).unwrap();
    assert_eq!(parse_sweep_csv(&again).unwrap(), rows);
});
