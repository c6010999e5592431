#![no_main]

use libfuzzer_sys::fuzz_target;
use scatpole::jobs::JobConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Accepted configs must stay valid after a serialization round trip.
    if let Ok(config) = JobConfig::from_json(text) {
        let again = serde_json::to_string(&config).unwrap();
        JobConfig::from_json(&again).unwrap();
    }
});
