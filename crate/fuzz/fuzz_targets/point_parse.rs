#![no_main]

use libfuzzer_sys::fuzz_target;
use scatpole::Point;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let parsed = text.parse::<Point>();
    let decoded = serde_json::from_str::<Point>(text);
    for p in parsed.into_iter().chain(decoded) {
        if let Point::Exact(_) = p {
            assert_eq!(p.to_string().parse::<Point>().unwrap(), p);
        }
        for n in [2, 4, u32::MAX] {
            let _ = p.grid_offset(n);
            let _ = p.reflected(n).as_half_integer();
        }
    }
});
