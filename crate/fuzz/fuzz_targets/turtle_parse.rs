#![no_main]

use libfuzzer_sys::fuzz_target;
use siso_core::mapping::turtle::parse_turtle;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_turtle(text);
    }
});
