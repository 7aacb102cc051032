#![no_main]

use libfuzzer_sys::fuzz_target;
use siso_core::mapping::template::parse_template;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_template(text);
    }
});
