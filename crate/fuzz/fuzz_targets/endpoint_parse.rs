#![no_main]

use libfuzzer_sys::fuzz_target;
use siso_core::runtime::parse_sink;
use siso_core::Endpoint;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(endpoint) = s.parse::<Endpoint>() {
            let _ = endpoint.to_string();
        }
        let _ = parse_sink(s);
    }
});
