#![no_main]

use libfuzzer_sys::fuzz_target;
use siso_bench::{parse_line, Monitor};

fuzz_target!(|data: &[u8]| {
    if let Ok(line) = std::str::from_utf8(data) {
        let _ = parse_line(line);
        let mut monitor = Monitor::default();
        monitor.observe(line, 0);
    }
});
