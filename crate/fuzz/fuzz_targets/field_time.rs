#![no_main]

use libfuzzer_sys::fuzz_target;
use siso_core::ingest::{parse_field_time, FieldFormat};

fuzz_target!(|data: &[u8]| {
    if let Ok(value) = std::str::from_utf8(data) {
        let _ = parse_field_time(value, FieldFormat::EpochMs, 0);
        let _ = parse_field_time(value, FieldFormat::ClockHms, 1_700_000_000_000);
    }
});
