#![no_main]

use libfuzzer_sys::fuzz_target;
use siso_core::ingest::{FieldFormat, ItemGenerator, JsonPath, RawRecord, SourceId, TimePolicy};
use siso_core::mapping::ContentType;

fuzz_target!(|data: &[u8]| {
    let mut generator = ItemGenerator::new(
        ContentType::Csv,
        JsonPath::root(),
        TimePolicy::field("time", FieldFormat::ClockHms),
    );
    for (seq, line) in data.split(|&b| b == b'\n').enumerate() {
        let record = RawRecord {
            payload: line.to_vec(),
            arrival_time: 1_700_000_000_000,
            source_id: SourceId(1),
            sequence_no: seq as u64,
        };
        let _ = generator.process(&record);
    }
});
