#![no_main]

use libfuzzer_sys::fuzz_target;
use siso_core::ingest::{generate_items, FieldFormat, Formulation, JsonPath, RawRecord, SourceId, TimePolicy};

fuzz_target!(|data: &[u8]| {
    let record = RawRecord {
        payload: data.to_vec(),
        arrival_time: 1_700_000_000_000,
        source_id: SourceId(0),
        sequence_no: 7,
    };
    let policies = [TimePolicy::arrival(), TimePolicy::field("ts", FieldFormat::EpochMs)];
    for path in ["$", "$.rows[*]", "$.rows[0].id"] {
        let path = JsonPath::parse(path).unwrap();
        for policy in &policies {
            let _ = generate_items(&record, Formulation::Json(&path), policy);
        }
    }
});
