#![no_main]

use std::io::Cursor;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use libfuzzer_sys::fuzz_target;
use siso_core::ingest::{RecordStream, SourceId};

fuzz_target!(|data: &[u8]| {
    let stream = RecordStream::from_reader(Cursor::new(data.to_vec()), SourceId(0), Arc::new(AtomicBool::new(false)));
    for record in stream {
        let Ok(record) = record else { break };
        assert!(!record.payload.is_empty());
        assert!(!record.payload.contains(&b'\n'));
    }
});
