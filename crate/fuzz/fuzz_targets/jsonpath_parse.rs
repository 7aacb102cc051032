#![no_main]

use libfuzzer_sys::fuzz_target;
use siso_core::ingest::JsonPath;

fuzz_target!(|data: &[u8]| {
    let Ok(expr) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(path) = JsonPath::parse(expr) {
        let doc = serde_json::json!({"a": [1, {"b": "c"}], "rows": [{"id": 1}, {"id": [2]}]});
        let _ = path.select(&doc);
    }
});
