#![no_main]

use libfuzzer_sys::fuzz_target;
use siso_core::mapping::vocab::Vocabulary;
use siso_core::mapping::{compile_plan, parse_mapping, serialize_plan, validate_plan};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(plan) = parse_mapping(text) else {
        return;
    };
    let _ = validate_plan(&plan);
    // A plan that parses must survive its own serialization.
    let again = parse_mapping(&serialize_plan(&plan, &Vocabulary::default())).expect("serialized plan parses");
    assert_eq!(plan, again);
    if let Ok(compiled) = compile_plan(&plan) {
        let _ = compiled.explain();
    }
});
