#![no_main]

use libfuzzer_sys::fuzz_target;
use provsum::model::{ProvDocument, infer_core_types};

fuzz_target!(|data: &[u8]| {
    // The parser must never panic on arbitrary bytes; accepted documents
    // round-trip through the subset, before and after type inference.
    let Ok(doc) = ProvDocument::from_json_bytes(data) else {
        return;
    };
    let json = doc.to_json_string().expect("parsed documents serialize");
    let reparsed = ProvDocument::from_json_str(&json).expect("serialized documents reparse");
    assert_eq!(doc, reparsed);

    let (inferred, _warnings) = infer_core_types(&doc);
    let json = inferred.to_json_string().expect("inferred documents serialize");
    let reparsed = ProvDocument::from_json_str(&json).expect("serialized documents reparse");
    assert_eq!(inferred, reparsed);
});
