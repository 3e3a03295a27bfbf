#![no_main]

use libfuzzer_sys::fuzz_target;
use provsum::dot::export_dot;
use provsum::metrics::outlier_edges;
use provsum::summary::Summary;

fuzz_target!(|data: &[u8]| {
    // Loading validates referential integrity, so downstream consumers must
    // not panic on anything that loads.
    let Ok(summary) = Summary::from_json_bytes(data) else {
        return;
    };
    let reloaded = Summary::from_json_str(&summary.to_json_string())
        .expect("serialized summaries reload");
    assert_eq!(summary, reloaded);
    let _ = export_dot(&summary);
    let _ = outlier_edges(&summary, 0.2);
});
