#![no_main]

use bbsb::data::parse_dataset_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(dataset) = parse_dataset_json(text) {
        dataset.validate().unwrap();
        assert!(dataset.values.iter().all(|v| v.is_finite()));
    }
});
