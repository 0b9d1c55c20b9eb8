#![no_main]

use bbsb::data::parse_spec_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(spec) = parse_spec_json(text) {
        spec.validate().unwrap();
        assert_eq!(parse_spec_json(&spec.to_json()).unwrap(), spec);
        let d = spec.density(0.0);
        assert!(d >= 0.0);
    }
});
