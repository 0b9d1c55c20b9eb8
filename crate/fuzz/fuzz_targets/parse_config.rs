#![no_main]

use bbsb_cli::config::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(config) = parse_config(text) {
        let again = serde_json::to_string(&config).unwrap();
        parse_config(&again).unwrap();
    }
});
