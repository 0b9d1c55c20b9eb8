#![no_main]

use bbsb::Kappa;
use bbsb_cli::config::{KappaList, Location, ModelKind, SigmaSetting};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(kappa) = text.parse::<Kappa>() {
        assert_eq!(kappa.to_string().parse::<Kappa>().unwrap(), kappa);
    }
    let _ = text.parse::<KappaList>();
    let _ = text.parse::<SigmaSetting>();
    let _ = text.parse::<Location>();
    let _ = text.parse::<ModelKind>();
});
