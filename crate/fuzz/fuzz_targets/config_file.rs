//! Scenario configs: parsing never panics, and a config that validates
//! round-trips through TOML.

#![no_main]
use libfuzzer_sys::fuzz_target;
use nfmimo::bench::ScenarioConfig;

const MAX_INPUT_SIZE: usize = 64 * 1024;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_INPUT_SIZE {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ScenarioConfig::from_toml_str(text) {
        let again =
            ScenarioConfig::from_toml_str(&cfg.to_toml_string()).expect("written config parses");
        assert_eq!(again, cfg);
    }
});
