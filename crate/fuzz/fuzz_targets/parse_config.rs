#![no_main]

use hemo1d::config::{parse_config, NetworkConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Schema errors and validation errors are both plain `Err`s; neither may panic.
    if let Ok(cfg) = NetworkConfig::from_toml_str(text) {
        let _ = cfg.settings();
    }
    let _ = parse_config(text);
});
