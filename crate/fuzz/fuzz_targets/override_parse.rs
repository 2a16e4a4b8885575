#![no_main]

use libfuzzer_sys::fuzz_target;
use srwpnet_cli::RunConfig;

const BASE: &str = "[network]\nlambda0 = 1e-6\nh = 100.0\nalpha = 3.0\n\n[mobility]\nv = 12.5\nw = 5.0\ns = 250.0\n";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let overrides: Vec<String> = text.lines().map(str::to_string).collect();
    if let Ok(cfg) = RunConfig::parse_with_overrides(BASE, &overrides) {
        cfg.validate().expect("accepted overrides must leave a valid config");
    }
});
