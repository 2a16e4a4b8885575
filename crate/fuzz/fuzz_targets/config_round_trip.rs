#![no_main]

use libfuzzer_sys::fuzz_target;
use srwpnet_cli::RunConfig;

// Values can drift once through the float printer, so compare the second
// and third serializations.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::parse(text) else {
        return;
    };
    let once = cfg.to_toml();
    let back = RunConfig::parse(&once).expect("serialized config must parse");
    let twice = back.to_toml();
    let again = RunConfig::parse(&twice).expect("serialized config must parse");
    assert_eq!(twice, again.to_toml());
});
