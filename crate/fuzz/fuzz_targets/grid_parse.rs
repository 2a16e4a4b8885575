#![no_main]

use libfuzzer_sys::fuzz_target;
use srwpnet_cli::Grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(grid) = text.parse::<Grid>() else {
        return;
    };
    let back: Grid = grid.to_string().parse().expect("displayed grid must parse");
    assert_eq!(back.points().len(), grid.points().len());
});
