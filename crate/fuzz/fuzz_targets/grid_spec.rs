#![no_main]

use libfuzzer_sys::fuzz_target;
use stablefit::data::{parse_grid, parse_sizes, MAX_GRID_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_grid(text) {
        assert!(!v.is_empty() && v.len() <= MAX_GRID_POINTS);
        assert!(v.iter().all(|x| x.is_finite()));
    }
    if let Ok(v) = parse_sizes(text) {
        assert!(v.iter().all(|&n| n > 0));
    }
});
