#![no_main]

use libfuzzer_sys::fuzz_target;
use stablefit::quantile::QuantileLookup;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = QuantileLookup::from_csv(text) {
        let back = QuantileLookup::from_csv(&table.to_csv()).expect("written cache parses");
        assert_eq!(back, table);
        let inv = table.invert(2.5, 0.1);
        assert!(inv.alpha.is_finite() && inv.beta.is_finite());
    }
});
