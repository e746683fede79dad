#![no_main]

use libfuzzer_sys::fuzz_target;
use stablefit::data::{read_column, ColumnSelector};

fuzz_target!(|data: &[u8]| {
    // first byte picks the column, the rest is the file
    let Some((&sel, body)) = data.split_first() else { return };
    let column = if sel & 0x80 == 0 {
        ColumnSelector::Index((sel & 0x07) as usize)
    } else {
        ColumnSelector::Name("value".into())
    };
    if let Ok(col) = read_column(body, &column) {
        assert!(!col.values.is_empty());
        assert!(col.values.iter().all(|v| v.is_finite()));
    }
});
