#![no_main]

use libfuzzer_sys::fuzz_target;
use stablefit::data::{decode_f64_le, decode_sample, encode_f64_le};

fuzz_target!(|data: &[u8]| {
    if let Ok(v) = decode_f64_le(data) {
        assert_eq!(encode_f64_le(&v), data);
    }
    if let Ok(x) = decode_sample(data) {
        assert_eq!(x.len() * 8, data.len());
        assert!(x.sorted().windows(2).all(|w| w[0] <= w[1]));
    }
});
