#![no_main]

use entmetrics::codec::{decode_labels, encode_labels};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(labels) = decode_labels(data) {
        assert_eq!(decode_labels(&encode_labels(&labels)).unwrap(), labels);
    }
});
