#![no_main]

use entmetrics::codec::{decode_embeddings, encode_embeddings, Format};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(set) = decode_embeddings(data, Format::Binary) {
        // anything accepted re-encodes to the same bytes
        assert_eq!(encode_embeddings(&set, Format::Binary), data);
    }
});
