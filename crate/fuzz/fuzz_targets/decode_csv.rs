#![no_main]

use entmetrics::codec::{decode_embeddings, encode_embeddings, Format};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(set) = decode_embeddings(data, Format::Csv) {
        assert!(set.as_slice().iter().all(|v| v.is_finite()));
        let again = decode_embeddings(&encode_embeddings(&set, Format::Csv), Format::Csv).unwrap();
        assert_eq!(again, set);
    }
});
