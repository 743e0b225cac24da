#![no_main]

use entmetrics::synth::parse_mixture_spec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = parse_mixture_spec(text) {
        let _ = spec.sample(4, 0);
    }
});
