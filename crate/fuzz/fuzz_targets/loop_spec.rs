#![no_main]

use chordlab::loopspec::{fourier_spec, parse_loop_spec, polygon_spec, LoopSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse_loop_spec(text) else {
        return;
    };
    // Whatever loads must serialize back to a spec that loads again.
    let again = match &spec {
        LoopSpec::Points(cfg) => polygon_spec(cfg),
        LoopSpec::Curve(curve) => fourier_spec(curve),
    };
    parse_loop_spec(&again.to_string()).expect("serialized spec reloads");
});
