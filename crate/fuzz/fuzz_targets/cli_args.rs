#![no_main]

use chordlab_cli::Cli;
use clap::Parser;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("chordlab").chain(text.split('\n'));
    let _ = Cli::try_parse_from(args);
});
