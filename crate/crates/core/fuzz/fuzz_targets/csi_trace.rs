#![no_main]
use antenna_tuner::environment::{parse_trace, write_trace};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(trace) = parse_trace(text) {
        // Whatever parses must survive a write/parse cycle unchanged.
        let again = parse_trace(&write_trace(&trace)).expect("rewritten trace parses");
        assert_eq!(again.grid, trace.grid);
    }
});
