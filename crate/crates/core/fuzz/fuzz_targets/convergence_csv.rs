#![no_main]
use antenna_tuner::harness::{best_so_far_curves, read_convergence_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = read_convergence_csv(text) {
        for (_, curve) in best_so_far_curves(&rows) {
            assert!(curve.windows(2).all(|w| w[0] <= w[1]));
        }
    }
});
