#![no_main]
use antenna_tuner::harness::parse_experiment_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = parse_experiment_config(text) {
        let again = parse_experiment_config(&config.to_kv_string()).expect("manifest reloads");
        assert_eq!(again, config);
    }
});
