#![no_main]
use antenna_tuner::channel::Scene;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(scene) = Scene::from_kv_str(text) {
            let again = Scene::from_kv_str(&scene.to_kv_string()).expect("scene reloads");
            assert_eq!(again, scene);
        }
    }
});
