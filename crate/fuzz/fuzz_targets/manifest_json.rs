#![no_main]

use libfuzzer_sys::fuzz_target;
use pwm_commutation::io::RunManifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(manifest) = RunManifest::from_json(text) {
        // A manifest that validated once must survive its own serialization.
        let again = RunManifest::from_json(&manifest.to_json()).expect("serialized manifest parses");
        assert_eq!(manifest, again);
    }
});
