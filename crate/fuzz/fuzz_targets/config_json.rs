#![no_main]

use libfuzzer_sys::fuzz_target;
use pwm_commutation::io::{load_config, ConfigFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = load_config(text);
    if let Ok(file) = ConfigFile::parse(text) {
        let again = ConfigFile::parse(&file.to_json()).expect("serialized config parses");
        assert_eq!(file, again);
    }
});
