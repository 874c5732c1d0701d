#![no_main]

use libfuzzer_sys::fuzz_target;
use pwm_commutation::io::parse_spectrum_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = parse_spectrum_csv(text) {
        assert_eq!(parse_spectrum_csv(&table.to_csv()).expect("written table parses"), table);
    }
});
