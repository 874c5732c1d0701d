#![no_main]

use libfuzzer_sys::fuzz_target;
use pwm_commutation::{Frame, Polarity, Technique};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = text.parse::<Technique>() {
        assert_eq!(t.to_string().parse::<Technique>().unwrap(), t);
    }
    if let Ok(f) = text.parse::<Frame>() {
        assert_eq!(f.to_string().parse::<Frame>().unwrap(), f);
    }
    if let Ok(p) = text.parse::<Polarity>() {
        assert_eq!(p.to_string().parse::<Polarity>().unwrap(), p);
    }
});
