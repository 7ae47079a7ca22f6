#![no_main]

use blm::{ModelSpec, ValidationMode};
use libfuzzer_sys::fuzz_target;

// Building and evaluating an arbitrary parsed spec returns errors, never panics.
fuzz_target!(|data: &[u8]| {
    let Ok(spec) = ModelSpec::from_slice(data) else {
        return;
    };
    for mode in [ValidationMode::Strict, ValidationMode::Permissive] {
        if let Ok(model) = spec.build(mode) {
            for (x, y) in [(0.0, 0.0), (0.5, 1.5), (2.0, 1.0), (1.0, 1.0)] {
                let s = model.survival(x, y);
                assert!(!s.is_nan() || mode == ValidationMode::Permissive);
                let _ = model.density(x, y);
            }
        }
    }
});
