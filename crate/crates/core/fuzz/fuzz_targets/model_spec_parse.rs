#![no_main]

use blm::ModelSpec;
use libfuzzer_sys::fuzz_target;

// Parsing never panics; anything that parses survives a serialization round trip.
fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = ModelSpec::from_slice(data) {
        let again = ModelSpec::from_json(&spec.to_json()).expect("serialized spec reparses");
        assert_eq!(spec.to_json(), again.to_json());
    }
});
