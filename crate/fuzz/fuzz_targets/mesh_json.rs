#![no_main]

use gradproj::mesh::io::{from_json, to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mesh) = from_json(text) {
        // Anything accepted must survive a round trip unchanged.
        let once = to_json(&mesh);
        let back = from_json(&once).expect("serialized mesh parses");
        assert_eq!(to_json(&back), once);
    }
});
