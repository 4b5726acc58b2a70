#![no_main]

use gradproj::mesh::bench::MarkingPolicy;
use gradproj::stability::{Degree, NormKind};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = s.parse::<MarkingPolicy>();
    let _ = s.parse::<Degree>();
    let _ = s.parse::<NormKind>();
});
