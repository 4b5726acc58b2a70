#![no_main]

use gradproj::mesh::io::from_json;
use libfuzzer_sys::fuzz_target;

// Input: one selector byte, then a mesh file. Valid meshes get a closure
// refinement and a limited-grading refinement of a few elements.
fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let Ok(mut mesh) = from_json(text) else { return };
    if mesh.dim() > 4 || mesh.num_active() > 64 {
        return;
    }
    let ids = mesh.active_ids();
    let pick = ids[sel as usize % ids.len()];
    if mesh.refine_closure(&[pick]).is_err() {
        return;
    }
    let ids = mesh.active_ids();
    let marked: Vec<_> = ids.iter().copied().step_by(1 + (sel as usize >> 4)).take(4).collect();
    let _ = mesh.refine_lg(&marked, 1 + u32::from(sel & 3));
});
