//! Structural checks on meshes.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;

use super::{Face, SimplicialMesh};
use crate::error::{Error, Result};

/// Verifies conformity and the bookkeeping that depends on it: no hanging
/// vertices, every face owned by one or two active simplices, the boundary
/// set equal to the single-owner faces, Γ inside the boundary, and positive
/// volumes.
pub fn check_conforming(mesh: &SimplicialMesh) -> Result<()> {
    if let Some((s, v)) = mesh.hanging_vertices().into_iter().next() {
        return Err(Error::InvalidMesh(format!("vertex {v} hangs on simplex {s}")));
    }
    let mut owners: BTreeMap<Face, u32> = BTreeMap::new();
    for id in mesh.active_ids() {
        if mesh.signed_volume_exact(id).is_zero() {
            return Err(Error::DegenerateSimplex(id));
        }
        for j in 0..=mesh.dim() {
            *owners.entry(mesh.simplex(id).face(j)).or_default() += 1;
        }
    }
    let mut single = BTreeSet::new();
    for (f, n) in owners {
        match n {
            1 => {
                single.insert(f);
            }
            2 => {}
            _ => return Err(Error::InvalidMesh(format!("face {f:?} has {n} owners"))),
        }
    }
    if &single != mesh.boundary_faces() {
        return Err(Error::InvalidMesh("boundary face set is out of date".into()));
    }
    if !mesh.gamma_faces().is_subset(mesh.boundary_faces()) {
        return Err(Error::InvalidMesh("Γ contains an interior face".into()));
    }
    Ok(())
}

/// Number of similarity classes among the active simplices, classifying by
/// the sorted squared edge lengths divided by the largest one.
pub fn similarity_classes(mesh: &SimplicialMesh) -> usize {
    let mut classes = BTreeSet::new();
    for id in mesh.active_ids() {
        let v = mesh.simplex(id).vertices();
        let mut lens = Vec::new();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let (a, b) = (mesh.vertex(v[i]), mesh.vertex(v[j]));
                let l: BigRational = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| {
                        let t = x.to_rational() - y.to_rational();
                        &t * &t
                    })
                    .sum();
                lens.push(l);
            }
        }
        lens.sort();
        let max = lens.last().cloned().unwrap_or_else(BigRational::zero);
        let key: Vec<BigRational> = lens.into_iter().map(|l| l / &max).collect();
        classes.insert(key);
    }
    classes.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn similarity_classes_stabilize() {
        for d in 2..=3 {
            let mut m = SimplicialMesh::kuhn(d, 1).unwrap();
            let mut counts = Vec::new();
            for _ in 0..3 * d {
                m.refine_uniform().unwrap();
                counts.push(similarity_classes(&m));
            }
            let last = *counts.last().unwrap();
            // Once d sweeps have run, every class has appeared.
            assert!(counts[d - 1..].iter().all(|&c| c == last), "d={d}: {counts:?}");
            assert!(last <= 4, "d={d}: {counts:?}");
        }
    }
}
