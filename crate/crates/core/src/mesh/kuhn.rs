use super::{SimplicialMesh, VertexId, MAX_DIM};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

impl SimplicialMesh {
    /// Kuhn triangulation of the unit cube with `cells_per_axis` cubes per
    /// axis, each split into `d!` simplices along monotone lattice paths.
    /// All tags are `d` and all levels are 0.
    ///
    /// Grid coordinates are `i / 2^m` with `2^m >= cells_per_axis`, so when
    /// `cells_per_axis` is not a power of two the mesh covers `[0, n/2^m]^d`
    /// and coordinates stay dyadic.
    pub fn kuhn(dim: usize, cells_per_axis: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if cells_per_axis == 0 {
            return Err(Error::InvalidParameter("cells_per_axis must be positive".into()));
        }
        let n = cells_per_axis;
        let side = n + 1;
        let nv = side
            .checked_pow(dim as u32)
            .filter(|&v| v <= u32::MAX as usize / 2)
            .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
        let m = n.next_power_of_two().trailing_zeros();

        let mut coords = Vec::with_capacity(nv);
        for id in 0..nv {
            let mut rest = id;
            let mut c = Vec::with_capacity(dim);
            for _ in 0..dim {
                c.push(Dyadic::new((rest % side) as i128, m)?);
                rest /= side;
            }
            coords.push(c);
        }
        let index = |c: &[usize]| -> VertexId {
            c.iter().rev().fold(0usize, |acc, &x| acc * side + x) as VertexId
        };

        let perms = permutations(dim);
        let mut simplices = Vec::with_capacity(n.pow(dim as u32) * perms.len());
        for cube in 0..n.pow(dim as u32) {
            let mut rest = cube;
            let corner: Vec<usize> = (0..dim)
                .map(|_| {
                    let x = rest % n;
                    rest /= n;
                    x
                })
                .collect();
            for p in &perms {
                let mut c = corner.clone();
                let mut verts = vec![index(&c)];
                for &axis in p {
                    c[axis] += 1;
                    verts.push(index(&c));
                }
                simplices.push((verts, dim, 0));
            }
        }
        SimplicialMesh::from_parts(dim, coords, simplices, Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts() {
        for n in 1..=5 {
            let p = permutations(n);
            assert_eq!(p.len() as u64, crate::mesh::factorial(n));
            assert!(p.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn kuhn_counts() {
        let cases = [(2, 1, 2, 4), (3, 1, 6, 8), (2, 2, 8, 9), (1, 4, 4, 5), (3, 2, 48, 27)];
        for (d, n, ns, nv) in cases {
            let m = SimplicialMesh::kuhn(d, n).unwrap();
            assert_eq!(m.num_active(), ns, "d={d} n={n}");
            assert_eq!(m.num_vertices(), nv, "d={d} n={n}");
            assert!(m.active_ids().iter().all(|&s| m.simplex(s).tag() == d));
        }
    }

    #[test]
    fn kuhn_volumes_sum_to_one() {
        for d in 1..=4 {
            let m = SimplicialMesh::kuhn(d, 2).unwrap();
            let total: f64 = m.active_ids().iter().map(|&s| m.volume(s)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_power_of_two_grids_stay_dyadic() {
        let m = SimplicialMesh::kuhn(2, 3).unwrap();
        assert_eq!(m.num_active(), 18);
        let max = (0..m.num_vertices() as u32)
            .map(|v| m.vertex_f64(v)[0])
            .fold(0.0, f64::max);
        assert_eq!(max, 0.75);
    }

    #[test]
    fn boundary_face_counts() {
        // 2D: 4 sides with n edges each; 3D: 6 sides with 2 n^2 triangles each.
        assert_eq!(SimplicialMesh::kuhn(2, 3).unwrap().boundary_faces().len(), 12);
        assert_eq!(SimplicialMesh::kuhn(3, 2).unwrap().boundary_faces().len(), 48);
        assert_eq!(SimplicialMesh::kuhn(1, 5).unwrap().boundary_faces().len(), 2);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SimplicialMesh::kuhn(0, 1).is_err());
        assert!(SimplicialMesh::kuhn(9, 1).is_err());
        assert!(SimplicialMesh::kuhn(2, 0).is_err());
    }
}
