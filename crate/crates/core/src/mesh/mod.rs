//! Conforming simplicial meshes refined by tagged bisection.
//!
//! All simplices ever created live in one arena. Refinement deactivates the
//! parent and appends two children, so ancestry is always available for
//! two-mesh integration.

pub mod audit;
pub mod bench;
pub mod distance;
pub mod io;
mod kuhn;
mod refine;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

pub use refine::{ClosureReport, LgReport};

pub type VertexId = u32;
pub type SimplexId = usize;
/// A `(d-1)`-face, stored as sorted vertex ids.
pub type Face = Vec<VertexId>;

pub const MAX_DIM: usize = 8;

/// One simplex of the arena: ordered vertices `x_0..x_d`, bisection tag and
/// generation level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedSimplex {
    vertices: Vec<VertexId>,
    tag: usize,
    level: u32,
    parent: Option<SimplexId>,
    children: Option<[SimplexId; 2]>,
    active: bool,
}

impl TaggedSimplex {
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn tag(&self) -> usize {
        self.tag
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn parent(&self) -> Option<SimplexId> {
        self.parent
    }

    pub fn children(&self) -> Option<[SimplexId; 2]> {
        self.children
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Sorted face opposite local vertex `j`.
    pub fn face(&self, j: usize) -> Face {
        let mut f: Face = self
            .vertices
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &v)| v)
            .collect();
        f.sort_unstable();
        f
    }

    pub fn local_index(&self, v: VertexId) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }
}

#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    coords: Vec<Vec<Dyadic>>,
    lookup: HashMap<Vec<Dyadic>, VertexId>,
    simplices: Vec<TaggedSimplex>,
    patches: Vec<Vec<SimplexId>>,
    boundary: BTreeSet<Face>,
    gamma: BTreeSet<Face>,
    n_active: usize,
}

impl SimplicialMesh {
    /// Builds a level-0 mesh from explicit data and validates it: vertex ids
    /// in range, distinct coordinates, nondegenerate simplices, every face
    /// shared by at most two simplices, no hanging vertices, and Γ faces on
    /// the boundary.
    pub fn from_parts(
        dim: usize,
        coords: Vec<Vec<Dyadic>>,
        simplices: Vec<(Vec<VertexId>, usize, u32)>,
        gamma: Vec<Face>,
    ) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if simplices.is_empty() {
            return Err(Error::InvalidMesh("no simplices".into()));
        }
        let mut lookup = HashMap::with_capacity(coords.len());
        for (i, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::InvalidMesh(format!("vertex {i} has {} coordinates", c.len())));
            }
            if lookup.insert(c.clone(), i as VertexId).is_some() {
                return Err(Error::InvalidMesh(format!("vertex {i} duplicates an earlier vertex")));
            }
        }
        let nv = coords.len();
        let mut mesh = SimplicialMesh {
            dim,
            coords,
            lookup,
            simplices: Vec::with_capacity(simplices.len()),
            patches: vec![Vec::new(); nv],
            boundary: BTreeSet::new(),
            gamma: BTreeSet::new(),
            n_active: 0,
        };
        for (i, (verts, tag, level)) in simplices.into_iter().enumerate() {
            if verts.len() != dim + 1 {
                return Err(Error::InvalidMesh(format!("simplex {i} has {} vertices", verts.len())));
            }
            if verts.iter().any(|&v| v as usize >= nv) {
                return Err(Error::InvalidMesh(format!("simplex {i} references a missing vertex")));
            }
            let mut sorted = verts.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != verts.len() {
                return Err(Error::InvalidMesh(format!("simplex {i} repeats a vertex")));
            }
            if tag == 0 || tag > dim {
                return Err(Error::InvalidMesh(format!("simplex {i} has tag {tag} outside 1..={dim}")));
            }
            mesh.push_simplex(TaggedSimplex {
                vertices: verts,
                tag,
                level,
                parent: None,
                children: None,
                active: true,
            });
            if mesh.signed_volume_exact(i).is_zero() {
                return Err(Error::DegenerateSimplex(i));
            }
        }
        mesh.boundary = mesh.compute_boundary()?;
        if let Some((s, v)) = mesh.hanging_vertices().into_iter().next() {
            return Err(Error::InvalidMesh(format!("vertex {v} hangs on simplex {s}")));
        }
        mesh.set_gamma(gamma)?;
        Ok(mesh)
    }

    fn push_simplex(&mut self, s: TaggedSimplex) -> SimplexId {
        let id = self.simplices.len();
        for &v in &s.vertices {
            self.patches[v as usize].push(id);
        }
        if s.active {
            self.n_active += 1;
        }
        self.simplices.push(s);
        id
    }

    fn compute_boundary(&self) -> Result<BTreeSet<Face>> {
        let mut owners: BTreeMap<Face, u32> = BTreeMap::new();
        for id in self.active_ids() {
            for j in 0..=self.dim {
                *owners.entry(self.simplices[id].face(j)).or_default() += 1;
            }
        }
        let mut boundary = BTreeSet::new();
        for (f, n) in owners {
            match n {
                1 => {
                    boundary.insert(f);
                }
                2 => {}
                _ => {
                    return Err(Error::InvalidMesh(format!("face {f:?} is shared by {n} simplices")));
                }
            }
        }
        Ok(boundary)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn vertex(&self, v: VertexId) -> &[Dyadic] {
        &self.coords[v as usize]
    }

    pub fn vertex_f64(&self, v: VertexId) -> Vec<f64> {
        self.coords[v as usize].iter().map(Dyadic::to_f64).collect()
    }

    pub fn find_vertex(&self, point: &[Dyadic]) -> Option<VertexId> {
        self.lookup.get(point).copied()
    }

    pub fn simplex(&self, id: SimplexId) -> &TaggedSimplex {
        &self.simplices[id]
    }

    /// Number of simplices ever created, active or not.
    pub fn arena_len(&self) -> usize {
        self.simplices.len()
    }

    pub fn num_active(&self) -> usize {
        self.n_active
    }

    /// Active simplex ids in ascending order. This order defines the dense
    /// element indexing used by distances and finite element spaces.
    pub fn active_ids(&self) -> Vec<SimplexId> {
        (0..self.simplices.len()).filter(|&i| self.simplices[i].active).collect()
    }

    pub fn max_level(&self) -> u32 {
        self.simplices
            .iter()
            .filter(|s| s.active)
            .map(|s| s.level)
            .max()
            .unwrap_or(0)
    }

    /// Simplices (active and inactive) containing vertex `v`.
    pub fn patch_all(&self, v: VertexId) -> &[SimplexId] {
        &self.patches[v as usize]
    }

    /// Active simplices containing vertex `v`.
    pub fn patch(&self, v: VertexId) -> impl Iterator<Item = SimplexId> + '_ {
        self.patches[v as usize]
            .iter()
            .copied()
            .filter(move |&s| self.simplices[s].active)
    }

    pub fn boundary_faces(&self) -> &BTreeSet<Face> {
        &self.boundary
    }

    pub fn gamma_faces(&self) -> &BTreeSet<Face> {
        &self.gamma
    }

    pub fn is_boundary_face(&self, f: &[VertexId]) -> bool {
        self.boundary.contains(f)
    }

    pub fn is_gamma_face(&self, f: &[VertexId]) -> bool {
        self.gamma.contains(f)
    }

    /// Replaces the Dirichlet part Γ. Every face must be a boundary face.
    pub fn set_gamma(&mut self, faces: Vec<Face>) -> Result<()> {
        let mut gamma = BTreeSet::new();
        for mut f in faces {
            f.sort_unstable();
            if !self.boundary.contains(&f) {
                return Err(Error::InvalidMesh(format!("Γ face {f:?} is not a boundary face")));
            }
            gamma.insert(f);
        }
        self.gamma = gamma;
        Ok(())
    }

    /// Sets Γ to the boundary faces whose vertices all satisfy `pred`.
    pub fn set_gamma_where(&mut self, pred: impl Fn(&[f64]) -> bool) {
        let gamma = self
            .boundary
            .iter()
            .filter(|f| f.iter().all(|&v| pred(&self.vertex_f64(v))))
            .cloned()
            .collect();
        self.gamma = gamma;
    }

    /// Γ = ∂Ω.
    pub fn set_gamma_all(&mut self) {
        self.gamma = self.boundary.clone();
    }

    /// Signed determinant of the edge matrix `[x_1-x_0, …, x_d-x_0]`.
    pub fn signed_volume_exact(&self, id: SimplexId) -> BigRational {
        let s = &self.simplices[id];
        let d = self.dim;
        let x0 = &self.coords[s.vertices[0] as usize];
        let mut m: Vec<Vec<BigRational>> = (1..=d)
            .map(|i| {
                let xi = &self.coords[s.vertices[i] as usize];
                (0..d).map(|c| xi[c].to_rational() - x0[c].to_rational()).collect()
            })
            .collect();
        let det = det_rational(&mut m);
        det / BigRational::from_integer(BigInt::from(factorial(d)))
    }

    pub fn volume_exact(&self, id: SimplexId) -> BigRational {
        self.signed_volume_exact(id).abs()
    }

    pub fn volume(&self, id: SimplexId) -> f64 {
        let s = &self.simplices[id];
        let d = self.dim;
        let x0 = self.vertex_f64(s.vertices[0]);
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| {
            self.coords[s.vertices[c + 1] as usize][r].to_f64() - x0[r]
        });
        m.determinant().abs() / factorial(d) as f64
    }

    /// Mesh size `2^{-level/d}`.
    pub fn h(&self, id: SimplexId) -> f64 {
        2f64.powf(-(self.simplices[id].level as f64) / self.dim as f64)
    }

    /// Whether two simplices share at least one vertex.
    pub fn touching(&self, a: SimplexId, b: SimplexId) -> bool {
        let sb = &self.simplices[b];
        self.simplices[a].vertices.iter().any(|&v| sb.contains(v))
    }

    /// The active simplex of `self` that contains simplex `id` (itself if
    /// active), found by walking parents.
    pub fn active_ancestor(&self, mut id: SimplexId, is_target: impl Fn(SimplexId) -> bool) -> Option<SimplexId> {
        loop {
            if is_target(id) {
                return Some(id);
            }
            id = self.simplices[id].parent?;
        }
    }
}

pub(crate) fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn det_rational(m: &mut [Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut det = BigRational::from_integer(1.into());
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pivot;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: i64) -> Dyadic {
        Dyadic::from_int(v)
    }

    #[test]
    fn rejects_degenerate_and_malformed_input() {
        let coords = vec![vec![d(0), d(0)], vec![d(1), d(0)], vec![d(2), d(0)]];
        let err = SimplicialMesh::from_parts(2, coords, vec![(vec![0, 1, 2], 2, 0)], vec![]);
        assert!(matches!(err, Err(Error::DegenerateSimplex(0))));

        let coords = vec![vec![d(0), d(0)], vec![d(1), d(0)], vec![d(0), d(1)]];
        let err = SimplicialMesh::from_parts(2, coords.clone(), vec![(vec![0, 1, 7], 2, 0)], vec![]);
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
        let err = SimplicialMesh::from_parts(2, coords.clone(), vec![(vec![0, 1, 2], 3, 0)], vec![]);
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
        let err = SimplicialMesh::from_parts(9, coords, vec![], vec![]);
        assert!(matches!(err, Err(Error::UnsupportedDimension(9))));
    }

    #[test]
    fn rejects_hanging_vertices() {
        // Two triangles sharing the edge (0,0)-(1,0) only from one side: the
        // lower triangle is split, the upper one is not.
        let coords = vec![
            vec![d(0), d(0)],
            vec![d(2), d(0)],
            vec![d(0), d(2)],
            vec![d(1), d(0)],
            vec![d(0), d(-2)],
        ];
        let simplices = vec![
            (vec![0, 1, 2], 2, 0),
            (vec![0, 3, 4], 2, 0),
            (vec![3, 1, 4], 2, 0),
        ];
        let err = SimplicialMesh::from_parts(2, coords, simplices, vec![]);
        assert!(matches!(err, Err(Error::InvalidMesh(_))), "{err:?}");
    }

    #[test]
    fn exact_volume_matches_float_volume() {
        let m = SimplicialMesh::kuhn(3, 2).unwrap();
        for id in m.active_ids() {
            let exact = m.volume_exact(id);
            assert_eq!(exact, BigRational::new(1.into(), 48.into()));
            assert!((m.volume(id) - 1.0 / 48.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_must_lie_on_the_boundary() {
        let mut m = SimplicialMesh::kuhn(2, 2).unwrap();
        let interior: Face = {
            let s = m.simplex(0);
            (0..3).map(|j| s.face(j)).find(|f| !m.is_boundary_face(f)).unwrap()
        };
        assert!(m.set_gamma(vec![interior]).is_err());
        m.set_gamma_where(|x| x[0] == 0.0);
        assert_eq!(m.gamma_faces().len(), 2);
    }
}
