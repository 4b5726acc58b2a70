//! Global Lagrange and Crouzeix–Raviart spaces on an active mesh.

use std::collections::{HashMap, HashSet};
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::decomposition::decompose;
use super::multiindex::MultiIndex;
use super::poly::{monomial_mean, BarycentricPoly};
use super::reference::{self, nodal_basis, nodes};
use crate::error::{Error, Result};
use crate::mesh::{SimplexId, SimplicialMesh, VertexId};

/// Highest Lagrange degree accepted.
pub const MAX_DEGREE: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Lagrange { degree: u32 },
    LagrangeZeroTrace { degree: u32 },
    CrouzeixRaviart,
    CrouzeixRaviartZeroTrace,
}

impl SpaceKind {
    /// Polynomial degree of the local shape functions.
    pub fn degree(&self) -> u32 {
        match *self {
            SpaceKind::Lagrange { degree } | SpaceKind::LagrangeZeroTrace { degree } => degree,
            _ => 1,
        }
    }

    pub fn is_cr(&self) -> bool {
        matches!(self, SpaceKind::CrouzeixRaviart | SpaceKind::CrouzeixRaviartZeroTrace)
    }

    pub fn zero_trace(&self) -> bool {
        matches!(self, SpaceKind::LagrangeZeroTrace { .. } | SpaceKind::CrouzeixRaviartZeroTrace)
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Lagrange { degree } => write!(f, "P{degree}"),
            SpaceKind::LagrangeZeroTrace { degree } => write!(f, "P{degree}-zero-trace"),
            SpaceKind::CrouzeixRaviart => f.write_str("CR"),
            SpaceKind::CrouzeixRaviartZeroTrace => f.write_str("CR-zero-trace"),
        }
    }
}

/// Finite element space on a snapshot of the active mesh. Element `e`
/// refers to the `e`-th entry of [`SimplicialMesh::active_ids`].
#[derive(Clone, Debug)]
pub struct FeSpace {
    kind: SpaceKind,
    dim: usize,
    elements: Vec<SimplexId>,
    element_vertices: Vec<Vec<VertexId>>,
    volumes: Vec<f64>,
    levels: Vec<u32>,
    vertex_coords: Vec<Vec<f64>>,
    local_dofs: Vec<Vec<Option<usize>>>,
    n_dofs: usize,
    gamma_subsets: HashSet<Vec<VertexId>>,
    basis_transform: DMatrix<f64>,
}

/// Global key of a Lagrange node: vertex ids with positive multiplicity.
pub(crate) fn node_key(verts: &[VertexId], alpha: &MultiIndex) -> Vec<(VertexId, u32)> {
    let mut key: Vec<(VertexId, u32)> = alpha.support().map(|j| (verts[j], alpha.get(j))).collect();
    key.sort_unstable();
    key
}

impl FeSpace {
    pub fn new(mesh: &SimplicialMesh, kind: SpaceKind) -> Result<Self> {
        let d = mesh.dim();
        match kind {
            SpaceKind::Lagrange { degree } | SpaceKind::LagrangeZeroTrace { degree } => {
                if degree == 0 || degree > MAX_DEGREE {
                    return Err(Error::InvalidParameter(format!(
                        "Lagrange degree must be in 1..={MAX_DEGREE}, got {degree}"
                    )));
                }
            }
            _ => {
                if d < 2 {
                    return Err(Error::InvalidParameter("Crouzeix–Raviart elements need d >= 2".into()));
                }
            }
        }
        let elements = mesh.active_ids();
        let element_vertices: Vec<Vec<VertexId>> =
            elements.iter().map(|&s| mesh.simplex(s).vertices().to_vec()).collect();
        let mut gamma_subsets = HashSet::new();
        for f in mesh.gamma_faces() {
            for mask in 1u32..(1 << f.len()) {
                let sub: Vec<VertexId> = (0..f.len()).filter(|b| mask >> b & 1 == 1).map(|b| f[b]).collect();
                gamma_subsets.insert(sub);
            }
        }

        let mut local_dofs = Vec::with_capacity(elements.len());
        let mut n_dofs = 0;
        if kind.is_cr() {
            let mut faces: HashMap<Vec<VertexId>, usize> = HashMap::new();
            for (e, &s) in elements.iter().enumerate() {
                let t = mesh.simplex(s);
                let dofs = (0..=d)
                    .map(|j| {
                        let f = t.face(j);
                        if kind.zero_trace() && mesh.is_gamma_face(&f) {
                            return None;
                        }
                        Some(*faces.entry(f).or_insert_with(|| {
                            n_dofs += 1;
                            n_dofs - 1
                        }))
                    })
                    .collect();
                debug_assert_eq!(local_dofs.len(), e);
                local_dofs.push(dofs);
            }
        } else {
            let k = kind.degree();
            let local = nodes(d, k);
            let mut keys: HashMap<Vec<(VertexId, u32)>, usize> = HashMap::new();
            for verts in &element_vertices {
                let dofs = local
                    .iter()
                    .map(|alpha| {
                        let key = node_key(verts, alpha);
                        if kind.zero_trace() {
                            let support: Vec<VertexId> = key.iter().map(|&(v, _)| v).collect();
                            if gamma_subsets.contains(&support) {
                                return None;
                            }
                        }
                        Some(*keys.entry(key).or_insert_with(|| {
                            n_dofs += 1;
                            n_dofs - 1
                        }))
                    })
                    .collect();
                local_dofs.push(dofs);
            }
        }

        let basis_transform = if kind.is_cr() {
            DMatrix::from_fn(d + 1, d + 1, |k, j| if j == k { 1.0 - d as f64 } else { 1.0 })
        } else {
            let n = local_dofs.first().map_or(0, Vec::len);
            DMatrix::identity(n, n)
        };

        Ok(FeSpace {
            kind,
            dim: d,
            volumes: elements.iter().map(|&s| mesh.volume(s)).collect(),
            levels: elements.iter().map(|&s| mesh.simplex(s).level()).collect(),
            vertex_coords: (0..mesh.num_vertices() as VertexId).map(|v| mesh.vertex_f64(v)).collect(),
            elements,
            element_vertices,
            local_dofs,
            n_dofs,
            gamma_subsets,
            basis_transform,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degree of the nodal representation of local functions.
    pub fn degree(&self) -> u32 {
        self.kind.degree()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_local(&self) -> usize {
        self.basis_transform.ncols()
    }

    /// Number of degree-[`degree`](Self::degree) nodes per element.
    pub fn n_nodal(&self) -> usize {
        self.basis_transform.nrows()
    }

    pub fn simplex_id(&self, e: usize) -> SimplexId {
        self.elements[e]
    }

    pub fn elements(&self) -> &[SimplexId] {
        &self.elements
    }

    pub fn element_vertices(&self, e: usize) -> &[VertexId] {
        &self.element_vertices[e]
    }

    pub fn volume(&self, e: usize) -> f64 {
        self.volumes[e]
    }

    pub fn level(&self, e: usize) -> u32 {
        self.levels[e]
    }

    pub fn vertex_coords(&self, v: VertexId) -> &[f64] {
        &self.vertex_coords[v as usize]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_coords.len()
    }

    pub fn element_dofs(&self, e: usize) -> &[Option<usize>] {
        &self.local_dofs[e]
    }

    /// Nodal values (degree [`degree`](Self::degree)) of each local basis
    /// function, one column per basis function.
    pub fn basis_transform(&self) -> &DMatrix<f64> {
        &self.basis_transform
    }

    /// Whether the vertex set spans a subsimplex of some Γ face.
    pub fn on_gamma(&self, support: &[VertexId]) -> bool {
        let mut s = support.to_vec();
        s.sort_unstable();
        self.gamma_subsets.contains(&s)
    }

    /// `∫_T b_i b_l` for the local basis.
    pub fn local_mass(&self, e: usize) -> DMatrix<f64> {
        let p = &self.basis_transform;
        let m = reference::mass(self.dim, self.degree(), self.degree());
        p.transpose() * &*m * p * self.volumes[e]
    }

    /// Gradients of the barycentric coordinates, one row per vertex.
    pub fn barycentric_gradients(&self, e: usize) -> DMatrix<f64> {
        let d = self.dim;
        let v = &self.element_vertices[e];
        let x0 = &self.vertex_coords[v[0] as usize];
        let edges = DMatrix::from_fn(d, d, |r, c| self.vertex_coords[v[c + 1] as usize][r] - x0[r]);
        let inv = edges.try_inverse().expect("active simplices are nondegenerate");
        let mut g = DMatrix::zeros(d + 1, d);
        for j in 1..=d {
            for c in 0..d {
                g[(j, c)] = inv[(j - 1, c)];
                g[(0, c)] -= inv[(j - 1, c)];
            }
        }
        g
    }

    /// Physical coordinates of a point given in barycentric coordinates.
    pub fn map_to_physical(&self, e: usize, lambda: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (j, &v) in self.element_vertices[e].iter().enumerate() {
            for (c, xc) in x.iter_mut().enumerate() {
                *xc += lambda[j] * self.vertex_coords[v as usize][c];
            }
        }
        x
    }
}

/// Exact local mass matrix in the local basis of `kind` on a simplex of
/// volume `vol`.
pub fn local_mass_exact(kind: SpaceKind, d: usize, vol: &BigRational) -> Vec<Vec<BigRational>> {
    if kind.is_cr() {
        let den = BigInt::from((d + 2) * (d + 1));
        let di = d as i64;
        return (0..=d)
            .map(|j| {
                (0..=d)
                    .map(|l| {
                        let num = 2 - di + if j == l { di * di } else { 0 };
                        vol * BigRational::new(BigInt::from(num), den.clone())
                    })
                    .collect()
            })
            .collect();
    }
    let basis = nodal_basis(d, kind.degree());
    basis
        .iter()
        .map(|a| basis.iter().map(|b| vol * (a * b).mean()).collect())
        .collect()
}

/// Local pieces of `D_i v` on the patch of vertex `i`.
#[derive(Clone, Debug)]
pub struct PatchDecomposition {
    pub vertex: VertexId,
    /// `(element, local vertex index of i, D_j(v|_T))`.
    pub pieces: Vec<(usize, usize, BarycentricPoly)>,
}

/// Exact local polynomial of a Lagrange function on element `e`.
pub fn local_poly(space: &FeSpace, e: usize, coeffs: &[BigRational]) -> BarycentricPoly {
    let d = space.dim();
    let mut p = BarycentricPoly::zero(d + 1);
    for (n, dof) in nodal_basis(d, space.degree()).iter().zip(space.element_dofs(e)) {
        if let Some(g) = dof {
            if !coeffs[*g].is_zero() {
                p = p + n.scale(&coeffs[*g]);
            }
        }
    }
    p
}

/// `D_i v` for every vertex `i`, for a Lagrange function with exact
/// coefficients.
pub fn global_decomposition(space: &FeSpace, coeffs: &[BigRational]) -> Result<Vec<PatchDecomposition>> {
    if space.kind().is_cr() {
        return Err(Error::InvalidParameter("decomposition needs a Lagrange space".into()));
    }
    if coeffs.len() != space.n_dofs() {
        return Err(Error::InvalidParameter("coefficient length does not match the space".into()));
    }
    let k = space.degree();
    let mut out: Vec<PatchDecomposition> = (0..space.num_vertices() as VertexId)
        .map(|vertex| PatchDecomposition {
            vertex,
            pieces: Vec::new(),
        })
        .collect();
    for e in 0..space.n_elements() {
        let v = local_poly(space, e, coeffs);
        for (j, &i) in space.element_vertices(e).iter().enumerate() {
            out[i as usize].pieces.push((e, j, decompose(j, &v, k)?));
        }
    }
    Ok(out)
}

/// `mean(λ^σ)` re-exported for callers building exact forms.
pub fn mean_of_monomial(sigma: &MultiIndex) -> BigRational {
    monomial_mean(sigma)
}
