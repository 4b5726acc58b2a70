use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use super::project::Projector;
use super::pwpoly::PiecewisePoly;
use crate::error::{Error, Result};
use crate::linalg::DENSE_SOLVE_LIMIT;
use crate::mesh::VertexId;
use crate::polyspace::reference::{self, nodes};
use crate::polyspace::space::node_key;
use crate::polyspace::FeSpace;

/// Which global operator a matrix or apply belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorId {
    Q,
    QGamma,
    QCr,
    C,
    CGamma,
    CCr,
}

impl OperatorId {
    pub fn projection_of(space: &FeSpace) -> Self {
        match (space.kind().is_cr(), space.kind().zero_trace()) {
            (true, _) => OperatorId::QCr,
            (false, true) => OperatorId::QGamma,
            (false, false) => OperatorId::Q,
        }
    }

    pub fn approximation_of(space: &FeSpace) -> Self {
        match (space.kind().is_cr(), space.kind().zero_trace()) {
            (true, _) => OperatorId::CCr,
            (false, true) => OperatorId::CGamma,
            (false, false) => OperatorId::C,
        }
    }
}

/// Local weighted projection onto degree `K−1` functions on one vertex patch.
struct Patch {
    /// `(element, local index of the patch vertex)`.
    members: Vec<(usize, usize)>,
    /// Patch dof of each degree `K−1` node, per member.
    local: Vec<Vec<Option<usize>>>,
    n: usize,
    gram: Option<Cholesky<f64, Dyn>>,
}

enum Kind {
    Lagrange { patches: Vec<Patch> },
    Cr { diag: Vec<f64> },
}

/// The approximation `C` of the L² projection, built from local weighted
/// projections on vertex patches (Lagrange) or diagonal face terms (CR).
pub struct OperatorC<'a> {
    proj: &'a Projector,
    kind: Kind,
}

impl<'a> OperatorC<'a> {
    pub fn new(proj: &'a Projector) -> Result<Self> {
        let space = proj.space();
        let kind = if space.kind().is_cr() {
            let mut diag = vec![0.0; space.n_dofs()];
            for e in 0..space.n_elements() {
                let m = space.local_mass(e);
                for (a, g) in space.element_dofs(e).iter().enumerate() {
                    if let Some(g) = g {
                        diag[*g] += m[(a, a)];
                    }
                }
            }
            Kind::Cr { diag }
        } else {
            Kind::Lagrange {
                patches: build_patches(space)?,
            }
        };
        Ok(OperatorC { proj, kind })
    }

    pub fn id(&self) -> OperatorId {
        OperatorId::approximation_of(self.proj.space())
    }

    pub fn projector(&self) -> &Projector {
        self.proj
    }

    /// Coefficients of `Cu` in the space.
    pub fn apply(&self, u: &PiecewisePoly) -> Result<Vec<f64>> {
        match &self.kind {
            Kind::Cr { diag } => Ok(self.proj.rhs(u).iter().zip(diag).map(|(r, m)| r / m).collect()),
            Kind::Lagrange { patches } => Ok(self.apply_lagrange(patches, u)),
        }
    }

    /// `C` applied to a function of the space given by coefficients.
    pub fn apply_coeffs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply(&self.proj.to_pw(x))
    }

    fn apply_lagrange(&self, patches: &[Patch], u: &PiecewisePoly) -> Vec<f64> {
        let space = self.proj.space();
        let d = space.dim();
        let k = space.degree();
        let q = u.degree();
        let kn = nodes(d, k);
        let eval = reference::eval_at_nodes(d, k - 1, k);
        let contributions: Vec<Vec<(usize, f64)>> = patches
            .par_iter()
            .map(|p| {
                let Some(gram) = &p.gram else { return Vec::new() };
                let mut r = DVector::zeros(p.n);
                for ((e, j), map) in p.members.iter().zip(&p.local) {
                    let y = reference::weighted_mass(d, k - 1, q, *j);
                    let loc = &*y * DVector::from_column_slice(u.element(*e)) * space.volume(*e);
                    for (a, pa) in map.iter().enumerate() {
                        if let Some(pa) = pa {
                            r[*pa] += loc[a];
                        }
                    }
                }
                let c = gram.solve(&r);
                let mut out: HashMap<usize, f64> = HashMap::new();
                for ((e, j), map) in p.members.iter().zip(&p.local) {
                    let ce = DVector::from_iterator(map.len(), map.iter().map(|pa| pa.map_or(0.0, |pa| c[pa])));
                    let vals = &*eval * ce;
                    for (m, g) in space.element_dofs(*e).iter().enumerate() {
                        let (Some(g), w) = (g, kn[m].get(*j)) else { continue };
                        if w > 0 {
                            out.insert(*g, w as f64 / k as f64 * vals[m]);
                        }
                    }
                }
                out.into_iter().collect()
            })
            .collect();
        let mut x = vec![0.0; space.n_dofs()];
        for c in contributions {
            for (g, v) in c {
                x[g] += v;
            }
        }
        x
    }

    /// Form matrix `B_mn = ⟨C b_n, b_m⟩`, assembled directly from the local
    /// operators.
    pub fn form_matrix(&self) -> Result<DMatrix<f64>> {
        let space = self.proj.space();
        let n = space.n_dofs();
        if n > DENSE_SOLVE_LIMIT {
            return Err(Error::InvalidParameter(format!("{n} dofs exceed the dense limit")));
        }
        let m = self.proj.mass_dense()?;
        match &self.kind {
            Kind::Cr { diag } => {
                let dinv = DMatrix::from_diagonal(&DVector::from_iterator(n, diag.iter().map(|v| 1.0 / v)));
                Ok(&m * dinv * &m)
            }
            Kind::Lagrange { patches } => {
                let d = space.dim();
                let k = space.degree();
                let mut b = DMatrix::zeros(n, n);
                for p in patches {
                    let Some(gram) = &p.gram else { continue };
                    let mut cols: Vec<usize> = Vec::new();
                    let mut col_of: HashMap<usize, usize> = HashMap::new();
                    for (e, _) in &p.members {
                        for g in space.element_dofs(*e).iter().flatten() {
                            col_of.entry(*g).or_insert_with(|| {
                                cols.push(*g);
                                cols.len() - 1
                            });
                        }
                    }
                    let mut r = DMatrix::zeros(p.n, cols.len());
                    for ((e, j), map) in p.members.iter().zip(&p.local) {
                        let w = reference::weighted_mass(d, k - 1, k, *j);
                        for (a, pa) in map.iter().enumerate() {
                            let Some(pa) = pa else { continue };
                            for (c, g) in space.element_dofs(*e).iter().enumerate() {
                                if let Some(g) = g {
                                    r[(*pa, col_of[g])] += w[(a, c)] * space.volume(*e);
                                }
                            }
                        }
                    }
                    let local = r.transpose() * gram.solve(&r);
                    for (a, &ga) in cols.iter().enumerate() {
                        for (c, &gc) in cols.iter().enumerate() {
                            b[(ga, gc)] += local[(a, c)];
                        }
                    }
                }
                Ok(b)
            }
        }
    }

    /// Matrix of `C` on the space: column `n` holds the coefficients of
    /// `C b_n`, obtained by applying the operator.
    pub fn operator_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.proj.space().n_dofs();
        if n > DENSE_SOLVE_LIMIT {
            return Err(Error::InvalidParameter(format!("{n} dofs exceed the dense limit")));
        }
        let cols: Result<Vec<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                self.apply_coeffs(&e)
            })
            .collect();
        let cols = cols?;
        Ok(DMatrix::from_fn(n, n, |r, c| cols[c][r]))
    }
}

fn build_patches(space: &FeSpace) -> Result<Vec<Patch>> {
    let d = space.dim();
    let k = space.degree();
    let low = nodes(d, k - 1);
    let mut members: HashMap<VertexId, Vec<(usize, usize)>> = HashMap::new();
    for e in 0..space.n_elements() {
        for (j, &v) in space.element_vertices(e).iter().enumerate() {
            members.entry(v).or_default().push((e, j));
        }
    }
    let mut verts: Vec<VertexId> = members.keys().copied().collect();
    verts.sort_unstable();
    verts
        .into_par_iter()
        .map(|v| {
            let members = members[&v].clone();
            let mut keys: HashMap<Vec<(VertexId, u32)>, usize> = HashMap::new();
            let mut local = Vec::with_capacity(members.len());
            for &(e, _) in &members {
                let ev = space.element_vertices(e);
                let map: Vec<Option<usize>> = low
                    .iter()
                    .map(|beta| {
                        let key = node_key(ev, beta);
                        if space.kind().zero_trace() {
                            let mut support: Vec<VertexId> = key.iter().map(|&(w, _)| w).collect();
                            if !support.contains(&v) {
                                support.push(v);
                            }
                            if space.on_gamma(&support) {
                                return None;
                            }
                        }
                        let next = keys.len();
                        Some(*keys.entry(key).or_insert(next))
                    })
                    .collect();
                local.push(map);
            }
            let n = keys.len();
            let gram = if n == 0 {
                None
            } else {
                let mut g = DMatrix::zeros(n, n);
                for (&(e, j), map) in members.iter().zip(&local) {
                    let w = reference::weighted_mass(d, k - 1, k - 1, j);
                    for (a, pa) in map.iter().enumerate() {
                        let Some(pa) = pa else { continue };
                        for (c, pc) in map.iter().enumerate() {
                            if let Some(pc) = pc {
                                g[(*pa, *pc)] += w[(a, c)] * space.volume(e);
                            }
                        }
                    }
                }
                Some(Cholesky::new(g).ok_or(Error::NotPositiveDefinite)?)
            };
            Ok(Patch { members, local, n, gram })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::distance::{Adjacency, ElementDistance};
    use crate::mesh::SimplicialMesh;
    use crate::polyspace::SpaceKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh(d: usize, rounds: usize, gamma: bool) -> SimplicialMesh {
        let mut m = SimplicialMesh::kuhn(d, 2).unwrap();
        for r in 0..rounds {
            let ids = m.active_ids();
            m.refine_closure(&[ids[(r * 7 + 1) % ids.len()]]).unwrap();
        }
        if gamma {
            m.set_gamma_where(|x| x[0] == 0.0);
        }
        m
    }

    fn random_pw(space: &FeSpace, degree: u32, rng: &mut ChaCha8Rng) -> PiecewisePoly {
        let mut u = PiecewisePoly::zeros(space.dim(), degree, space.n_elements());
        for v in u.values_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        u
    }

    fn kinds() -> Vec<SpaceKind> {
        vec![
            SpaceKind::Lagrange { degree: 1 },
            SpaceKind::Lagrange { degree: 2 },
            SpaceKind::LagrangeZeroTrace { degree: 1 },
            SpaceKind::LagrangeZeroTrace { degree: 3 },
            SpaceKind::CrouzeixRaviart,
            SpaceKind::CrouzeixRaviartZeroTrace,
        ]
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    #[test]
    fn form_matrix_matches_applied_operator() {
        for d in [2, 3] {
            for kind in kinds() {
                let space = FeSpace::new(&mesh(d, 3, true), kind).unwrap();
                let proj = Projector::new(space).unwrap();
                let c = OperatorC::new(&proj).unwrap();
                let b = c.form_matrix().unwrap();
                let mc = proj.mass_dense().unwrap() * c.operator_matrix().unwrap();
                let scale = max_abs(&b);
                assert!(max_abs(&(&b - &mc)) <= 1e-12 * scale.max(1.0), "{kind} d={d}");
                assert!(max_abs(&(&b - b.transpose())) <= 1e-12 * scale.max(1.0), "{kind} d={d}");
            }
        }
    }

    #[test]
    fn c_factors_through_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in kinds() {
            let space = FeSpace::new(&mesh(2, 4, true), kind).unwrap();
            let proj = Projector::new(space).unwrap();
            let c = OperatorC::new(&proj).unwrap();
            let u = random_pw(proj.space(), kind.degree() + 2, &mut rng);
            let direct = c.apply(&u).unwrap();
            let via_q = c.apply_coeffs(&proj.project(&u).unwrap()).unwrap();
            let scale = direct.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            assert!(direct.iter().zip(&via_q).all(|(a, b)| (a - b).abs() <= 1e-11 * scale), "{kind}");
        }
    }

    #[test]
    fn identity_on_lower_degree_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2, 3] {
            for kind in [
                SpaceKind::Lagrange { degree: 1 },
                SpaceKind::Lagrange { degree: 3 },
                SpaceKind::LagrangeZeroTrace { degree: 2 },
            ] {
                let m = mesh(d, 3, true);
                let low_kind = match kind {
                    SpaceKind::LagrangeZeroTrace { degree } => SpaceKind::LagrangeZeroTrace { degree: degree - 1 },
                    other => SpaceKind::Lagrange { degree: other.degree() - 1 },
                };
                let space = FeSpace::new(&m, kind).unwrap();
                let proj = Projector::new(space).unwrap();
                let c = OperatorC::new(&proj).unwrap();
                let v = if low_kind.degree() == 0 {
                    let mut v = PiecewisePoly::zeros(d, 0, proj.space().n_elements());
                    v.values_mut().fill(1.7);
                    v
                } else {
                    let low = FeSpace::new(&m, low_kind).unwrap();
                    let x: Vec<f64> = (0..low.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    PiecewisePoly::from_space(&low, &x)
                };
                let cv = proj.to_pw(&c.apply(&v).unwrap());
                let diff = &cv - &v.elevate(kind.degree());
                assert!(diff.values().iter().all(|e| e.abs() < 1e-11), "{kind} d={d}");
            }
        }
    }

    #[test]
    fn c_is_bounded_by_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in kinds() {
            let space = FeSpace::new(&mesh(3, 3, true), kind).unwrap();
            let proj = Projector::new(space).unwrap();
            let vols = proj.volumes();
            let c = OperatorC::new(&proj).unwrap();
            for _ in 0..10 {
                let u = random_pw(proj.space(), 3, &mut rng);
                let cu = c.apply(&u).unwrap();
                let inner: f64 = cu.iter().zip(proj.rhs(&u)).map(|(a, b)| a * b).sum();
                assert!(inner >= -1e-14);
                assert!(inner <= u.l2_norm(&vols).powi(2) * (1.0 + 1e-12), "{kind}");
            }
        }
    }

    #[test]
    fn support_grows_by_one_layer() {
        let m = mesh(2, 5, false);
        let dist = ElementDistance::new(&m, Adjacency::Vertex);
        for kind in [SpaceKind::Lagrange { degree: 2 }, SpaceKind::CrouzeixRaviart] {
            let space = FeSpace::new(&m, kind).unwrap();
            let proj = Projector::new(space).unwrap();
            let c = OperatorC::new(&proj).unwrap();
            let n = proj.space().n_elements();
            for t in [0, n / 2, n - 1] {
                let mut u = PiecewisePoly::zeros(2, 1, n);
                u.element_mut(t).copy_from_slice(&[1.0, -0.5, 2.0]);
                let cu = proj.to_pw(&c.apply(&u).unwrap());
                for s in cu.support() {
                    assert!(dist.distance(t, s).unwrap() <= 1, "{kind}");
                }
            }
        }
    }

    #[test]
    fn cr_in_two_dimensions_equals_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let space = FeSpace::new(&mesh(2, 6, false), SpaceKind::CrouzeixRaviart).unwrap();
        let proj = Projector::new(space).unwrap();
        let c = OperatorC::new(&proj).unwrap();
        for _ in 0..5 {
            let u = random_pw(proj.space(), 2, &mut rng);
            let a = c.apply(&u).unwrap();
            let b = proj.project(&u).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-11));
        }
    }
}
