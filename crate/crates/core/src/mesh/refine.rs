use std::collections::BTreeSet;

use super::{Face, SimplexId, SimplicialMesh, TaggedSimplex, VertexId};
use crate::error::{Error, Result};

/// Outcome of one closure call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClosureReport {
    pub bisections: usize,
    pub sweeps: usize,
}

/// Outcome of one limited-grading refinement call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LgReport {
    /// Outer rounds that ran a closure step.
    pub rounds: usize,
    pub bisections: usize,
}

impl SimplicialMesh {
    /// Bisects one active simplex and returns the midpoint vertex and the two
    /// children. Does not restore conformity.
    pub fn bisect(&mut self, id: SimplexId) -> Result<(VertexId, [SimplexId; 2])> {
        let s = self.simplices.get(id).ok_or(Error::InactiveSimplex(id))?;
        if !s.active {
            return Err(Error::InactiveSimplex(id));
        }
        let d = self.dim;
        let k = s.tag;
        let verts = s.vertices.clone();
        let level = s.level;
        let (a, b) = (verts[0], verts[k]);
        let z = self.midpoint_vertex(a, b)?;

        let mut c1 = verts.clone();
        c1[k] = z;
        let mut c2: Vec<VertexId> = verts[1..=k].to_vec();
        c2.push(z);
        c2.extend_from_slice(&verts[k + 1..]);
        let tag = if k > 1 { k - 1 } else { d };

        self.simplices[id].active = false;
        self.n_active -= 1;
        let mk = |vertices| TaggedSimplex {
            vertices,
            tag,
            level: level + 1,
            parent: Some(id),
            children: None,
            active: true,
        };
        let id1 = self.push_simplex(mk(c1));
        let id2 = self.push_simplex(mk(c2));
        self.simplices[id].children = Some([id1, id2]);

        // Faces of the parent containing the bisected edge split in two.
        for m in (1..=d).filter(|&m| m != k) {
            let face = self.simplices[id].face(m);
            for set in [&mut self.boundary, &mut self.gamma] {
                if set.remove(&face) {
                    set.insert(replace_sorted(&face, b, z));
                    set.insert(replace_sorted(&face, a, z));
                }
            }
        }
        Ok((z, [id1, id2]))
    }

    fn midpoint_vertex(&mut self, a: VertexId, b: VertexId) -> Result<VertexId> {
        let p = self.midpoint_coords(a, b)?;
        if let Some(&v) = self.lookup.get(&p) {
            return Ok(v);
        }
        let v = self.coords.len() as VertexId;
        self.coords.push(p.clone());
        self.lookup.insert(p, v);
        self.patches.push(Vec::new());
        Ok(v)
    }

    pub(crate) fn midpoint_coords(&self, a: VertexId, b: VertexId) -> Result<Vec<crate::dyadic::Dyadic>> {
        let (pa, pb) = (&self.coords[a as usize], &self.coords[b as usize]);
        pa.iter().zip(pb).map(|(x, y)| x.midpoint(y)).collect()
    }

    /// Whether some edge of the simplex has an existing vertex at its
    /// midpoint.
    pub fn has_hanging_vertex(&self, id: SimplexId) -> bool {
        let v = &self.simplices[id].vertices;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                match self.midpoint_coords(v[i], v[j]) {
                    Ok(p) if self.lookup.contains_key(&p) => return true,
                    _ => {}
                }
            }
        }
        false
    }

    /// Every `(active simplex, vertex)` pair where the vertex sits at the
    /// midpoint of an edge of the simplex.
    pub fn hanging_vertices(&self) -> Vec<(SimplexId, VertexId)> {
        let mut out = Vec::new();
        for id in self.active_ids() {
            let v = &self.simplices[id].vertices;
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    if let Ok(p) = self.midpoint_coords(v[i], v[j]) {
                        if let Some(&h) = self.lookup.get(&p) {
                            out.push((id, h));
                        }
                    }
                }
            }
        }
        out
    }

    /// Bisects all marked simplices and then every simplex with a hanging
    /// vertex until the mesh is conforming again.
    pub fn refine_closure(&mut self, marked: &[SimplexId]) -> Result<ClosureReport> {
        let cap = 64 * (self.max_level() as usize + 1);
        self.refine_closure_capped(marked, cap)
    }

    /// [`refine_closure`](Self::refine_closure) with an explicit bound on the
    /// number of sweeps.
    pub fn refine_closure_capped(&mut self, marked: &[SimplexId], cap: usize) -> Result<ClosureReport> {
        for &m in marked {
            if m >= self.simplices.len() || !self.simplices[m].active {
                return Err(Error::InactiveSimplex(m));
            }
        }
        let mut report = ClosureReport::default();
        let mut work: BTreeSet<SimplexId> = marked.iter().copied().collect();
        while !work.is_empty() {
            report.sweeps += 1;
            if report.sweeps > cap {
                return Err(Error::ClosureNonTermination { cap });
            }
            let mut candidates = BTreeSet::new();
            for id in work {
                if !self.simplices[id].active {
                    continue;
                }
                let s = &self.simplices[id];
                let (a, b) = (s.vertices[0], s.vertices[s.tag]);
                let (_, children) = self.bisect(id)?;
                report.bisections += 1;
                candidates.extend(children);
                candidates.extend(self.patch(a).filter(|&t| self.simplices[t].contains(b)));
            }
            work = candidates
                .into_iter()
                .filter(|&t| self.simplices[t].active && self.has_hanging_vertex(t))
                .collect();
        }
        Ok(report)
    }

    /// Active simplices `T` touching some `T'` with `level(T) < level(T') - alpha`.
    pub fn lg_violators(&self, alpha: u32) -> Vec<SimplexId> {
        let mut out = BTreeSet::new();
        for v in 0..self.coords.len() as VertexId {
            let max = self.patch(v).map(|s| self.simplices[s].level).max().unwrap_or(0);
            out.extend(self.patch(v).filter(|&s| self.simplices[s].level + alpha < max));
        }
        out.into_iter().collect()
    }

    /// Checks that touching active simplices differ by at most `alpha` levels.
    pub fn check_limited_grading(&self, alpha: u32) -> Result<()> {
        for v in 0..self.coords.len() as VertexId {
            let lo = self.patch(v).min_by_key(|&s| (self.simplices[s].level, s));
            let hi = self.patch(v).max_by_key(|&s| (self.simplices[s].level, usize::MAX - s));
            if let (Some(lo), Some(hi)) = (lo, hi) {
                let (la, lb) = (self.simplices[lo].level, self.simplices[hi].level);
                if lb - la > alpha {
                    return Err(Error::GradingPrecondition {
                        a: lo,
                        b: hi,
                        level_a: la,
                        level_b: lb,
                        alpha,
                    });
                }
            }
        }
        Ok(())
    }

    /// Refinement that keeps levels of touching simplices within `alpha`:
    /// closure of the marked set, then repeatedly refine every simplex that
    /// lags more than `alpha` levels behind a touching one.
    ///
    /// The input mesh must already satisfy the grading condition.
    pub fn refine_lg(&mut self, marked: &[SimplexId], alpha: u32) -> Result<LgReport> {
        if alpha == 0 {
            return Err(Error::InvalidParameter("alpha must be at least 1".into()));
        }
        self.check_limited_grading(alpha)?;
        let mut report = LgReport::default();
        let mut m = marked.to_vec();
        while !m.is_empty() {
            report.rounds += 1;
            report.bisections += self.refine_closure(&m)?.bisections;
            m = self.lg_violators(alpha);
        }
        Ok(report)
    }

    /// Refines every active simplex once, then closes.
    pub fn refine_uniform(&mut self) -> Result<ClosureReport> {
        let all = self.active_ids();
        self.refine_closure(&all)
    }
}

fn replace_sorted(face: &Face, from: VertexId, to: VertexId) -> Face {
    let mut f: Face = face.iter().map(|&v| if v == from { to } else { v }).collect();
    f.sort_unstable();
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::audit;

    #[test]
    fn bisection_halves_volume_and_follows_tag_rule() {
        for d in 1..=4 {
            let mut m = SimplicialMesh::kuhn(d, 1).unwrap();
            let id = m.active_ids()[0];
            let vol = m.volume_exact(id);
            let parent = m.simplex(id).vertices().to_vec();
            let (z, [c1, c2]) = m.bisect(id).unwrap();
            let half = vol / num_rational::BigRational::from_integer(2.into());
            assert_eq!(m.volume_exact(c1), half);
            assert_eq!(m.volume_exact(c2), half);
            let expect_tag = if d > 1 { d - 1 } else { d };
            assert_eq!(m.simplex(c1).tag(), expect_tag);
            assert_eq!(m.simplex(c1).level(), 1);
            let mut e1 = parent.clone();
            e1[d] = z;
            assert_eq!(m.simplex(c1).vertices(), &e1[..]);
            let mut e2 = parent[1..=d].to_vec();
            e2.push(z);
            assert_eq!(m.simplex(c2).vertices(), &e2[..]);
            assert!(m.bisect(id).is_err());
        }
    }

    #[test]
    fn closure_restores_conformity() {
        for d in 1..=3 {
            let mut m = SimplicialMesh::kuhn(d, 2).unwrap();
            for round in 0..6 {
                let ids = m.active_ids();
                let pick = ids[(round * 7) % ids.len()];
                m.refine_closure(&[pick]).unwrap();
                assert!(m.hanging_vertices().is_empty());
                audit::check_conforming(&m).unwrap();
            }
        }
    }

    #[test]
    fn empty_marking_is_identity() {
        let mut m = SimplicialMesh::kuhn(2, 2).unwrap();
        let before = m.active_ids();
        let r = m.refine_closure(&[]).unwrap();
        assert_eq!(r.bisections, 0);
        assert_eq!(before, m.active_ids());
        let r = m.refine_lg(&[], 2).unwrap();
        assert_eq!(r.rounds, 0);
    }

    #[test]
    fn sweep_cap_reports_nontermination() {
        let mut m = SimplicialMesh::kuhn(2, 2).unwrap();
        // Refining an interior simplex twice needs a neighbour closure sweep.
        let id = m.active_ids()[3];
        let [c, _] = m.bisect(id).map(|(_, c)| c).unwrap();
        m.refine_closure(&[]).unwrap();
        let err = m.refine_closure_capped(&[c], 1);
        assert!(matches!(err, Err(Error::ClosureNonTermination { cap: 1 })), "{err:?}");
    }

    #[test]
    fn uniform_refinement_doubles_count() {
        let mut m = SimplicialMesh::kuhn(3, 1).unwrap();
        for _ in 0..3 {
            let n = m.num_active();
            m.refine_uniform().unwrap();
            assert_eq!(m.num_active(), 2 * n);
        }
        assert!(m.active_ids().iter().all(|&s| m.simplex(s).level() == 3));
    }

    #[test]
    fn boundary_faces_track_refinement() {
        let mut m = SimplicialMesh::kuhn(2, 1).unwrap();
        m.set_gamma_all();
        m.refine_uniform().unwrap();
        m.refine_uniform().unwrap();
        // Exactly the faces with a single owner.
        audit::check_conforming(&m).unwrap();
        assert_eq!(m.boundary_faces(), m.gamma_faces());
        let total: f64 = m
            .boundary_faces()
            .iter()
            .map(|f| {
                let a = m.vertex_f64(f[0]);
                let b = m.vertex_f64(f[1]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lg_precondition_names_the_pair() {
        let mut m = SimplicialMesh::kuhn(2, 2).unwrap();
        let corner = m.active_ids()[0];
        m.refine_closure(&[corner]).unwrap();
        for _ in 0..3 {
            let deepest = *m
                .active_ids()
                .iter()
                .max_by_key(|&&s| m.simplex(s).level())
                .unwrap();
            m.refine_closure(&[deepest]).unwrap();
        }
        match m.refine_lg(&[], 1) {
            Err(Error::GradingPrecondition { level_a, level_b, alpha, .. }) => {
                assert!(level_b - level_a > alpha)
            }
            other => panic!("expected precondition failure, got {other:?}"),
        }
        assert!(matches!(m.refine_lg(&[], 0), Err(Error::InvalidParameter(_))));
    }
}
