//! Graph distances between elements and grading of piecewise constant
//! functions.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{SimplexId, SimplicialMesh, VertexId};
use crate::error::{Error, Result};

/// Largest element count for which the full distance matrix is stored.
pub const DENSE_LIMIT: usize = 4000;

const UNREACHABLE: u16 = u16::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Adjacency {
    /// Neighbours share at least one vertex.
    Vertex,
    /// Neighbours share a `(d-1)`-face.
    Face,
}

/// Element distances on one mesh snapshot. Elements are indexed densely in
/// the order of [`SimplicialMesh::active_ids`].
#[derive(Clone, Debug)]
pub struct ElementDistance {
    kind: Adjacency,
    elements: Vec<SimplexId>,
    index: HashMap<SimplexId, usize>,
    neighbors: Vec<Vec<u32>>,
    dense: Option<Vec<u16>>,
}

impl ElementDistance {
    pub fn new(mesh: &SimplicialMesh, kind: Adjacency) -> Self {
        let elements = mesh.active_ids();
        let index: HashMap<_, _> = elements.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let n = elements.len();
        let mut neighbors = vec![Vec::new(); n];
        match kind {
            Adjacency::Vertex => {
                for v in 0..mesh.num_vertices() as VertexId {
                    let patch: Vec<usize> = mesh.patch(v).map(|s| index[&s]).collect();
                    for &a in &patch {
                        neighbors[a].extend(patch.iter().filter(|&&b| b != a).map(|&b| b as u32));
                    }
                }
            }
            Adjacency::Face => {
                let mut owners: HashMap<Vec<VertexId>, Vec<usize>> = HashMap::new();
                for (i, &s) in elements.iter().enumerate() {
                    for j in 0..=mesh.dim() {
                        owners.entry(mesh.simplex(s).face(j)).or_default().push(i);
                    }
                }
                for o in owners.values() {
                    for &a in o {
                        neighbors[a].extend(o.iter().filter(|&&b| b != a).map(|&b| b as u32));
                    }
                }
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
            nb.dedup();
        }
        let mut dist = ElementDistance {
            kind,
            elements,
            index,
            neighbors,
            dense: None,
        };
        if n <= DENSE_LIMIT {
            let rows: Vec<Vec<u16>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    dist.bfs(&[i])
                        .into_iter()
                        .map(|d| d.map_or(UNREACHABLE, |d| d as u16))
                        .collect()
                })
                .collect();
            dist.dense = Some(rows.concat());
        }
        dist
    }

    pub fn kind(&self) -> Adjacency {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Simplex ids in dense order.
    pub fn elements(&self) -> &[SimplexId] {
        &self.elements
    }

    pub fn index_of(&self, id: SimplexId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[i]
    }

    pub fn has_matrix(&self) -> bool {
        self.dense.is_some()
    }

    fn bfs(&self, sources: &[usize]) -> Vec<Option<u32>> {
        let mut out = vec![None; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if out[s].is_none() {
                out[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(a) = queue.pop_front() {
            let da = out[a].unwrap_or(0);
            for &b in &self.neighbors[a] {
                let b = b as usize;
                if out[b].is_none() {
                    out[b] = Some(da + 1);
                    queue.push_back(b);
                }
            }
        }
        out
    }

    /// Distance between dense indices; `None` if unreachable.
    pub fn distance(&self, i: usize, j: usize) -> Option<u32> {
        match &self.dense {
            Some(m) => {
                let d = m[i * self.len() + j];
                (d != UNREACHABLE).then_some(d as u32)
            }
            None => self.bfs(&[i])[j],
        }
    }

    pub fn distances_from(&self, i: usize) -> Vec<Option<u32>> {
        match &self.dense {
            Some(m) => m[i * self.len()..(i + 1) * self.len()]
                .iter()
                .map(|&d| (d != UNREACHABLE).then_some(d as u32))
                .collect(),
            None => self.bfs(&[i]),
        }
    }

    /// `δ(T, L) = min over T' in L of δ(T, T')` for every element.
    pub fn distances_to_set(&self, set: &[usize]) -> Vec<Option<u32>> {
        self.bfs(set)
    }

    /// Distance between two element sets.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> Option<u32> {
        let d = self.bfs(a);
        b.iter().filter_map(|&j| d[j]).min()
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.bfs(&[0]).iter().all(Option::is_some)
    }

    /// Full matrix as TSV: header row of simplex ids, then one row per
    /// element; unreachable pairs print as `inf`.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("id");
        for id in &self.elements {
            let _ = write!(s, "\t{id}");
        }
        s.push('\n');
        for i in 0..self.len() {
            let _ = write!(s, "{}", self.elements[i]);
            for d in self.distances_from(i) {
                match d {
                    Some(d) => {
                        let _ = write!(s, "\t{d}");
                    }
                    None => s.push_str("\tinf"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Smallest `γ` with `v_i <= γ v_j` for all distance-1 pairs.
pub fn grading_of(values: &[f64], dist: &ElementDistance) -> Result<f64> {
    if values.len() != dist.len() {
        return Err(Error::InvalidParameter(format!(
            "{} values for {} elements",
            values.len(),
            dist.len()
        )));
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveValue { index, value });
    }
    let mut g = 1.0f64;
    for (i, &vi) in values.iter().enumerate() {
        for &j in dist.neighbors(i) {
            g = g.max(vi / values[j as usize]);
        }
    }
    Ok(g)
}

/// Mesh size `h|_T = 2^{-level/d}` in dense element order.
pub fn mesh_size(mesh: &SimplicialMesh) -> Vec<f64> {
    mesh.active_ids().iter().map(|&s| mesh.h(s)).collect()
}

/// Largest level difference across neighbouring elements.
pub fn level_gap(mesh: &SimplicialMesh, dist: &ElementDistance) -> u32 {
    let levels: Vec<u32> = dist.elements().iter().map(|&s| mesh.simplex(s).level()).collect();
    let mut gap = 0;
    for (i, &li) in levels.iter().enumerate() {
        for &j in dist.neighbors(i) {
            gap = gap.max(li.abs_diff(levels[j as usize]));
        }
    }
    gap
}

/// Per-element report: id, level, volume, h, min-neighbor-level.
pub fn element_report_tsv(mesh: &SimplicialMesh, dist: &ElementDistance) -> String {
    let mut s = String::from("id\tlevel\tvolume\th\tmin_neighbor_level\n");
    for (i, &id) in dist.elements().iter().enumerate() {
        let t = mesh.simplex(id);
        let min_nb = dist
            .neighbors(i)
            .iter()
            .map(|&j| mesh.simplex(dist.elements()[j as usize]).level())
            .min();
        let _ = writeln!(
            s,
            "{id}\t{}\t{:.17e}\t{:.17e}\t{}",
            t.level(),
            mesh.volume(id),
            mesh.h(id),
            min_nb.map_or_else(|| "-".to_string(), |l| l.to_string())
        );
    }
    s
}
