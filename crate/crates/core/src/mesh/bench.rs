//! Marking policies and refinement benchmarks.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SimplexId, SimplicialMesh, VertexId};
use crate::error::{Error, Result};

/// Which simplices get marked in each refinement round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MarkingPolicy {
    /// Every active simplex.
    Uniform,
    /// Active simplices containing the origin.
    Corner,
    /// Each active simplex independently with the given probability.
    Random(f64),
    /// Nothing.
    None,
}

impl MarkingPolicy {
    /// Marked simplices for this round. `rng` is only consumed by
    /// [`MarkingPolicy::Random`].
    pub fn select(&self, mesh: &SimplicialMesh, rng: &mut ChaCha8Rng) -> Vec<SimplexId> {
        match *self {
            MarkingPolicy::Uniform => mesh.active_ids(),
            MarkingPolicy::Corner => {
                let origin = vec![crate::dyadic::Dyadic::ZERO; mesh.dim()];
                match mesh.find_vertex(&origin) {
                    Some(v) => mesh.patch(v).collect(),
                    None => Vec::new(),
                }
            }
            MarkingPolicy::Random(p) => mesh
                .active_ids()
                .into_iter()
                .filter(|_| rng.random::<f64>() < p)
                .collect(),
            MarkingPolicy::None => Vec::new(),
        }
    }
}

impl FromStr for MarkingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "uniform" => return Ok(MarkingPolicy::Uniform),
            "corner" => return Ok(MarkingPolicy::Corner),
            "none" => return Ok(MarkingPolicy::None),
            _ => {}
        }
        let bad = || Error::InvalidParameter(format!("unknown marking policy {s:?}"));
        let inner = s
            .strip_prefix("random(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let p: f64 = inner.trim().parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("marking fraction {p} outside [0, 1]")));
        }
        Ok(MarkingPolicy::Random(p))
    }
}

impl fmt::Display for MarkingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkingPolicy::Uniform => f.write_str("uniform"),
            MarkingPolicy::Corner => f.write_str("corner"),
            MarkingPolicy::Random(p) => write!(f, "random({p})"),
            MarkingPolicy::None => f.write_str("none"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRound {
    pub round: usize,
    pub marked: usize,
    pub elements: usize,
    /// Cumulative `(#T_m - #T_0) / sum of marked`, if anything was marked.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rounds: Vec<BenchRound>,
    pub added: usize,
    pub marked_total: usize,
}

impl BenchReport {
    /// `None` when nothing was ever marked.
    pub fn ratio(&self) -> Option<f64> {
        (self.marked_total > 0).then(|| self.added as f64 / self.marked_total as f64)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("round\tmarked\telements\tratio\n");
        for r in &self.rounds {
            let ratio = r.ratio.map_or_else(|| "no-op".to_string(), |x| format!("{x:.6}"));
            s.push_str(&format!("{}\t{}\t{}\t{}\n", r.round, r.marked, r.elements, ratio));
        }
        s
    }
}

/// Runs `rounds` rounds of limited-grading refinement on a copy of `mesh0`
/// and records how many elements the closure adds per marked element.
pub fn closure_benchmark(
    mesh0: &SimplicialMesh,
    policy: MarkingPolicy,
    rounds: usize,
    alpha: u32,
    seed: u64,
) -> Result<(SimplicialMesh, BenchReport)> {
    let mut mesh = mesh0.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n0 = mesh.num_active();
    let mut marked_total = 0;
    let mut out = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let marked = policy.select(&mesh, &mut rng);
        marked_total += marked.len();
        mesh.refine_lg(&marked, alpha)?;
        let added = mesh.num_active() - n0;
        out.push(BenchRound {
            round,
            marked: marked.len(),
            elements: mesh.num_active(),
            ratio: (marked_total > 0).then(|| added as f64 / marked_total as f64),
        });
    }
    let report = BenchReport {
        rounds: out,
        added: mesh.num_active() - n0,
        marked_total,
    };
    Ok((mesh, report))
}

/// Outcome of refining a single simplex with limited grading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpreadReport {
    /// Largest `level(T') - level(T)` over newly created simplices `T'`.
    pub max_level_excess: i64,
    /// Largest `dist(T, T') / 2^{-level(T')/d}`, with the Euclidean distance
    /// between simplices bounded above by the closest vertex pair.
    pub max_distance_ratio: f64,
}

/// Refines `target` in place with limited grading and measures how far the
/// refinement spreads.
pub fn single_refinement_spread(mesh: &mut SimplicialMesh, target: SimplexId, alpha: u32) -> Result<SpreadReport> {
    let before = mesh.arena_len();
    let t = mesh.simplex(target).clone();
    if !t.is_active() {
        return Err(Error::InactiveSimplex(target));
    }
    mesh.refine_lg(&[target], alpha)?;
    let d = mesh.dim() as f64;
    let tv: Vec<Vec<f64>> = t.vertices().iter().map(|&v| mesh.vertex_f64(v)).collect();
    let mut report = SpreadReport {
        max_level_excess: i64::MIN,
        max_distance_ratio: 0.0,
    };
    for id in before..mesh.arena_len() {
        let s = mesh.simplex(id);
        if !s.is_active() {
            continue;
        }
        report.max_level_excess = report.max_level_excess.max(s.level() as i64 - t.level() as i64);
        let dist = s
            .vertices()
            .iter()
            .map(|&v: &VertexId| {
                let p = mesh.vertex_f64(v);
                tv.iter()
                    .map(|q| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        let h = 2f64.powf(-(s.level() as f64) / d);
        report.max_distance_ratio = report.max_distance_ratio.max(dist / h);
    }
    Ok(report)
}
