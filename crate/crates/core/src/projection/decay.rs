use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::certify::{chebyshev_factor, kappa_bound, q_from_kappa};
use super::project::Projector;
use super::pwpoly::PiecewisePoly;
use crate::error::{Error, Result};
use crate::linalg::{generalized_eigen, DENSE_SOLVE_LIMIT};
use crate::mesh::distance::{Adjacency, ElementDistance};

/// One decay measurement `sup ‖1_L Q(1_{L'}u)‖₂ / ‖1_{L'}u‖₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayMeasurement {
    pub delta: u32,
    /// Exact operator norm, when the space is small enough.
    pub exact: Option<f64>,
    /// Largest ratio over random and indicator samples.
    pub sampled: f64,
    /// `min{2q^{δ−1}, 1}`.
    pub bound: f64,
    /// `2q^{δ−1}/(1+q^{2(δ−1)})`.
    pub tight: f64,
}

impl DecayMeasurement {
    pub fn measured(&self) -> f64 {
        self.exact.unwrap_or(self.sampled)
    }
}

pub fn adjacency_for(proj: &Projector) -> Adjacency {
    if proj.space().kind().is_cr() {
        Adjacency::Face
    } else {
        Adjacency::Vertex
    }
}

/// Decay rate for the space: `q_new` for Lagrange, the CR rate otherwise.
pub fn decay_rate(proj: &Projector) -> f64 {
    let s = proj.space();
    q_from_kappa(kappa_bound(s.kind(), s.dim()))
}

fn masked_norm_sq(proj: &Projector, x: &[f64], set: &[usize]) -> f64 {
    let s = proj.space();
    set.iter()
        .map(|&e| {
            let c = DVector::from_iterator(s.n_local(), s.element_dofs(e).iter().map(|g| g.map_or(0.0, |g| x[g])));
            c.dot(&(s.local_mass(e) * &c))
        })
        .sum()
}

/// Exact `‖1_L Q 1_{L'}‖`: with `W = M⁻¹ M_{L'}` restricted to dofs touching
/// `L'`, the square of the norm is the top eigenvalue of
/// `Wᵀ M_L W y = λ M_{L'} y`.
pub fn exact_masked_norm(proj: &Projector, l: &[usize], lp: &[usize]) -> Result<f64> {
    let (l, lp) = (&dedup(l), &dedup(lp));
    let s = proj.space();
    let n = s.n_dofs();
    if n > DENSE_SOLVE_LIMIT {
        return Err(Error::InvalidParameter(format!("{n} dofs exceed the dense limit")));
    }
    let dp: Vec<usize> = lp
        .iter()
        .flat_map(|&e| s.element_dofs(e).iter().flatten().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if dp.is_empty() {
        return Ok(0.0);
    }
    let mut mlp = DMatrix::zeros(n, n);
    for &e in lp {
        let m = s.local_mass(e);
        for (a, ga) in s.element_dofs(e).iter().enumerate() {
            for (b, gb) in s.element_dofs(e).iter().enumerate() {
                if let (Some(ga), Some(gb)) = (ga, gb) {
                    mlp[(*ga, *gb)] += m[(a, b)];
                }
            }
        }
    }
    let cols: Result<Vec<Vec<f64>>> = dp
        .par_iter()
        .map(|&g| proj.solve(mlp.column(g).as_slice()))
        .collect();
    let cols = cols?;
    let k = dp.len();
    let mut a = DMatrix::zeros(k, k);
    for &e in l {
        let m = s.local_mass(e);
        let dofs = s.element_dofs(e);
        let local = DMatrix::from_fn(s.n_local(), k, |r, c| dofs[r].map_or(0.0, |g| cols[c][g]));
        a += local.transpose() * m * &local;
    }
    let b = DMatrix::from_fn(k, k, |r, c| mlp[(dp[r], dp[c])]);
    let eig = generalized_eigen(&a, &b)?;
    Ok(eig.max().max(0.0).sqrt())
}

fn dedup(set: &[usize]) -> Vec<usize> {
    set.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Largest ratio over `trials` random functions of degree `K+1` on `L'` and
/// the indicator of each element of `L'`.
pub fn sampled_masked_norm(proj: &Projector, l: &[usize], lp: &[usize], trials: usize, seed: u64) -> Result<f64> {
    let (l, lp) = (&dedup(l), &dedup(lp));
    let s = proj.space();
    let vols = proj.volumes();
    let n = s.n_elements();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for _ in 0..trials {
        let mut u = PiecewisePoly::zeros(s.dim(), s.degree() + 1, n);
        for &e in lp {
            for v in u.element_mut(e) {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        samples.push(u);
    }
    for &e in lp {
        let mut u = PiecewisePoly::zeros(s.dim(), 0, n);
        u.element_mut(e)[0] = 1.0;
        samples.push(u);
    }
    let ratios: Result<Vec<f64>> = samples
        .par_iter()
        .map(|u| {
            let x = proj.project(u)?;
            Ok(masked_norm_sq(proj, &x, l).max(0.0).sqrt() / u.l2_norm(&vols))
        })
        .collect();
    Ok(ratios?.into_iter().fold(0.0, f64::max))
}

pub fn measure_decay(
    proj: &Projector,
    dist: &ElementDistance,
    l: &[usize],
    lp: &[usize],
    trials: usize,
    seed: u64,
) -> Result<DecayMeasurement> {
    if l.is_empty() || lp.is_empty() {
        return Err(Error::EmptySet);
    }
    let delta = dist
        .set_distance(l, lp)
        .ok_or_else(|| Error::InvalidParameter("sets lie in different components".into()))?;
    let q = decay_rate(proj);
    let exact = if proj.space().n_dofs() <= DENSE_SOLVE_LIMIT {
        Some(exact_masked_norm(proj, l, lp)?)
    } else {
        None
    };
    let sampled = sampled_masked_norm(proj, l, lp, trials, seed)?;
    let loose = if delta == 0 { 1.0 } else { (2.0 * q.powi(delta as i32 - 1)).min(1.0) };
    Ok(DecayMeasurement {
        delta,
        exact,
        sampled,
        bound: loose,
        tight: chebyshev_factor(q, delta as i64 - 1),
    })
}

/// Decay away from `L'`: for each `δ` in `1..=max_delta` the set
/// `L = {T : δ(T, L') ≥ δ}`.
pub fn decay_profile(
    proj: &Projector,
    dist: &ElementDistance,
    lp: &[usize],
    max_delta: u32,
    trials: usize,
    seed: u64,
) -> Result<Vec<DecayMeasurement>> {
    let to_set = dist.distances_to_set(lp);
    let mut out = Vec::new();
    for delta in 1..=max_delta {
        let l: Vec<usize> = (0..to_set.len())
            .filter(|&t| to_set[t].is_some_and(|x| x >= delta))
            .collect();
        if l.is_empty() {
            break;
        }
        out.push(measure_decay(proj, dist, &l, lp, trials, seed)?);
    }
    Ok(out)
}

pub fn decay_tsv(rows: &[DecayMeasurement]) -> String {
    let mut s = String::from("delta\tmeasured\tbound\n");
    for r in rows {
        let _ = writeln!(s, "{}\t{:.6e}\t{:.6e}", r.delta, r.measured(), r.bound);
    }
    s
}
