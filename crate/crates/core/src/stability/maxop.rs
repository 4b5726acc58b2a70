use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::distance::ElementDistance;

/// `M_γ(v)|_T = max_{T'} γ^{−δ(T,T')} |v_{T'}|`. Uses the distance matrix
/// when it is stored and a best-first propagation otherwise.
pub fn max_operator(v0: &[f64], gamma: f64, dist: &ElementDistance) -> Result<Vec<f64>> {
    check(v0, gamma, dist)?;
    if dist.has_matrix() {
        max_operator_brute(v0, gamma, dist)
    } else {
        max_operator_propagate(v0, gamma, dist)
    }
}

fn check(v0: &[f64], gamma: f64, dist: &ElementDistance) -> Result<()> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidParameter(format!("M_γ needs γ > 1, got {gamma}")));
    }
    if v0.len() != dist.len() {
        return Err(Error::InvalidParameter("value count does not match the mesh".into()));
    }
    Ok(())
}

/// Direct maximum over all pairs.
pub fn max_operator_brute(v0: &[f64], gamma: f64, dist: &ElementDistance) -> Result<Vec<f64>> {
    check(v0, gamma, dist)?;
    Ok((0..dist.len())
        .into_par_iter()
        .map(|t| {
            dist.distances_from(t)
                .iter()
                .zip(v0)
                .filter_map(|(d, v)| d.map(|d| v.abs() * gamma.powi(-(d as i32))))
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Exact rational version of [`max_operator_brute`].
pub fn max_operator_exact(v0: &[BigRational], gamma: &BigRational, dist: &ElementDistance) -> Result<Vec<BigRational>> {
    if *gamma <= BigRational::one() {
        return Err(Error::InvalidParameter(format!("M_γ needs γ > 1, got {gamma}")));
    }
    if v0.len() != dist.len() {
        return Err(Error::InvalidParameter("value count does not match the mesh".into()));
    }
    let inv = gamma.recip();
    Ok((0..dist.len())
        .into_par_iter()
        .map(|t| {
            dist.distances_from(t)
                .iter()
                .zip(v0)
                .filter_map(|(d, v)| d.map(|d| v.abs() * num_traits::pow(inv.clone(), d as usize)))
                .fold(BigRational::zero(), |m, x| if x > m { x } else { m })
        })
        .collect())
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Largest-first relaxation with edge factor `1/γ`.
pub fn max_operator_propagate(v0: &[f64], gamma: f64, dist: &ElementDistance) -> Result<Vec<f64>> {
    check(v0, gamma, dist)?;
    let mut best: Vec<f64> = v0.iter().map(|v| v.abs()).collect();
    let mut heap: BinaryHeap<Entry> = best.iter().enumerate().map(|(i, &v)| Entry(v, i)).collect();
    let mut done = vec![false; best.len()];
    while let Some(Entry(v, t)) = heap.pop() {
        if done[t] || v < best[t] {
            continue;
        }
        done[t] = true;
        let next = v / gamma;
        for &n in dist.neighbors(t) {
            let n = n as usize;
            if next > best[n] {
                best[n] = next;
                heap.push(Entry(next, n));
            }
        }
    }
    Ok(best)
}
