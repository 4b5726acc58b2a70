use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::distance::{grading_of, Adjacency, ElementDistance};

/// Positive piecewise constant weight with its grading.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    values: Vec<f64>,
    kind: Adjacency,
    grading: f64,
}

impl Weight {
    pub fn new(values: Vec<f64>, dist: &ElementDistance) -> Result<Self> {
        if values.len() != dist.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weight values for {} elements",
                values.len(),
                dist.len()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::NonPositiveValue { index, value });
        }
        let grading = grading_of(&values, dist)?;
        Ok(Weight {
            values,
            kind: dist.kind(),
            grading,
        })
    }

    pub fn constant(value: f64, dist: &ElementDistance) -> Result<Self> {
        Self::new(vec![value; dist.len()], dist)
    }

    /// `ρ = base^{δ(T, T₀)}`.
    pub fn distance_power(base: f64, origin: usize, dist: &ElementDistance) -> Result<Self> {
        let values = dist
            .distances_from(origin)
            .into_iter()
            .map(|x| base.powi(x.unwrap_or(0) as i32))
            .collect();
        Self::new(values, dist)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> Adjacency {
        self.kind
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn inverse(&self, dist: &ElementDistance) -> Result<Self> {
        Self::new(self.values.iter().map(|v| 1.0 / v).collect(), dist)
    }

    pub fn product(&self, other: &Weight, dist: &ElementDistance) -> Result<Self> {
        Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(), dist)
    }

    pub fn powf(&self, s: f64, dist: &ElementDistance) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v.powf(s)).collect(), dist)
    }
}

/// Layers `L_i = {T : γ^{i−1} < ρ_T ≤ γ^i}` with `γ` the weight's grading.
#[derive(Clone, Debug, PartialEq)]
pub struct Layers {
    pub layers: BTreeMap<i64, Vec<usize>>,
    /// Set when the grading is 1 and everything is one layer.
    pub single: bool,
}

pub fn layer_index(value: f64, gamma: f64) -> i64 {
    let mut i = (value.ln() / gamma.ln()).ceil() as i64;
    while gamma.powi(i as i32 - 1) >= value {
        i -= 1;
    }
    while gamma.powi(i as i32) < value {
        i += 1;
    }
    i
}

pub fn layer_decomposition(weight: &Weight) -> Layers {
    let gamma = weight.grading();
    let mut layers = BTreeMap::new();
    if gamma <= 1.0 {
        layers.insert(0, (0..weight.values().len()).collect());
        return Layers { layers, single: true };
    }
    for (t, &v) in weight.values().iter().enumerate() {
        layers.entry(layer_index(v, gamma)).or_insert_with(Vec::new).push(t);
    }
    Layers { layers, single: false }
}
