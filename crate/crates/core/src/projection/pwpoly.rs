use nalgebra::{DMatrix, DVector};

use crate::polyspace::quadrature::SimplexRule;
use crate::polyspace::reference::{self, nodes};
use crate::polyspace::FeSpace;

/// Discontinuous piecewise polynomial stored as nodal values of a fixed
/// degree on each element of a mesh snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePoly {
    dim: usize,
    degree: u32,
    n_local: usize,
    values: Vec<f64>,
}

impl PiecewisePoly {
    pub fn zeros(dim: usize, degree: u32, n_elements: usize) -> Self {
        let n_local = nodes(dim, degree).len();
        PiecewisePoly {
            dim,
            degree,
            n_local,
            values: vec![0.0; n_local * n_elements],
        }
    }

    /// Nodal interpolation of `f` on every element of `space`.
    pub fn interpolate(space: &FeSpace, degree: u32, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut u = Self::zeros(space.dim(), degree, space.n_elements());
        let pts: Vec<Vec<f64>> = nodes(space.dim(), degree)
            .iter()
            .map(|a| a.parts().iter().map(|&x| if degree == 0 { 1.0 / (space.dim() + 1) as f64 } else { x as f64 / degree as f64 }).collect())
            .collect();
        for e in 0..space.n_elements() {
            for (i, p) in pts.iter().enumerate() {
                u.element_mut(e)[i] = f(&space.map_to_physical(e, p));
            }
        }
        u
    }

    /// The function with coefficients `x` in `space`.
    pub fn from_space(space: &FeSpace, x: &[f64]) -> Self {
        let mut u = Self::zeros(space.dim(), space.degree(), space.n_elements());
        let p = space.basis_transform();
        for e in 0..space.n_elements() {
            let c = DVector::from_iterator(
                space.n_local(),
                space.element_dofs(e).iter().map(|g| g.map_or(0.0, |g| x[g])),
            );
            if c.iter().all(|&v| v == 0.0) {
                continue;
            }
            let vals = p * c;
            u.element_mut(e).copy_from_slice(vals.as_slice());
        }
        u
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn n_elements(&self) -> usize {
        self.values.len() / self.n_local
    }

    pub fn element(&self, e: usize) -> &[f64] {
        &self.values[e * self.n_local..(e + 1) * self.n_local]
    }

    pub fn element_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.values[e * self.n_local..(e + 1) * self.n_local]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `1_L u`.
    pub fn masked(&self, keep: &[usize]) -> Self {
        let mut out = Self::zeros(self.dim, self.degree, self.n_elements());
        for &e in keep {
            out.element_mut(e).copy_from_slice(self.element(e));
        }
        out
    }

    /// Elements on which the function is not identically zero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_elements())
            .filter(|&e| self.element(e).iter().any(|&v| v != 0.0))
            .collect()
    }

    /// Same function written with nodal values of a higher degree.
    pub fn elevate(&self, degree: u32) -> Self {
        assert!(degree >= self.degree);
        if degree == self.degree {
            return self.clone();
        }
        let e = reference::eval_at_nodes(self.dim, self.degree, degree);
        let mut out = Self::zeros(self.dim, degree, self.n_elements());
        for t in 0..self.n_elements() {
            let v = &*e * DVector::from_column_slice(self.element(t));
            out.element_mut(t).copy_from_slice(v.as_slice());
        }
        out
    }

    /// `∫ u v` over all elements; `volumes` in element order.
    pub fn inner(&self, other: &PiecewisePoly, volumes: &[f64]) -> f64 {
        let m = reference::mass(self.dim, self.degree, other.degree);
        (0..self.n_elements())
            .map(|e| {
                let a = DVector::from_column_slice(self.element(e));
                let b = DVector::from_column_slice(other.element(e));
                volumes[e] * a.dot(&(&*m * b))
            })
            .sum()
    }

    pub fn l2_norm(&self, volumes: &[f64]) -> f64 {
        self.inner(self, volumes).max(0.0).sqrt()
    }

    /// `∫_T u²` per element.
    pub fn element_norms_sq(&self, volumes: &[f64]) -> Vec<f64> {
        let m: &DMatrix<f64> = &reference::mass(self.dim, self.degree, self.degree);
        (0..self.n_elements())
            .map(|e| {
                let a = DVector::from_column_slice(self.element(e));
                volumes[e] * a.dot(&(m * &a))
            })
            .collect()
    }

    /// Value at a barycentric point of element `e`.
    pub fn eval(&self, e: usize, lambda: &[f64]) -> f64 {
        reference::basis_values(self.dim, self.degree, lambda)
            .iter()
            .zip(self.element(e))
            .map(|(b, v)| b * v)
            .sum()
    }

    /// `(Σ_T |T| mean_T |u|^p)^{1/p}` by quadrature, or the largest nodal
    /// magnitude for `p = ∞`. Approximate for `p` other than 2 and ∞.
    pub fn lp_norm(&self, volumes: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let rule = SimplexRule::new(self.dim, (self.degree * 2 + 4).max(6));
        let total: f64 = (0..self.n_elements())
            .map(|e| volumes[e] * rule.mean(|l| self.eval(e, l).abs().powf(p)))
            .sum();
        total.powf(1.0 / p)
    }
}

impl std::ops::Sub for &PiecewisePoly {
    type Output = PiecewisePoly;

    fn sub(self, rhs: &PiecewisePoly) -> PiecewisePoly {
        assert_eq!(self.degree, rhs.degree);
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&rhs.values) {
            *a -= b;
        }
        out
    }
}
