//! Collapsed tensor Gauss–Legendre rules on the reference simplex. All
//! weights are positive.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Quadrature in barycentric coordinates whose weights sum to one, so
/// `Σ w_q f(λ_q)` approximates the mean value over any simplex.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Exact for polynomials of total degree at most `degree`.
    pub fn new(d: usize, degree: u32) -> Self {
        let n = (degree as usize + d).div_ceil(2).max(1);
        let gl = GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 1"));
        let line: Vec<(f64, f64)> = gl
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| ((x + 1.0) / 2.0, w / 2.0))
            .collect();
        let dfact: f64 = (1..=d).map(|i| i as f64).product();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let total = n.pow(d as u32);
        for flat in 0..total {
            let mut rest = flat;
            let mut lambda = vec![0.0; d + 1];
            let mut scale = 1.0;
            let mut w = dfact;
            for i in 0..d {
                let (u, wu) = line[rest % n];
                rest /= n;
                lambda[i + 1] = scale * u;
                w *= wu;
                if i + 1 < d {
                    // Jacobian factor (1-u_i)^{d-1-i}.
                    w *= (1.0 - u).powi((d - 1 - i) as i32);
                }
                scale *= 1.0 - u;
            }
            lambda[0] = 1.0 - lambda[1..].iter().sum::<f64>();
            points.push(lambda);
            weights.push(w);
        }
        SimplexRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Mean of `f` over the simplex.
    pub fn mean(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::multiindex::MultiIndex;
    use crate::polyspace::poly::{monomial_mean, to_f64};

    #[test]
    fn exact_on_monomials() {
        for d in 1..=4 {
            for deg in 0..=6u32 {
                let rule = SimplexRule::new(d, deg);
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                for order in 0..=deg {
                    for s in MultiIndex::all_of_order(d + 1, order) {
                        let q = rule.mean(|l| s.parts().iter().zip(l).map(|(&e, &x)| x.powi(e as i32)).product());
                        let exact = to_f64(&monomial_mean(&s));
                        assert!((q - exact).abs() < 1e-13, "d={d} deg={deg} {s:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn points_are_inside() {
        let rule = SimplexRule::new(3, 5);
        assert!(rule.points.iter().all(|p| p.iter().all(|&x| x > 0.0 && x < 1.0)));
    }
}
