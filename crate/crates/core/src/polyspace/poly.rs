use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::multiindex::{factorial, MultiIndex};
use crate::error::{Error, Result};

/// Mean value over any simplex of `λ^σ`: `σ! d! / (|σ|+d)!`.
pub fn monomial_mean(sigma: &MultiIndex) -> BigRational {
    let d = sigma.nvars() as u32 - 1;
    BigRational::new(
        sigma.factorial() * factorial(d),
        factorial(sigma.order() + d),
    )
}

/// `∫_T λ^σ` for a simplex of volume `vol`.
pub fn integrate_monomial(sigma: &MultiIndex, vol: &BigRational) -> BigRational {
    monomial_mean(sigma) * vol
}

/// Polynomial in the barycentric coordinates `λ_0, …, λ_d` with exact
/// rational coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarycentricPoly {
    nvars: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

impl BarycentricPoly {
    pub fn zero(nvars: usize) -> Self {
        BarycentricPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(MultiIndex::zeros(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn monomial(sigma: MultiIndex) -> Self {
        let mut p = Self::zero(sigma.nvars());
        p.add_term(sigma, BigRational::one());
        p
    }

    /// `λ_j`.
    pub fn lambda(nvars: usize, j: usize) -> Self {
        Self::monomial(MultiIndex::unit(nvars, j))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, sigma: &MultiIndex) -> BigRational {
        self.terms.get(sigma).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, sigma: MultiIndex, c: BigRational) {
        debug_assert_eq!(sigma.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(sigma);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Largest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut p = Self::zero(self.nvars);
        for (s, v) in &self.terms {
            p.add_term(s.clone(), v * c);
        }
        p
    }

    /// Rewrites every term as a form of degree exactly `k` by multiplying
    /// with powers of `Σ λ_j = 1`.
    pub fn homogenize(&self, k: u32) -> Result<Self> {
        if let Some(deg) = self.degree() {
            if deg > k {
                return Err(Error::DegreeOverflow { degree: deg, cap: k });
            }
        }
        let sum = (0..self.nvars).fold(Self::zero(self.nvars), |acc, j| acc + Self::lambda(self.nvars, j));
        let mut powers = vec![Self::one(self.nvars)];
        for i in 1..=k as usize {
            let next = &powers[i - 1] * &sum;
            powers.push(next);
        }
        let mut out = Self::zero(self.nvars);
        for (s, c) in &self.terms {
            let lift = &Self::monomial(s.clone()) * &powers[(k - s.order()) as usize];
            for (t, v) in lift.terms {
                out.add_term(t, v * c);
            }
        }
        Ok(out)
    }

    /// Mean value over a simplex.
    pub fn mean(&self) -> BigRational {
        self.terms
            .iter()
            .fold(BigRational::zero(), |acc, (s, c)| acc + c * monomial_mean(s))
    }

    /// `∂/∂λ_j`, treating the barycentric coordinates as independent.
    pub fn partial(&self, j: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (s, c) in &self.terms {
            if let Some(t) = s.sub_unit(j) {
                p.add_term(t, c * BigRational::from_integer(BigInt::from(s.get(j))));
            }
        }
        p
    }

    pub fn eval(&self, lambda: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (s, c) in &self.terms {
            let mut t = c.clone();
            for (j, &e) in s.parts().iter().enumerate() {
                for _ in 0..e {
                    t *= &lambda[j];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, lambda: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(s, c)| {
                let m: f64 = s.parts().iter().zip(lambda).map(|(&e, &l)| l.powi(e as i32)).product();
                to_f64(c) * m
            })
            .sum()
    }
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

impl Add for BarycentricPoly {
    type Output = BarycentricPoly;

    fn add(mut self, rhs: BarycentricPoly) -> BarycentricPoly {
        for (s, c) in rhs.terms {
            self.add_term(s, c);
        }
        self
    }
}

impl Sub for BarycentricPoly {
    type Output = BarycentricPoly;

    fn sub(self, rhs: BarycentricPoly) -> BarycentricPoly {
        self + (-rhs)
    }
}

impl Neg for BarycentricPoly {
    type Output = BarycentricPoly;

    fn neg(mut self) -> BarycentricPoly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for &BarycentricPoly {
    type Output = BarycentricPoly;

    fn mul(self, rhs: &BarycentricPoly) -> BarycentricPoly {
        let mut p = BarycentricPoly::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                p.add_term(a.add(b), x * y);
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn monomial_integrals() {
        let vol = r(3, 7);
        assert_eq!(integrate_monomial(&MultiIndex::zeros(3), &vol), vol);
        assert_eq!(integrate_monomial(&MultiIndex::new(vec![1, 1, 0]), &vol), &vol / r(12, 1));
        assert_eq!(integrate_monomial(&MultiIndex::new(vec![2, 0, 0, 0]), &vol), &vol / r(10, 1));
    }

    #[test]
    fn homogenize_preserves_values() {
        let mut p = BarycentricPoly::constant(3, r(2, 3));
        p.add_term(MultiIndex::new(vec![1, 0, 1]), r(-5, 2));
        p.add_term(MultiIndex::new(vec![0, 1, 0]), r(1, 1));
        let h = p.homogenize(3).unwrap();
        assert!(h.terms().all(|(s, _)| s.order() == 3));
        let pt = [r(1, 5), r(3, 10), r(1, 2)];
        assert_eq!(p.eval(&pt), h.eval(&pt));
        assert_eq!(p.mean(), h.mean());
        assert!(matches!(p.homogenize(1), Err(Error::DegreeOverflow { degree: 2, cap: 1 })));
    }

    #[test]
    fn zero_terms_are_dropped() {
        let a = BarycentricPoly::lambda(2, 0);
        let z = a.clone() - a;
        assert!(z.is_zero());
        assert_eq!(z.degree(), None);
    }

    #[test]
    fn partial_derivative() {
        let p = BarycentricPoly::monomial(MultiIndex::new(vec![3, 1]));
        let dp = p.partial(0);
        assert_eq!(dp.coefficient(&MultiIndex::new(vec![2, 1])), r(3, 1));
        assert!(p.partial(0).partial(1).partial(1).is_zero());
    }
}
