use std::fmt;

use num_bigint::BigInt;

/// Exponent vector `σ = (σ_0, …, σ_d)` of a barycentric monomial.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(parts: Vec<u32>) -> Self {
        MultiIndex(parts)
    }

    pub fn zeros(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    pub fn unit(nvars: usize, j: usize) -> Self {
        let mut v = vec![0; nvars];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    /// `|σ|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `σ - e_j`, if `σ_j > 0`.
    pub fn sub_unit(&self, j: usize) -> Option<MultiIndex> {
        (self.0[j] > 0).then(|| {
            let mut v = self.0.clone();
            v[j] -= 1;
            MultiIndex(v)
        })
    }

    pub fn add_unit(&self, j: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[j] += 1;
        MultiIndex(v)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `σ! = Π σ_j!`.
    pub fn factorial(&self) -> BigInt {
        self.0.iter().fold(BigInt::from(1), |acc, &s| acc * factorial(s))
    }

    /// Indices `j` with `σ_j > 0`.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &s)| s > 0).map(|(j, _)| j)
    }

    /// All multi-indices with `nvars` parts and order `k`. The first part
    /// runs from `k` down to 0, recursively, so `k e_0` comes first and for
    /// `k = 1` the order is `e_0, e_1, …`.
    pub fn all_of_order(nvars: usize, k: u32) -> Vec<MultiIndex> {
        fn rec(prefix: &mut Vec<u32>, left: usize, k: u32, out: &mut Vec<MultiIndex>) {
            if left == 1 {
                prefix.push(k);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in (0..=k).rev() {
                prefix.push(a);
                rec(prefix, left - 1, k - a, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if nvars > 0 {
            rec(&mut Vec::with_capacity(nvars), nvars, k, &mut out);
        }
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub(crate) fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, i| acc * i)
}

/// Binomial coefficient as an integer; `0` if `k > n` or `n < 0`.
pub fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts_and_order() {
        for nvars in 1..=5 {
            for k in 0..=5u32 {
                let all = MultiIndex::all_of_order(nvars, k);
                assert_eq!(all.len() as u64, binomial(k as i64 + nvars as i64 - 1, nvars as i64 - 1));
                assert!(all.iter().all(|a| a.order() == k));
                let mut sorted = all.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), all.len());
            }
        }
        let p1 = MultiIndex::all_of_order(3, 1);
        assert_eq!(p1, (0..3).map(|j| MultiIndex::unit(3, j)).collect::<Vec<_>>());
    }

    #[test]
    fn unit_arithmetic() {
        let a = MultiIndex::new(vec![2, 0, 1]);
        assert_eq!(a.sub_unit(1), None);
        assert_eq!(a.sub_unit(0), Some(MultiIndex::new(vec![1, 0, 1])));
        assert_eq!(a.add_unit(1).order(), 4);
        assert_eq!(a.factorial(), BigInt::from(2));
        assert_eq!(a.support().collect::<Vec<_>>(), vec![0, 2]);
    }
}
