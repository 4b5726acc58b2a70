//! Local decomposition operators `D_j` and the operator `S` on one simplex.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::multiindex::{binomial, MultiIndex};
use super::poly::{to_f64, BarycentricPoly};
use crate::error::{Error, Result};
use crate::linalg::generalized_eigen;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `D_j v` for `v` of degree at most `k`: homogenize to degree `k`, then
/// `λ^α ↦ (α_j / k) λ^{α - e_j}`.
pub fn decompose(j: usize, v: &BarycentricPoly, k: u32) -> Result<BarycentricPoly> {
    if k == 0 {
        return Err(Error::InvalidParameter("decomposition needs k >= 1".into()));
    }
    let h = v.homogenize(k)?;
    let mut out = BarycentricPoly::zero(v.nvars());
    for (a, c) in h.terms() {
        if let Some(b) = a.sub_unit(j) {
            out.add_term(b, c * rat(a.get(j) as i64, k as i64));
        }
    }
    Ok(out)
}

/// Same operator evaluated monomial by monomial without homogenizing:
/// `D_j λ^γ = (γ_j / k) λ^{γ - e_j} + ((k - |γ|) / k) λ^γ`.
pub fn decompose_by_monomials(j: usize, v: &BarycentricPoly, k: u32) -> Result<BarycentricPoly> {
    if let Some(deg) = v.degree() {
        if deg > k {
            return Err(Error::DegreeOverflow { degree: deg, cap: k });
        }
    }
    let mut out = BarycentricPoly::zero(v.nvars());
    for (g, c) in v.terms() {
        if let Some(b) = g.sub_unit(j) {
            out.add_term(b, c * rat(g.get(j) as i64, k as i64));
        }
        out.add_term(g.clone(), c * rat((k - g.order()) as i64, k as i64));
    }
    Ok(out)
}

/// `Σ_j mean(λ_j D_j v · D_j w)`.
pub fn s_form(v: &BarycentricPoly, w: &BarycentricPoly, k: u32) -> Result<BigRational> {
    let n = v.nvars();
    let mut acc = BigRational::zero();
    for j in 0..n {
        let dv = decompose(j, v, k)?;
        let dw = decompose(j, w, k)?;
        let prod = &(&BarycentricPoly::lambda(n, j) * &dv) * &dw;
        acc += prod.mean();
    }
    Ok(acc)
}

/// Closed form of `S` on monomials of degree at most `k`:
/// `S λ^σ = ((k² + |σ|(|σ|+d)) / k²) λ^σ − Σ_j (σ_j² / k²) λ^{σ − e_j}`.
pub fn s_apply(v: &BarycentricPoly, k: u32) -> Result<BarycentricPoly> {
    if let Some(deg) = v.degree() {
        if deg > k {
            return Err(Error::DegreeOverflow { degree: deg, cap: k });
        }
    }
    let n = v.nvars();
    let d = (n - 1) as i64;
    let k2 = (k as i64) * (k as i64);
    let mut out = BarycentricPoly::zero(n);
    for (s, c) in v.terms() {
        let m = s.order() as i64;
        out.add_term(s.clone(), c * rat(k2 + m * (m + d), k2));
        for j in 0..n {
            if let Some(t) = s.sub_unit(j) {
                let sj = s.get(j) as i64;
                out.add_term(t, -(c * rat(sj * sj, k2)));
            }
        }
    }
    Ok(out)
}

/// Matrix of `S` on the homogeneous monomial basis `{λ^α : |α| = k}`
/// together with the mean-value Gram matrix of that basis.
#[derive(Clone, Debug)]
pub struct LocalOperatorMatrix {
    pub basis: Vec<MultiIndex>,
    /// Column `c` holds the coefficients of `S basis[c]`.
    pub matrix: Vec<Vec<BigRational>>,
    pub gram: Vec<Vec<BigRational>>,
}

impl LocalOperatorMatrix {
    /// `⟨S b_c, b_r⟩ = (G S)_{rc}` as floats.
    pub fn form_f64(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        DMatrix::from_fn(n, n, |r, c| {
            let mut acc = BigRational::zero();
            for i in 0..n {
                acc += &self.gram[r][i] * &self.matrix[i][c];
            }
            to_f64(&acc)
        })
    }

    pub fn gram_f64(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        DMatrix::from_fn(n, n, |r, c| to_f64(&self.gram[r][c]))
    }
}

pub fn s_matrix(d: usize, k: u32) -> Result<LocalOperatorMatrix> {
    if k == 0 {
        return Err(Error::InvalidParameter("S needs k >= 1".into()));
    }
    let basis = MultiIndex::all_of_order(d + 1, k);
    let n = basis.len();
    let mut matrix = vec![vec![BigRational::zero(); n]; n];
    for (c, a) in basis.iter().enumerate() {
        let img = s_apply(&BarycentricPoly::monomial(a.clone()), k)?.homogenize(k)?;
        for (r, b) in basis.iter().enumerate() {
            matrix[r][c] = img.coefficient(b);
        }
    }
    let gram = basis
        .iter()
        .map(|a| basis.iter().map(|b| super::poly::monomial_mean(&a.add(b))).collect())
        .collect();
    Ok(LocalOperatorMatrix { basis, matrix, gram })
}

/// Eigenvalues of `S` in ascending order.
pub fn s_spectrum(d: usize, k: u32) -> Result<Vec<f64>> {
    let m = s_matrix(d, k)?;
    Ok(generalized_eigen(&m.form_f64(), &m.gram_f64())?.values)
}

/// `μ_m = (k² + m(m+d)) / k²` with multiplicity `C(m+d,d) − C(m−1+d,d)`,
/// for `m = 0..=k`.
pub fn expected_s_spectrum(d: usize, k: u32) -> Vec<(f64, usize)> {
    let (di, ki) = (d as i64, k as f64);
    (0..=k as i64)
        .map(|m| {
            let mu = (ki * ki + (m * (m + di)) as f64) / (ki * ki);
            let mult = binomial(m + di, di) - binomial(m - 1 + di, di);
            (mu, mult as usize)
        })
        .collect()
}

fn random_poly(nvars: usize, k: u32, rng: &mut ChaCha8Rng) -> BarycentricPoly {
    let mut p = BarycentricPoly::zero(nvars);
    for order in 0..=k {
        for s in MultiIndex::all_of_order(nvars, order) {
            if rng.random_bool(0.6) {
                p.add_term(s, rat(rng.random_range(-6..=6), rng.random_range(1..=4)));
            }
        }
    }
    p
}

/// Compares the defining form `Σ_j ⟨λ_j D_j v, D_j w⟩` against
/// `⟨S v, w⟩` from the closed form, exactly, on random pairs. Also checks
/// symmetry of the form. Returns the number of pairs checked.
pub fn verify_s_consistency(d: usize, k: u32, trials: usize, seed: u64) -> Result<usize> {
    let n = d + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let v = random_poly(n, k, &mut rng);
        let w = random_poly(n, k, &mut rng);
        let lhs = s_form(&v, &w, k)?;
        let rhs = (&s_apply(&v, k)? * &w).mean();
        let swapped = s_form(&w, &v, k)?;
        if lhs != rhs || lhs != swapped {
            return Err(Error::FormMismatch {
                left: format!("{v:?}"),
                right: format!("{w:?}"),
                lhs: lhs.to_string(),
                rhs: if lhs != rhs { rhs.to_string() } else { swapped.to_string() },
            });
        }
    }
    Ok(trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(v: &[u32]) -> BarycentricPoly {
        BarycentricPoly::monomial(MultiIndex::new(v.to_vec()))
    }

    #[test]
    fn top_degree_rule() {
        let d = decompose(0, &mono(&[1, 1, 0]), 2).unwrap();
        assert_eq!(d, mono(&[0, 1, 0]).scale(&rat(1, 2)));
        assert!(decompose(2, &mono(&[1, 1, 0]), 2).unwrap().is_zero());
    }

    #[test]
    fn lower_degree_rule() {
        let d = decompose(0, &mono(&[1, 0, 0]), 2).unwrap();
        let expect = BarycentricPoly::constant(3, rat(1, 2)) + mono(&[1, 0, 0]).scale(&rat(1, 2));
        // Equal as functions: compare after homogenizing.
        assert_eq!(d.homogenize(1).unwrap(), expect.homogenize(1).unwrap());
        assert_eq!(decompose_by_monomials(0, &mono(&[1, 0, 0]), 2).unwrap(), expect);
    }

    #[test]
    fn both_routes_agree_and_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..=3 {
            for k in 1..=3 {
                let v = random_poly(d + 1, k, &mut rng);
                let mut sum = BarycentricPoly::zero(d + 1);
                for j in 0..=d {
                    let a = decompose(j, &v, k).unwrap().homogenize(k - 1).unwrap();
                    let b = decompose_by_monomials(j, &v, k).unwrap().homogenize(k - 1).unwrap();
                    assert_eq!(a, b);
                    sum = sum + &BarycentricPoly::lambda(d + 1, j) * &a;
                }
                assert_eq!(sum.homogenize(k).unwrap(), v.homogenize(k).unwrap());
            }
        }
    }

    #[test]
    fn degree_overflow_is_reported() {
        assert!(matches!(decompose(0, &mono(&[2, 1]), 2), Err(Error::DegreeOverflow { .. })));
        assert!(matches!(s_apply(&mono(&[2, 1]), 2), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn closed_form_matches_defining_form() {
        for d in 1..=3 {
            for k in 1..=4 {
                assert_eq!(verify_s_consistency(d, k, 8, 11 * d as u64 + k as u64).unwrap(), 8);
            }
        }
    }

    #[test]
    fn plus_sign_variant_fails_consistency() {
        // With `+` in front of the lower-order sum the closed form no longer
        // represents the defining form.
        let v = mono(&[1, 0]);
        let lhs = s_form(&v, &v, 1).unwrap();
        let plus = BarycentricPoly::constant(2, rat(1, 1)) + mono(&[1, 0]).scale(&rat(3, 1));
        assert_ne!((&plus * &v).mean(), lhs);
        assert_eq!((&s_apply(&v, 1).unwrap() * &v).mean(), lhs);
    }

    #[test]
    fn spectrum_matches_closed_form() {
        for d in 1..=3 {
            for k in 1..=4 {
                let got = s_spectrum(d, k).unwrap();
                let mut expect = Vec::new();
                for (mu, mult) in expected_s_spectrum(d, k) {
                    expect.extend(std::iter::repeat_n(mu, mult));
                }
                expect.sort_by(f64::total_cmp);
                assert_eq!(got.len(), expect.len());
                for (g, e) in got.iter().zip(&expect) {
                    assert!((g - e).abs() < 1e-9, "d={d} k={k}: {got:?} vs {expect:?}");
                }
                let top = *got.last().unwrap();
                assert!((top - (2 * k as usize + d) as f64 / k as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn small_spectra() {
        let s = s_spectrum(1, 1).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12 && (s[1] - 3.0).abs() < 1e-12);
        let s = s_spectrum(2, 2).unwrap();
        let expect = [1.0, 1.75, 1.75, 3.0, 3.0, 3.0];
        assert!(s.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-9), "{s:?}");
    }
}
