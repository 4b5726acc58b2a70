//! Nodal Lagrange bases on the reference simplex and the mean-value tables
//! built from them. Tables depend only on `(d, degrees)` and are cached.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::multiindex::MultiIndex;
use super::poly::{monomial_mean, to_f64, BarycentricPoly};

/// Lagrange nodes of degree `k`: `λ(x_α) = α / k`. For `k = 0` the single
/// node index is the zero multi-index.
pub fn nodes(d: usize, k: u32) -> Vec<MultiIndex> {
    MultiIndex::all_of_order(d + 1, k)
}

/// Barycentric coordinates of node `α` of degree `k`.
pub fn node_point(alpha: &MultiIndex, k: u32) -> Vec<BigRational> {
    let n = alpha.nvars();
    if k == 0 {
        return vec![BigRational::new(BigInt::from(1), BigInt::from(n)); n];
    }
    alpha
        .parts()
        .iter()
        .map(|&a| BigRational::new(BigInt::from(a), BigInt::from(k)))
        .collect()
}

/// Nodal basis `N_α(λ) = Π_j Π_{m<α_j} (kλ_j − m) / (m+1)`, homogenized to
/// degree `k`. Ordered like [`nodes`].
pub fn nodal_basis(d: usize, k: u32) -> Vec<BarycentricPoly> {
    let n = d + 1;
    nodes(d, k)
        .into_iter()
        .map(|alpha| {
            let mut p = BarycentricPoly::one(n);
            for j in 0..n {
                for m in 0..alpha.get(j) {
                    let mut f = BarycentricPoly::lambda(n, j).scale(&BigRational::from_integer(k.into()));
                    f.add_term(MultiIndex::zeros(n), BigRational::from_integer(-BigInt::from(m)));
                    let f = f.scale(&BigRational::new(1.into(), (m + 1).into()));
                    p = &p * &f;
                }
            }
            p.homogenize(k).expect("nodal factor degree equals k")
        })
        .collect()
}

/// Coefficients of the homogeneous nodal basis: row `i` is `N_i` in the
/// monomial basis `{λ^σ : |σ| = k}`.
fn coefficient_matrix(d: usize, k: u32) -> (Vec<MultiIndex>, Vec<Vec<BigRational>>) {
    let monos = MultiIndex::all_of_order(d + 1, k);
    let rows = nodal_basis(d, k)
        .into_iter()
        .map(|p| monos.iter().map(|s| p.coefficient(s)).collect())
        .collect();
    (monos, rows)
}

/// Generic `Σ_{σ,τ} C^a_{iσ} C^b_{lτ} f(σ, τ)`.
fn bilinear(d: usize, a: u32, b: u32, f: impl Fn(&MultiIndex, &MultiIndex) -> BigRational) -> DMatrix<f64> {
    let (ma, ca) = coefficient_matrix(d, a);
    let (mb, cb) = coefficient_matrix(d, b);
    let inner: Vec<Vec<BigRational>> = ma.iter().map(|s| mb.iter().map(|t| f(s, t)).collect()).collect();
    // (C_a · F) · C_b^T, exactly.
    let left: Vec<Vec<BigRational>> = ca
        .iter()
        .map(|row| {
            (0..mb.len())
                .map(|t| {
                    row.iter()
                        .zip(&inner)
                        .fold(BigRational::zero(), |acc, (c, f)| acc + c * &f[t])
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(ca.len(), cb.len(), |i, l| {
        to_f64(
            &left[i]
                .iter()
                .zip(&cb[l])
                .fold(BigRational::zero(), |acc, (x, y)| acc + x * y),
        )
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    Mass(usize, u32, u32),
    Weighted(usize, u32, u32, usize),
    Eval(usize, u32, u32),
    Grad(usize, u32, usize, usize),
}

fn cache() -> &'static Mutex<HashMap<Key, Arc<DMatrix<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<DMatrix<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(key: Key, build: impl FnOnce() -> DMatrix<f64>) -> Arc<DMatrix<f64>> {
    if let Some(m) = cache().lock().expect("table cache poisoned").get(&key) {
        return m.clone();
    }
    let m = Arc::new(build());
    cache().lock().expect("table cache poisoned").entry(key).or_insert(m).clone()
}

/// `mean(N^a_i N^b_l)`, shape `n_a × n_b`.
pub fn mass(d: usize, a: u32, b: u32) -> Arc<DMatrix<f64>> {
    cached(Key::Mass(d, a, b), || bilinear(d, a, b, |s, t| monomial_mean(&s.add(t))))
}

/// `mean(λ_j N^a_i N^b_l)`.
pub fn weighted_mass(d: usize, a: u32, b: u32, j: usize) -> Arc<DMatrix<f64>> {
    cached(Key::Weighted(d, a, b, j), || {
        bilinear(d, a, b, |s, t| monomial_mean(&s.add(t).add_unit(j)))
    })
}

/// `mean(∂_j N^a_i ∂_m N^a_l)` with barycentric partial derivatives.
pub fn grad_mass(d: usize, a: u32, j: usize, m: usize) -> Arc<DMatrix<f64>> {
    cached(Key::Grad(d, a, j, m), || {
        bilinear(d, a, a, |s, t| match (s.sub_unit(j), t.sub_unit(m)) {
            (Some(s1), Some(t1)) => {
                monomial_mean(&s1.add(&t1)) * BigRational::from_integer((s.get(j) * t.get(m)).into())
            }
            _ => BigRational::zero(),
        })
    })
}

/// Values of the degree-`a` basis at the degree-`b` nodes: shape `n_b × n_a`.
pub fn eval_at_nodes(d: usize, a: u32, b: u32) -> Arc<DMatrix<f64>> {
    cached(Key::Eval(d, a, b), || {
        let basis = nodal_basis(d, a);
        let pts = nodes(d, b);
        DMatrix::from_fn(pts.len(), basis.len(), |r, c| to_f64(&basis[c].eval(&node_point(&pts[r], b))))
    })
}

type FloatBasis = Vec<Vec<(Vec<u32>, f64)>>;

fn float_basis(d: usize, k: u32) -> Arc<FloatBasis> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<FloatBasis>>>> = OnceLock::new();
    let c = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = c.lock().expect("basis cache poisoned").get(&(d, k)) {
        return b.clone();
    }
    let b: FloatBasis = nodal_basis(d, k)
        .iter()
        .map(|p| p.terms().map(|(s, c)| (s.parts().to_vec(), to_f64(c))).collect())
        .collect();
    let b = Arc::new(b);
    c.lock().expect("basis cache poisoned").entry((d, k)).or_insert(b).clone()
}

/// Values of the degree-`k` nodal basis at a barycentric point.
pub fn basis_values(d: usize, k: u32, lambda: &[f64]) -> Vec<f64> {
    float_basis(d, k)
        .iter()
        .map(|terms| {
            terms
                .iter()
                .map(|(s, c)| c * s.iter().zip(lambda).map(|(&e, &l)| l.powi(e as i32)).product::<f64>())
                .sum()
        })
        .collect()
}
