//! Dense generalized eigenproblems and SPD solves.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};

/// Systems up to this size are factored densely.
pub const DENSE_SOLVE_LIMIT: usize = 5000;

/// Relative tolerance of the conjugate gradient fallback.
pub const CG_TOLERANCE: f64 = 1e-12;

/// Solution of `A x = λ B x` with `B` symmetric positive definite.
#[derive(Clone, Debug)]
pub struct GeneralizedEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors, one column per eigenvalue.
    pub vectors: DMatrix<f64>,
    /// `max_k ‖A x_k − λ_k B x_k‖ / (‖A x_k‖ + |λ_k| ‖B x_k‖)`.
    pub residual: f64,
}

impl GeneralizedEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Cholesky reduction to a standard symmetric eigenproblem.
pub fn generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<GeneralizedEigen> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::EmptySet);
    }
    if a.shape() != (n, n) || b.shape() != (n, n) {
        return Err(Error::InvalidParameter("eigenproblem matrices must be square and equal in size".into()));
    }
    let chol = Cholesky::new(b.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}
    let y = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut z = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        z.set_column(k, &eig.eigenvectors.column(i));
    }
    let lt = l.transpose();
    let vectors = lt
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let ax = a * &vectors;
    let bx = b * &vectors;
    let mut residual = 0.0f64;
    for k in 0..n {
        let r = (ax.column(k) - bx.column(k) * values[k]).norm();
        let scale = ax.column(k).norm() + values[k].abs() * bx.column(k).norm();
        if scale > 0.0 {
            residual = residual.max(r / scale);
        }
    }
    Ok(GeneralizedEigen {
        values,
        vectors,
        residual,
    })
}

/// Symmetric positive definite solver: dense Cholesky for small systems,
/// Jacobi-preconditioned conjugate gradients on CSR storage otherwise.
pub enum SpdSolver {
    Dense(Cholesky<f64, Dyn>),
    Sparse { matrix: CsrMatrix<f64>, inv_diag: Vec<f64> },
}

impl SpdSolver {
    /// Builds from triplets `(row, col, value)`; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n <= DENSE_SOLVE_LIMIT {
            let mut m = DMatrix::zeros(n, n);
            for &(i, j, v) in triplets {
                m[(i, j)] += v;
            }
            Self::dense(m)
        } else {
            let mut coo = CooMatrix::new(n, n);
            for &(i, j, v) in triplets {
                coo.push(i, j, v);
            }
            let matrix = CsrMatrix::from(&coo);
            let mut inv_diag = vec![0.0; n];
            for (i, j, &v) in matrix.triplet_iter() {
                if i == j {
                    inv_diag[i] += v;
                }
            }
            for d in &mut inv_diag {
                if *d <= 0.0 {
                    return Err(Error::NotPositiveDefinite);
                }
                *d = 1.0 / *d;
            }
            Ok(SpdSolver::Sparse { matrix, inv_diag })
        }
    }

    pub fn dense(m: DMatrix<f64>) -> Result<Self> {
        Cholesky::new(m).map(SpdSolver::Dense).ok_or(Error::NotPositiveDefinite)
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdSolver::Dense(c) => Ok(c.solve(&DVector::from_column_slice(rhs)).as_slice().to_vec()),
            SpdSolver::Sparse { matrix, inv_diag } => pcg(matrix, inv_diag, rhs),
        }
    }
}

fn pcg(a: &CsrMatrix<f64>, inv_diag: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let max_iter = 10 * n + 100;
    let mut rel = 1.0;
    for _ in 0..max_iter {
        let ap = spmv(a, &p);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = r.iter().map(|x| x * x).sum::<f64>().sqrt() / bnorm;
        if rel <= CG_TOLERANCE {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverNonConvergence {
        iterations: max_iter,
        residual: rel,
    })
}

fn spmv(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for (i, row) in a.row_iter().enumerate() {
        y[i] = row.col_indices().iter().zip(row.values()).map(|(&j, v)| v * x[j]).sum();
    }
    y
}
