use serde::{Deserialize, Serialize};

use super::operator_c::OperatorC;
use crate::error::{Error, Result};
use crate::linalg::generalized_eigen;
use crate::polyspace::SpaceKind;

/// Degree label in certificates: a Lagrange degree or `"CR"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeLabel {
    Lagrange(u32),
    Other(String),
}

impl DegreeLabel {
    pub fn of(kind: SpaceKind) -> Self {
        if kind.is_cr() {
            DegreeLabel::Other("CR".into())
        } else {
            DegreeLabel::Lagrange(kind.degree())
        }
    }
}

/// Extreme eigenvalues of `B x = λ M x` for an approximating operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralCertificate {
    pub d: usize,
    #[serde(rename = "K")]
    pub degree: DegreeLabel,
    pub mesh: String,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    pub q: f64,
    pub bound_kappa: f64,
    pub residual: f64,
}

impl SpectralCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn within_bound(&self, tol: f64) -> bool {
        self.kappa <= self.bound_kappa + tol
    }
}

/// `(√κ−1)/(√κ+1)`.
pub fn q_from_kappa(kappa: f64) -> f64 {
    let s = kappa.sqrt();
    (s - 1.0) / (s + 1.0)
}

/// `(√(2K+d) − √K)/(√(2K+d) + √K)`.
pub fn q_new(d: usize, k: u32) -> f64 {
    let a = ((2 * k as usize + d) as f64).sqrt();
    let b = (k as f64).sqrt();
    (a - b) / (a + b)
}

/// Limit of [`q_new`] as `K → ∞`, independent of `d`.
pub fn q_new_limit() -> f64 {
    let s = 2f64.sqrt();
    (s - 1.0) / (s + 1.0)
}

/// A-priori interval containing the spectrum of `C` on the space.
pub fn spectral_interval(kind: SpaceKind, d: usize) -> (f64, f64) {
    if kind.is_cr() {
        let df = d as f64;
        let diag = 2.0 - df + df * df;
        ((2.0 + df) / diag, df * df / diag)
    } else {
        let k = kind.degree() as f64;
        (k / (2.0 * k + d as f64), 1.0)
    }
}

/// Condition number bound for `C`: `(2K+d)/K` or `d²/(d+2)`.
pub fn kappa_bound(kind: SpaceKind, d: usize) -> f64 {
    let (a, b) = spectral_interval(kind, d);
    b / a
}

/// `2q^n/(1+q^{2n})`, and `1` for `n ≤ 0`.
pub fn chebyshev_factor(q: f64, n: i64) -> f64 {
    if n <= 0 {
        return 1.0;
    }
    let qn = q.powi(n as i32);
    2.0 * qn / (1.0 + qn * qn)
}

pub fn certify(op: &OperatorC<'_>, mesh_label: &str) -> Result<SpectralCertificate> {
    let proj = op.projector();
    let space = proj.space();
    let b = op.form_matrix()?;
    let m = proj.mass_dense()?;
    let eig = generalized_eigen(&b, &m)?;
    let (lambda_min, lambda_max) = (eig.min(), eig.max());
    if lambda_min <= 0.0 {
        return Err(Error::EigenFailure(format!("nonpositive eigenvalue {lambda_min}")));
    }
    let kappa = lambda_max / lambda_min;
    Ok(SpectralCertificate {
        d: space.dim(),
        degree: DegreeLabel::of(space.kind()),
        mesh: mesh_label.to_string(),
        lambda_min,
        lambda_max,
        kappa,
        q: q_from_kappa(kappa),
        bound_kappa: kappa_bound(space.kind(), space.dim()),
        residual: eig.residual,
    })
}
