use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{generalized_eigen, DENSE_SOLVE_LIMIT};
use crate::mesh::distance::ElementDistance;
use crate::mesh::{SimplexId, SimplicialMesh};
use crate::polyspace::reference;
use crate::polyspace::{FeSpace, SpaceKind};
use crate::projection::project::ancestor_map;
use crate::projection::{PiecewisePoly, Projector};

/// `∫_T ∇b_a · ∇b_l` for the local basis.
pub fn local_stiffness(space: &FeSpace, e: usize) -> DMatrix<f64> {
    let d = space.dim();
    let g = space.barycentric_gradients(e);
    let gg = &g * g.transpose();
    let n = space.n_nodal();
    let mut k = DMatrix::zeros(n, n);
    for j in 0..=d {
        for m in 0..=d {
            k += &*reference::grad_mass(d, space.degree(), j, m) * gg[(j, m)];
        }
    }
    let p = space.basis_transform();
    p.transpose() * k * p * space.volume(e)
}

fn assemble(space: &FeSpace, scale: &[f64], local: impl Fn(usize) -> DMatrix<f64>) -> DMatrix<f64> {
    let n = space.n_dofs();
    let mut out = DMatrix::zeros(n, n);
    for e in 0..space.n_elements() {
        let m = local(e) * scale[e];
        let dofs = space.element_dofs(e);
        for (a, ga) in dofs.iter().enumerate() {
            for (b, gb) in dofs.iter().enumerate() {
                if let (Some(ga), Some(gb)) = (ga, gb) {
                    out[(*ga, *gb)] += m[(a, b)];
                }
            }
        }
    }
    out
}

/// `Σ_T s_T ∫_T b_a b_l`.
pub fn weighted_mass_matrix(space: &FeSpace, scale: &[f64]) -> DMatrix<f64> {
    assemble(space, scale, |e| space.local_mass(e))
}

/// `Σ_T s_T ∫_T ∇b_a · ∇b_l`.
pub fn weighted_stiffness_matrix(space: &FeSpace, scale: &[f64]) -> DMatrix<f64> {
    assemble(space, scale, |e| local_stiffness(space, e))
}

fn dense_limit(n: usize) -> Result<()> {
    if n > DENSE_SOLVE_LIMIT {
        return Err(Error::InvalidParameter(format!("{n} dofs exceed the dense limit")));
    }
    Ok(())
}

/// Exact `sup_u ‖ρQu‖₂/‖ρu‖₂` over all of L². The supremum is attained on
/// `ρ^{-2}·V`, which turns it into `M_{ρ⁻²} M⁻¹ M_{ρ²} M⁻¹ M_{ρ⁻²} y = λ M_{ρ⁻²} y`.
pub fn weighted_l2_ratio(proj: &Projector, rho: &[f64]) -> Result<f64> {
    let s = proj.space();
    dense_limit(s.n_dofs())?;
    if rho.len() != s.n_elements() {
        return Err(Error::InvalidParameter("weight does not match the space".into()));
    }
    let sq: Vec<f64> = rho.iter().map(|r| r * r).collect();
    let inv: Vec<f64> = sq.iter().map(|r| 1.0 / r).collect();
    let m = proj.mass_dense()?;
    let m_plus = weighted_mass_matrix(s, &sq);
    let m_minus = weighted_mass_matrix(s, &inv);
    let chol = Cholesky::new(m).ok_or(Error::NotPositiveDefinite)?;
    let w = chol.solve(&m_minus);
    let a = w.transpose() * m_plus * &w;
    let eig = generalized_eigen(&a, &m_minus)?;
    Ok(eig.max().max(0.0).sqrt())
}

/// `6γ³/(1−γq)`, defined for `γq < 1`.
pub fn weighted_l2_bound(gamma_rho: f64, q: f64) -> Option<f64> {
    (gamma_rho * q < 1.0).then(|| 6.0 * gamma_rho.powi(3) / (1.0 - gamma_rho * q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedReport {
    pub gamma_rho: f64,
    pub measured: f64,
    /// `None` when the bound does not apply.
    pub bound: Option<f64>,
    pub pass: bool,
}

pub fn weighted_l2_report(proj: &Projector, rho: &[f64], gamma_rho: f64, q: f64) -> Result<WeightedReport> {
    let measured = weighted_l2_ratio(proj, rho)?;
    let bound = weighted_l2_bound(gamma_rho, q);
    Ok(WeightedReport {
        gamma_rho,
        measured,
        bound,
        pass: bound.is_none_or(|b| measured <= b),
    })
}

fn weighted_lp(u: &PiecewisePoly, rho: &[f64], vols: &[f64], p: f64) -> f64 {
    let mut w = u.clone();
    for (e, r) in rho.iter().enumerate() {
        for v in w.element_mut(e) {
            *v *= r;
        }
    }
    w.lp_norm(vols, p)
}

/// Largest sampled `‖ρQu‖_p/‖ρu‖_p` over random functions and indicators
/// of elements with extreme weight. A lower bound for the operator norm.
pub fn weighted_lp_ratio(proj: &Projector, rho: &[f64], p: f64, samples: usize, seed: u64) -> Result<f64> {
    let s = proj.space();
    let n = s.n_elements();
    let vols = proj.volumes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cands = Vec::new();
    for i in 0..samples {
        let mut u = PiecewisePoly::zeros(s.dim(), s.degree() + 1, n);
        // Alternate global noise and single-element bumps.
        if i % 2 == 0 {
            for v in u.values_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        } else {
            let e = rng.random_range(0..n);
            for v in u.element_mut(e) {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        cands.push(u);
    }
    let (lo, hi) = (0..n).fold((0, 0), |(lo, hi), e| {
        (if rho[e] < rho[lo] { e } else { lo }, if rho[e] > rho[hi] { e } else { hi })
    });
    for e in [lo, hi] {
        let mut u = PiecewisePoly::zeros(s.dim(), 0, n);
        u.element_mut(e)[0] = 1.0;
        cands.push(u);
    }
    let ratios: Result<Vec<f64>> = cands
        .par_iter()
        .map(|u| {
            let qu = proj.to_pw(&proj.project(u)?);
            Ok(weighted_lp(&qu, rho, &vols, p) / weighted_lp(u, rho, &vols, p))
        })
        .collect();
    Ok(ratios?.into_iter().fold(0.0, f64::max))
}

/// Exact `sup ‖ρ∇Qu‖₂/‖ρ∇u‖₂` over `u` in the degree-`K` zero-trace space
/// of one uniform refinement, with `Q` the projection onto the zero-trace
/// space on `mesh`. Γ is the whole boundary.
pub fn gradient_ratio_two_mesh(mesh: &SimplicialMesh, degree: u32, rho: &[f64]) -> Result<f64> {
    let mut coarse = mesh.clone();
    coarse.set_gamma_all();
    let mut fine = coarse.clone();
    fine.refine_uniform()?;
    let kind = SpaceKind::LagrangeZeroTrace { degree };
    let cs = FeSpace::new(&coarse, kind)?;
    let fs = FeSpace::new(&fine, kind)?;
    dense_limit(fs.n_dofs())?;
    if rho.len() != cs.n_elements() {
        return Err(Error::InvalidParameter("weight does not match the mesh".into()));
    }
    let index: HashMap<SimplexId, usize> = cs.elements().iter().enumerate().map(|(e, &id)| (id, e)).collect();
    let fine_rho: Vec<f64> = (0..fs.n_elements())
        .map(|f| ancestor_map(&fine, fs.simplex_id(f), &index).map(|(e, _)| rho[e]))
        .collect::<Result<_>>()?;
    let sq = |r: &[f64]| r.iter().map(|x| x * x).collect::<Vec<f64>>();
    let a_c = weighted_stiffness_matrix(&cs, &sq(rho));
    let a_f = weighted_stiffness_matrix(&fs, &sq(&fine_rho));
    let proj = Projector::new(cs)?;
    let p = proj.mixed_mass(&fine, &fs)?;
    let chol = Cholesky::new(proj.mass_dense()?).ok_or(Error::NotPositiveDefinite)?;
    let w = chol.solve(&p);
    let a = w.transpose() * a_c * &w;
    let eig = generalized_eigen(&a, &a_f)?;
    Ok(eig.max().max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeDecay {
    /// `max_T (1/|T|) Σ_{T'} |T'| γ^{−δ(T,T')}`.
    pub max_ratio: f64,
    /// `log γ_h / log(γ/γ_h^d)`; `None` when `γ_h = 1`.
    pub factor: Option<f64>,
    /// `max_ratio / factor`.
    pub constant: Option<f64>,
}

pub fn volume_decay_constant(volumes: &[f64], dist: &ElementDistance, gamma: f64, gamma_h: f64, d: usize) -> Result<VolumeDecay> {
    if gamma <= gamma_h.powi(d as i32) {
        return Err(Error::InvalidParameter(format!("γ = {gamma} must exceed γ_h^d = {}", gamma_h.powi(d as i32))));
    }
    let max_ratio = (0..dist.len())
        .into_par_iter()
        .map(|t| {
            let sum: f64 = dist
                .distances_from(t)
                .iter()
                .zip(volumes)
                .filter_map(|(x, v)| x.map(|x| v * gamma.powi(-(x as i32))))
                .sum();
            sum / volumes[t]
        })
        .reduce(|| 0.0, f64::max);
    let factor = (gamma_h > 1.0).then(|| gamma_h.ln() / (gamma / gamma_h.powi(d as i32)).ln());
    Ok(VolumeDecay {
        max_ratio,
        factor,
        constant: factor.map(|f| max_ratio / f),
    })
}

/// No-growth rule: from the fourth entry on, each value is at most 1.05
/// times the largest earlier value.
pub fn no_growth(values: &[f64]) -> bool {
    (3..values.len()).all(|r| values[r] <= 1.05 * values[..r].iter().fold(0.0f64, |m, &v| m.max(v)))
}
