use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::pwpoly::PiecewisePoly;
use crate::error::{Error, Result};
use crate::linalg::{SpdSolver, DENSE_SOLVE_LIMIT};
use crate::mesh::{SimplexId, SimplicialMesh};
use crate::polyspace::quadrature::SimplexRule;
use crate::polyspace::reference::{self, nodes};
use crate::polyspace::FeSpace;

/// L² projection onto a finite element space: assembled mass matrix and a
/// factored solver.
pub struct Projector {
    space: FeSpace,
    triplets: Vec<(usize, usize, f64)>,
    solver: SpdSolver,
}

impl Projector {
    pub fn new(space: FeSpace) -> Result<Self> {
        if space.n_dofs() == 0 {
            return Err(Error::InvalidParameter("space has no degrees of freedom".into()));
        }
        let locals: Vec<DMatrix<f64>> = (0..space.n_elements()).into_par_iter().map(|e| space.local_mass(e)).collect();
        let mut triplets = Vec::new();
        for (e, m) in locals.iter().enumerate() {
            let dofs = space.element_dofs(e);
            for (a, ga) in dofs.iter().enumerate() {
                let Some(ga) = ga else { continue };
                for (b, gb) in dofs.iter().enumerate() {
                    if let Some(gb) = gb {
                        triplets.push((*ga, *gb, m[(a, b)]));
                    }
                }
            }
        }
        let solver = SpdSolver::from_triplets(space.n_dofs(), &triplets)?;
        Ok(Projector {
            space,
            triplets,
            solver,
        })
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn volumes(&self) -> Vec<f64> {
        (0..self.space.n_elements()).map(|e| self.space.volume(e)).collect()
    }

    /// Dense mass matrix; only for spaces up to the dense solve limit.
    pub fn mass_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.space.n_dofs();
        if n > DENSE_SOLVE_LIMIT {
            return Err(Error::InvalidParameter(format!("{n} dofs exceed the dense limit")));
        }
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, v) in &self.triplets {
            m[(i, j)] += v;
        }
        Ok(m)
    }

    pub fn mass_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for &(i, j, v) in &self.triplets {
            y[i] += v * x[j];
        }
        y
    }

    /// `M⁻¹ r`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solver.solve(rhs)
    }

    fn scatter(&self, per_element: Vec<DVector<f64>>) -> Vec<f64> {
        let mut rhs = vec![0.0; self.space.n_dofs()];
        for (e, local) in per_element.iter().enumerate() {
            for (a, g) in self.space.element_dofs(e).iter().enumerate() {
                if let Some(g) = g {
                    rhs[*g] += local[a];
                }
            }
        }
        rhs
    }

    /// `⟨u, b_m⟩` for a piecewise polynomial on the same mesh.
    pub fn rhs(&self, u: &PiecewisePoly) -> Vec<f64> {
        let s = &self.space;
        let m = reference::mass(s.dim(), s.degree(), u.degree());
        let pt = s.basis_transform().transpose();
        let locals = (0..s.n_elements())
            .into_par_iter()
            .map(|e| &pt * (&*m * DVector::from_column_slice(u.element(e))) * s.volume(e))
            .collect();
        self.scatter(locals)
    }

    /// `⟨f, b_m⟩` with a positive quadrature rule exact to `degree`.
    pub fn rhs_callable(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync), degree: u32) -> Vec<f64> {
        let s = &self.space;
        let rule = SimplexRule::new(s.dim(), degree);
        let basis_at: Vec<Vec<f64>> = rule
            .points
            .iter()
            .map(|l| reference::basis_values(s.dim(), s.degree(), l))
            .collect();
        let pt = s.basis_transform().transpose();
        let locals = (0..s.n_elements())
            .into_par_iter()
            .map(|e| {
                let mut acc = DVector::zeros(s.n_nodal());
                for ((l, w), b) in rule.points.iter().zip(&rule.weights).zip(&basis_at) {
                    let fx = f(&s.map_to_physical(e, l));
                    for (i, bi) in b.iter().enumerate() {
                        acc[i] += w * fx * bi;
                    }
                }
                &pt * acc * s.volume(e)
            })
            .collect();
        self.scatter(locals)
    }

    /// `⟨u, b_m⟩` for `u` living on a refinement `fine` of this space's
    /// mesh. Integration is exact: each fine element lies inside one coarse
    /// element and the coarse basis is evaluated at the fine nodes.
    pub fn rhs_fine(&self, fine: &SimplicialMesh, u: &PiecewisePoly) -> Result<Vec<f64>> {
        let s = &self.space;
        let d = s.dim();
        let p = s.degree();
        let coarse: HashMap<SimplexId, usize> = s.elements().iter().enumerate().map(|(e, &id)| (id, e)).collect();
        let fine_ids = fine.active_ids();
        if fine_ids.len() != u.n_elements() {
            return Err(Error::InvalidParameter("fine function does not match the fine mesh".into()));
        }
        let m = reference::mass(d, p, u.degree());
        let fine_nodes: Vec<DVector<f64>> = nodes(d, p)
            .iter()
            .map(|a| DVector::from_iterator(d + 1, a.parts().iter().map(|&x| x as f64 / p as f64)))
            .collect();
        let mut locals = vec![DVector::zeros(s.n_local()); s.n_elements()];
        for (f, &fid) in fine_ids.iter().enumerate() {
            let (e, bary) = ancestor_map(fine, fid, &coarse)?;
            // Coarse nodal basis evaluated at the fine element's nodes.
            let mut ev = DMatrix::zeros(fine_nodes.len(), s.n_nodal());
            for (r, x) in fine_nodes.iter().enumerate() {
                let lam = &bary * x;
                for (c, v) in reference::basis_values(d, p, lam.as_slice()).into_iter().enumerate() {
                    ev[(r, c)] = v;
                }
            }
            let vol = fine.volume(fid);
            let contrib = (ev * s.basis_transform()).transpose() * (&*m * DVector::from_column_slice(u.element(f))) * vol;
            locals[e] += contrib;
        }
        Ok(self.scatter(locals))
    }

    /// `P_mn = ⟨b_n^fine, b_m⟩` for a space on a refinement of this mesh.
    pub fn mixed_mass(&self, fine: &SimplicialMesh, fine_space: &FeSpace) -> Result<DMatrix<f64>> {
        let s = &self.space;
        let d = s.dim();
        let p = s.degree();
        let qf = fine_space.degree();
        if s.n_dofs() > DENSE_SOLVE_LIMIT || fine_space.n_dofs() > DENSE_SOLVE_LIMIT {
            return Err(Error::InvalidParameter("mixed mass exceeds the dense limit".into()));
        }
        let coarse: HashMap<SimplexId, usize> = s.elements().iter().enumerate().map(|(e, &id)| (id, e)).collect();
        let m = reference::mass(d, qf, p);
        let fine_nodes: Vec<DVector<f64>> = nodes(d, p)
            .iter()
            .map(|a| DVector::from_iterator(d + 1, a.parts().iter().map(|&x| x as f64 / p as f64)))
            .collect();
        let mut out = DMatrix::zeros(s.n_dofs(), fine_space.n_dofs());
        for f in 0..fine_space.n_elements() {
            let (e, bary) = ancestor_map(fine, fine_space.simplex_id(f), &coarse)?;
            let mut ev = DMatrix::zeros(fine_nodes.len(), s.n_nodal());
            for (r, x) in fine_nodes.iter().enumerate() {
                let lam = &bary * x;
                for (c, v) in reference::basis_values(d, p, lam.as_slice()).into_iter().enumerate() {
                    ev[(r, c)] = v;
                }
            }
            let local = fine_space.basis_transform().transpose() * &*m * ev * s.basis_transform() * fine_space.volume(f);
            for (a, ga) in fine_space.element_dofs(f).iter().enumerate() {
                let Some(ga) = ga else { continue };
                for (c, gc) in s.element_dofs(e).iter().enumerate() {
                    if let Some(gc) = gc {
                        out[(*gc, *ga)] += local[(a, c)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn project(&self, u: &PiecewisePoly) -> Result<Vec<f64>> {
        self.solve(&self.rhs(u))
    }

    pub fn project_callable(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync), degree: u32) -> Result<Vec<f64>> {
        self.solve(&self.rhs_callable(f, degree))
    }

    pub fn project_fine(&self, fine: &SimplicialMesh, u: &PiecewisePoly) -> Result<Vec<f64>> {
        self.solve(&self.rhs_fine(fine, u)?)
    }

    pub fn to_pw(&self, x: &[f64]) -> PiecewisePoly {
        PiecewisePoly::from_space(&self.space, x)
    }

    /// `‖v‖₂` for coefficients `x`.
    pub fn norm(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.mass_apply(x)).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }
}

/// Coarse element containing fine simplex `id` and the matrix whose
/// columns are the fine vertices in the coarse element's barycentric
/// coordinates.
pub fn ancestor_map(
    mesh: &SimplicialMesh,
    id: SimplexId,
    coarse: &HashMap<SimplexId, usize>,
) -> Result<(usize, DMatrix<f64>)> {
    let d = mesh.dim();
    let mut bary = DMatrix::identity(d + 1, d + 1);
    let mut cur = id;
    loop {
        if let Some(&e) = coarse.get(&cur) {
            return Ok((e, bary));
        }
        let parent = mesh
            .simplex(cur)
            .parent()
            .ok_or_else(|| Error::InvalidParameter(format!("simplex {id} is not inside the coarse mesh")))?;
        let ps = mesh.simplex(parent);
        let (a, b) = (ps.vertices()[0], ps.vertices()[ps.tag()]);
        let mut step = DMatrix::zeros(d + 1, d + 1);
        for (c, &v) in mesh.simplex(cur).vertices().iter().enumerate() {
            match ps.local_index(v) {
                Some(i) => step[(i, c)] = 1.0,
                None => {
                    debug_assert!(mesh.midpoint_coords(a, b).ok().as_deref() == Some(mesh.vertex(v)));
                    step[(0, c)] = 0.5;
                    step[(ps.tag(), c)] = 0.5;
                }
            }
        }
        bary = step * bary;
        cur = parent;
    }
}
