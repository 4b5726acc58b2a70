use super::operator_c::OperatorC;
use super::pwpoly::PiecewisePoly;
use crate::error::{Error, Result};

/// Chebyshev semi-iteration for `C x = C u` on the spectral interval
/// `[a, b]` of `C` restricted to the space. Returns the iterates
/// `Q^{(0)}u = 0, Q^{(1)}u, …, Q^{(ν)}u` as coefficient vectors.
pub fn accelerated_iterates(op: &OperatorC<'_>, u: &PiecewisePoly, nu: usize, interval: (f64, f64)) -> Result<Vec<Vec<f64>>> {
    let (a, b) = interval;
    if !(a > 0.0 && b >= a) {
        return Err(Error::InvalidParameter(format!("invalid spectral interval [{a}, {b}]")));
    }
    let n = op.projector().space().n_dofs();
    let mut out = vec![vec![0.0; n]];
    if nu == 0 {
        return Ok(out);
    }
    let theta = (b + a) / 2.0;
    let delta = (b - a) / 2.0;
    let mut r = op.apply(u)?;
    if delta == 0.0 {
        // One step is exact when the spectrum is a single point.
        let x: Vec<f64> = r.iter().map(|v| v / theta).collect();
        out.extend(std::iter::repeat_n(x, nu));
        return Ok(out);
    }
    let sigma = theta / delta;
    let mut rho = 1.0 / sigma;
    let mut dir: Vec<f64> = r.iter().map(|v| v / theta).collect();
    let mut x = vec![0.0; n];
    for step in 0..nu {
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi += di;
        }
        out.push(x.clone());
        if step + 1 == nu {
            break;
        }
        let cd = op.apply_coeffs(&dir)?;
        for (ri, ci) in r.iter_mut().zip(&cd) {
            *ri -= ci;
        }
        let rho_next = 1.0 / (2.0 * sigma - rho);
        for (di, ri) in dir.iter_mut().zip(&r) {
            *di = rho_next * rho * *di + 2.0 * rho_next / delta * ri;
        }
        rho = rho_next;
    }
    Ok(out)
}

pub fn accelerated(op: &OperatorC<'_>, u: &PiecewisePoly, nu: usize, interval: (f64, f64)) -> Result<Vec<f64>> {
    Ok(accelerated_iterates(op, u, nu, interval)?.pop().expect("at least one iterate"))
}
