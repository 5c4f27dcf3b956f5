//! Second-order test of the regular polygon as a critical point of
//! `K_m = f_m + Σ λ g_i` with `λ` from the closed form and zero slacks.

use serde::Serialize;

use super::{lagrange_closed_form, MeanChord, Problem};
use crate::geometry::{check_chord_index, regular_polygon, PointConfiguration};
use crate::linalg::{dot, jacobi_eigen, norm};
use crate::{Error, Result};

/// Default difference step for a loop of unit length.
pub const DEFAULT_HESSIAN_STEP: f64 = 1e-4;

/// Allowed eigenvalue drift between steps `h` and `h/2`, relative to
/// `1 + max |eigenvalue|`.
pub const RICHARDSON_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedHessian {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub dim: usize,
    pub step: f64,
    /// Eigenvalues in units of `1/L`, ascending, Richardson-extrapolated.
    pub eigenvalues: Vec<f64>,
    /// Largest change between the `h` and `h/2` estimates.
    pub step_change: f64,
    /// Number of independent constraint gradients and rigid motions removed.
    pub removed: usize,
}

/// Central-difference Hessian of `K_m` at the regular polygon of perimeter
/// `length` (row-major over all `N·dim` coordinates), and the polygon.
pub fn lagrangian_hessian(
    n: usize,
    m: usize,
    dim: usize,
    length: f64,
    h: f64,
) -> Result<(Vec<f64>, PointConfiguration)> {
    check_chord_index(n, m)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("step {h} is not positive")));
    }
    let polygon = regular_polygon(n, length, dim)?;
    let problem = Problem::new(n, dim, length)?;
    let objective = MeanChord { n, dim, m };
    let lambda = vec![lagrange_closed_form(n, m)?; n];
    let size = n * dim;
    let mut hess = vec![0.0; size * size];
    let mut probe = polygon.coords().to_vec();
    for c in 0..size {
        let base = probe[c];
        probe[c] = base + h;
        let plus = problem.lagrangian_gradient(&objective, &probe, &lambda)?;
        probe[c] = base - h;
        let minus = problem.lagrangian_gradient(&objective, &probe, &lambda)?;
        probe[c] = base;
        for r in 0..size {
            hess[r * size + c] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    for r in 0..size {
        for c in r + 1..size {
            let avg = 0.5 * (hess[r * size + c] + hess[c * size + r]);
            hess[r * size + c] = avg;
            hess[c * size + r] = avg;
        }
    }
    Ok((hess, polygon))
}

/// Translations and infinitesimal rotations of `cfg`.
pub fn rigid_motions(cfg: &PointConfiguration) -> Vec<Vec<f64>> {
    let (n, d) = (cfg.len(), cfg.dim());
    let mut out = Vec::new();
    for c in 0..d {
        let mut v = vec![0.0; n * d];
        (0..n).for_each(|j| v[j * d + c] = 1.0);
        out.push(v);
    }
    for a in 0..d {
        for b in a + 1..d {
            let mut v = vec![0.0; n * d];
            for j in 0..n {
                let p = cfg.point(j);
                v[j * d + a] = -p[b];
                v[j * d + b] = p[a];
            }
            out.push(v);
        }
    }
    out
}

fn constraint_gradients(cfg: &PointConfiguration) -> Vec<Vec<f64>> {
    let (n, d) = (cfg.len(), cfg.dim());
    (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            let r = cfg.distance(i, j);
            let mut v = vec![0.0; n * d];
            for c in 0..d {
                let u = (cfg.point(i)[c] - cfg.point(j)[c]) / r;
                v[i * d + c] = -u;
                v[j * d + c] = u;
            }
            v
        })
        .collect()
}

/// Appends `v` to the orthonormal set `basis` if it is independent of it.
fn extend_orthonormal(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) -> bool {
    let scale = norm(&v);
    if scale == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis.iter() {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
    }
    let rest = norm(&v);
    if rest <= 1e-9 * scale {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= rest);
    basis.push(v);
    true
}

fn projected_eigenvalues(n: usize, m: usize, dim: usize, h: f64) -> Result<(Vec<f64>, usize)> {
    let (hess, polygon) = lagrangian_hessian(n, m, dim, 1.0, h)?;
    let size = n * dim;
    let mut removed = Vec::new();
    for v in rigid_motions(&polygon)
        .into_iter()
        .chain(constraint_gradients(&polygon))
    {
        extend_orthonormal(&mut removed, v);
    }
    let removed_count = removed.len();
    let mut all = removed;
    for k in 0..size {
        let mut e = vec![0.0; size];
        e[k] = 1.0;
        extend_orthonormal(&mut all, e);
    }
    let complement = &all[removed_count..];
    let k = complement.len();
    let mut reduced = vec![0.0; k * k];
    let hv: Vec<Vec<f64>> = complement
        .iter()
        .map(|v| {
            (0..size)
                .map(|r| (0..size).map(|c| hess[r * size + c] * v[c]).sum())
                .collect()
        })
        .collect();
    for a in 0..k {
        for b in 0..k {
            reduced[a * k + b] = dot(&complement[a], &hv[b]);
        }
    }
    Ok((jacobi_eigen(&reduced, k).values, removed_count))
}

/// Eigenvalues of the Hessian of `K_m` at the regular `N`-gon of unit
/// perimeter in `R^dim`, restricted to the orthogonal complement of the
/// rigid motions and the constraint gradients.
///
/// Fails with [`Error::StepSize`] if halving `h` moves any eigenvalue by
/// more than [`RICHARDSON_TOL`].
pub fn projected_hessian_in(n: usize, m: usize, dim: usize, h: f64) -> Result<ProjectedHessian> {
    let (coarse, removed) = projected_eigenvalues(n, m, dim, h)?;
    let (fine, _) = projected_eigenvalues(n, m, dim, 0.5 * h)?;
    let change = coarse
        .iter()
        .zip(&fine)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let scale = 1.0 + fine.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(change <= RICHARDSON_TOL * scale) {
        return Err(Error::StepSize { h, change });
    }
    let eigenvalues = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    Ok(ProjectedHessian {
        n,
        m,
        dim,
        step: h,
        eigenvalues,
        step_change: change,
        removed,
    })
}

/// Planar projected Hessian eigenvalues, in units of `1/L`.
pub fn projected_hessian(n: usize, m: usize, h: f64) -> Result<Vec<f64>> {
    Ok(projected_hessian_in(n, m, 2, h)?.eigenvalues)
}
