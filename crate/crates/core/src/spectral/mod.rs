//! Ground state of `N` identical point interactions at the beads of a
//! configuration, through the finite `N × N` matrix `Q_{iκ}`.
//!
//! An energy `−κ²` is an eigenvalue exactly when `Q_{iκ}` is singular; the
//! ground state sits where the smallest eigenvalue of `Q_{iκ}` crosses zero.

mod bessel;

use std::f64::consts::PI;

use serde::Serialize;

pub use bessel::{bessel_k0, EULER_GAMMA};

use crate::geometry::PointConfiguration;
use crate::linalg::jacobi_eigen;
use crate::{Error, Result};

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "point interactions are defined for dimension 2 or 3, not {dim}"
        )))
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("κ must be positive, got {kappa}")))
    }
}

/// Free Green's function `G_{iκ}(r)`: `K_0(κr)/2π` in the plane,
/// `e^{−κr}/(4πr)` in space.
pub fn green_value(r: f64, kappa: f64, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    check_kappa(kappa)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {r}")));
    }
    Ok(match dim {
        2 => bessel_k0(kappa * r)? / (2.0 * PI),
        _ => (-kappa * r).exp() / (4.0 * PI * r),
    })
}

/// Regularized value `ξ^κ` of the Green's function at the source.
pub fn xi(kappa: f64, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    check_kappa(kappa)?;
    Ok(match dim {
        2 => -((0.5 * kappa).ln() + EULER_GAMMA) / (2.0 * PI),
        _ => -kappa / (4.0 * PI),
    })
}

/// The symmetric matrix `Q_{iκ}` with diagonal `α − ξ^κ` and off-diagonal
/// entries `−G_{iκ}(|y_i − y_j|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QMatrix {
    pub n: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub dim: usize,
    /// Row-major entries.
    pub entries: Vec<f64>,
}

impl QMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }
}

/// Pairwise distances of a configuration checked for use with the point
/// interaction kernel in `R^dim`.
struct Sites {
    n: usize,
    dim: usize,
    distances: Vec<f64>,
}

impl Sites {
    fn new(cfg: &PointConfiguration, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if cfg.dim() > dim {
            return Err(Error::InvalidInput(format!(
                "configuration lives in R^{} but the kernel is for R^{dim}",
                cfg.dim()
            )));
        }
        if cfg.len() > 1 {
            cfg.require_distinct()?;
        }
        let n = cfg.len();
        let mut distances = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = cfg.distance(i, j);
                distances[i * n + j] = d;
                distances[j * n + i] = d;
            }
        }
        Ok(Self { n, dim, distances })
    }

    fn q(&self, alpha: f64, kappa: f64) -> Result<QMatrix> {
        let n = self.n;
        let diag = alpha - xi(kappa, self.dim)?;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = diag;
            for j in i + 1..n {
                let g = green_value(self.distances[i * n + j], kappa, self.dim)?;
                entries[i * n + j] = -g;
                entries[j * n + i] = -g;
            }
        }
        Ok(QMatrix {
            n,
            alpha,
            kappa,
            dim: self.dim,
            entries,
        })
    }

    fn green_pair_sum(&self, kappa: f64) -> Result<f64> {
        let n = self.n;
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                sum += green_value(self.distances[i * n + j], kappa, self.dim)?;
            }
        }
        Ok(sum)
    }
}

/// `Q_{iκ}` for the beads of `cfg`. A planar configuration may be used with
/// the three-dimensional kernel; the reverse is an error.
pub fn build_q(cfg: &PointConfiguration, alpha: f64, kappa: f64, dim: usize) -> Result<QMatrix> {
    Sites::new(cfg, dim)?.q(alpha, kappa)
}

/// Smallest eigenvalue of `Q` and a unit eigenvector for it.
pub fn min_eig(q: &QMatrix) -> (f64, Vec<f64>) {
    let e = jacobi_eigen(&q.entries, q.n);
    (e.values[0], e.vector(0).to_vec())
}

/// `(φ, Q φ)` with `φ = N^{−1/2}(1, …, 1)`, i.e. `α − ξ^κ − (2/N)Σ_{i<j} g_ij`.
/// An upper bound on the smallest eigenvalue of `Q`, attained by the regular polygon.
pub fn rayleigh_upper_bound(
    cfg: &PointConfiguration,
    alpha: f64,
    kappa: f64,
    dim: usize,
) -> Result<f64> {
    let sites = Sites::new(cfg, dim)?;
    Ok(alpha - xi(kappa, dim)? - 2.0 / cfg.len() as f64 * sites.green_pair_sum(kappa)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundState {
    pub kappa1: f64,
    /// `−κ₁²`.
    pub energy: f64,
    pub eigvec: Vec<f64>,
    pub iterations: usize,
}

/// Default localization of `κ₁`.
pub const KAPPA_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

/// Ground state energy `ε₁ = −κ₁²`, or `None` when there is no bound state.
///
/// The smallest eigenvalue of `Q_{iκ}` increases with `κ`; the root is
/// bracketed and bisected, and any sampled violation of that monotonicity
/// is reported as [`Error::NumericalAssumption`]. In the plane a bound
/// state always exists; in space it can fail to exist for large `α`.
pub fn ground_state(
    cfg: &PointConfiguration,
    alpha: f64,
    dim: usize,
    tol: f64,
) -> Result<Option<GroundState>> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!(
            "coupling {alpha} is not finite"
        )));
    }
    let sites = Sites::new(cfg, dim)?;
    let lowest = |kappa: f64| -> Result<f64> { Ok(min_eig(&sites.q(alpha, kappa)?).0) };

    let mut lo = 1e-6;
    let mut f_lo = lowest(lo)?;
    if f_lo >= 0.0 {
        if dim == 3 {
            let floor = 1e-8;
            let f_floor = lowest(floor)?;
            if f_floor >= 0.0 {
                return Ok(None);
            }
            (lo, f_lo) = (floor, f_floor);
        } else {
            while f_lo >= 0.0 {
                lo *= 1e-3;
                if lo < 1e-300 {
                    return Err(Error::NumericalAssumption(
                        "no sign change of min σ(Q) above κ = 1e-300 in the plane".into(),
                    ));
                }
                f_lo = lowest(lo)?;
            }
        }
    }

    let mut hi = 1.0f64.max(2.0 * lo);
    let mut f_hi = lowest(hi)?;
    while f_hi <= 0.0 {
        if f_hi < f_lo {
            return Err(monotonicity_error(lo, f_lo, hi, f_hi));
        }
        (lo, f_lo) = (hi, f_hi);
        hi *= 2.0;
        if hi > 1e150 {
            return Err(Error::NumericalAssumption(
                "min σ(Q) stays negative for all sampled κ".into(),
            ));
        }
        f_hi = lowest(hi)?;
    }

    let slack = 1e-12 * (f_lo.abs() + f_hi.abs());
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = lowest(mid)?;
        if f_mid < f_lo - slack || f_mid > f_hi + slack {
            return Err(monotonicity_error(lo, f_lo, hi, f_hi));
        }
        if f_mid < 0.0 {
            (lo, f_lo) = (mid, f_mid);
        } else {
            (hi, f_hi) = (mid, f_mid);
        }
        iterations += 1;
    }
    let kappa1 = 0.5 * (lo + hi);
    let (_, eigvec) = min_eig(&sites.q(alpha, kappa1)?);
    Ok(Some(GroundState {
        kappa1,
        energy: -kappa1 * kappa1,
        eigvec,
        iterations,
    }))
}

fn monotonicity_error(lo: f64, f_lo: f64, hi: f64, f_hi: f64) -> Error {
    Error::NumericalAssumption(format!(
        "min σ(Q) is not increasing in κ: {f_lo:e} at {lo:e}, {f_hi:e} at {hi:e}"
    ))
}

/// `ε₁` for `cfg`, failing with [`Error::NoBoundState`] if there is none.
pub fn ground_energy(cfg: &PointConfiguration, alpha: f64, dim: usize) -> Result<f64> {
    ground_state(cfg, alpha, dim, KAPPA_TOL)?
        .map(|g| g.energy)
        .ok_or(Error::NoBoundState)
}
