//! Charged necklaces, mean chord lengths, and the constrained maximization
//! that singles out the regular polygon.

mod hessian;
mod optimizer;

use std::f64::consts::PI;

use serde::Serialize;

pub use hessian::{
    lagrangian_hessian, projected_hessian, projected_hessian_in, rigid_motions, ProjectedHessian,
    DEFAULT_HESSIAN_STEP, RICHARDSON_TOL,
};
pub use optimizer::{
    optimize, optimize_from, restart_seed, KktReport, Objective, OptimizerOptions, Problem,
};

use crate::chords::nu;
use crate::geometry::{check_chord_index, PointConfiguration};
use crate::spectral::{ground_energy, ground_state};
use crate::{Error, Result};

fn check_charge(q: f64) -> Result<()> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::InvalidInput(format!(
            "charge {q} must be finite and nonzero"
        )));
    }
    Ok(())
}

fn pair_distance(coords: &[f64], dim: usize, i: usize, j: usize) -> f64 {
    (0..dim)
        .map(|c| (coords[i * dim + c] - coords[j * dim + c]).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `q² Σ_{j≠k} |y_j − y_k|^{-1}` over ordered pairs.
pub fn coulomb_energy_pairs(cfg: &PointConfiguration, q: f64) -> Result<f64> {
    check_charge(q)?;
    cfg.require_distinct()?;
    let n = cfg.len();
    let mut sum = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                sum += 1.0 / cfg.distance(j, k);
            }
        }
    }
    Ok(q * q * sum)
}

/// The same energy grouped by cyclic index distance:
/// `2q² Σ_m (ν_m/N) Σ_n |y_{n+m} − y_n|^{-1}`.
pub fn coulomb_energy_regrouped(cfg: &PointConfiguration, q: f64) -> Result<f64> {
    check_charge(q)?;
    cfg.require_distinct()?;
    let n = cfg.len();
    let mut sum = 0.0;
    for m in 1..=n / 2 {
        let weight = nu(n, m)? as f64 / n as f64;
        let inner: f64 = (0..n).map(|i| 1.0 / cfg.distance(i, i + m)).sum();
        sum += weight * inner;
    }
    Ok(2.0 * q * q * sum)
}

/// Coulomb energy of the necklace; both summation orders must agree.
pub fn coulomb_energy(cfg: &PointConfiguration, q: f64) -> Result<f64> {
    let pairs = coulomb_energy_pairs(cfg, q)?;
    let grouped = coulomb_energy_regrouped(cfg, q)?;
    if (pairs - grouped).abs() > 1e-10 * pairs.abs().max(1.0) {
        return Err(Error::NumericalAssumption(format!(
            "pair sum {pairs:e} and regrouped sum {grouped:e} disagree"
        )));
    }
    Ok(pairs)
}

/// Mean `m`-chord length `(1/N) Σ_i |y_i − y_{i+m}|`.
pub fn f_m(cfg: &PointConfiguration, m: usize) -> Result<f64> {
    let n = cfg.len();
    check_chord_index(n, m)?;
    Ok((0..n).map(|i| cfg.distance(i, i + m)).sum::<f64>() / n as f64)
}

/// `λ = σ_m / (N Υ_m) = sin(πm/N) / (N sin(π/N))`.
pub fn lagrange_closed_form(n: usize, m: usize) -> Result<f64> {
    check_chord_index(n, m)?;
    let nf = n as f64;
    Ok((PI * m as f64 / nf).sin() / (nf * (PI / nf).sin()))
}

/// Objective `f_m`.
#[derive(Debug, Clone, Copy)]
pub struct MeanChord {
    pub n: usize,
    pub dim: usize,
    pub m: usize,
}

impl Objective for MeanChord {
    fn value(&self, coords: &[f64]) -> Result<f64> {
        let n = self.n;
        let sum: f64 = (0..n)
            .map(|i| pair_distance(coords, self.dim, i, (i + self.m) % n))
            .sum();
        Ok(sum / n as f64)
    }

    fn gradient(&self, coords: &[f64], grad: &mut [f64]) -> Result<()> {
        let (n, d) = (self.n, self.dim);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..n {
            let j = (i + self.m) % n;
            let r = pair_distance(coords, d, i, j);
            if r == 0.0 {
                return Err(Error::SingularChord { i, j, distance: r });
            }
            for c in 0..d {
                let u = (coords[i * d + c] - coords[j * d + c]) / (r * n as f64);
                grad[i * d + c] += u;
                grad[j * d + c] -= u;
            }
        }
        Ok(())
    }
}

/// Objective `−E_coulomb`.
#[derive(Debug, Clone, Copy)]
pub struct NegativeCoulomb {
    pub n: usize,
    pub dim: usize,
    pub q: f64,
}

impl Objective for NegativeCoulomb {
    fn value(&self, coords: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for j in 0..self.n {
            for k in j + 1..self.n {
                let r = pair_distance(coords, self.dim, j, k);
                if r == 0.0 {
                    return Err(Error::SingularChord {
                        i: j,
                        j: k,
                        distance: r,
                    });
                }
                sum += 2.0 / r;
            }
        }
        Ok(-self.q * self.q * sum)
    }

    fn gradient(&self, coords: &[f64], grad: &mut [f64]) -> Result<()> {
        let d = self.dim;
        let q2 = self.q * self.q;
        grad.iter_mut().for_each(|g| *g = 0.0);
        for j in 0..self.n {
            for k in j + 1..self.n {
                let r = pair_distance(coords, d, j, k);
                if r == 0.0 {
                    return Err(Error::SingularChord {
                        i: j,
                        j: k,
                        distance: r,
                    });
                }
                let w = 2.0 * q2 / (r * r * r);
                for c in 0..d {
                    let diff = coords[j * d + c] - coords[k * d + c];
                    grad[j * d + c] += w * diff;
                    grad[k * d + c] -= w * diff;
                }
            }
        }
        Ok(())
    }
}

/// Objective `ε₁(α, Y)`, with central-difference gradients.
#[derive(Debug, Clone, Copy)]
pub struct GroundStateEnergy {
    pub dim: usize,
    pub length: f64,
    pub alpha: f64,
    /// Difference step.
    pub step: f64,
}

impl GroundStateEnergy {
    fn config(&self, coords: &[f64]) -> Result<PointConfiguration> {
        PointConfiguration::from_flat(self.dim, self.length, coords.to_vec())
    }
}

impl Objective for GroundStateEnergy {
    fn value(&self, coords: &[f64]) -> Result<f64> {
        // Bisect to the resolution of κ itself: the landscape can be very flat.
        ground_state(&self.config(coords)?, self.alpha, self.dim, 0.0)?
            .map(|g| g.energy)
            .ok_or(Error::NoBoundState)
    }

    fn gradient(&self, coords: &[f64], grad: &mut [f64]) -> Result<()> {
        let mut probe = coords.to_vec();
        for i in 0..coords.len() {
            probe[i] = coords[i] + self.step;
            let plus = self.value(&probe)?;
            probe[i] = coords[i] - self.step;
            let minus = self.value(&probe)?;
            probe[i] = coords[i];
            grad[i] = (plus - minus) / (2.0 * self.step);
        }
        Ok(())
    }

    fn analytic_gradient(&self) -> bool {
        false
    }
}

/// Maximizes `f_m` over admissible configurations.
pub fn maximize_fm(
    n: usize,
    length: f64,
    dim: usize,
    m: usize,
    opts: &OptimizerOptions,
) -> Result<(PointConfiguration, KktReport)> {
    check_chord_index(n, m)?;
    let problem = Problem::new(n, dim, length)?;
    optimize(&problem, &MeanChord { n, dim, m }, opts)
}

/// Minimizes the Coulomb energy over admissible configurations; the
/// report's `objective` is the negated energy.
pub fn minimize_coulomb(
    n: usize,
    length: f64,
    dim: usize,
    q: f64,
    opts: &OptimizerOptions,
) -> Result<(PointConfiguration, KktReport)> {
    check_charge(q)?;
    let problem = Problem::new(n, dim, length)?;
    optimize(&problem, &NegativeCoulomb { n, dim, q }, opts)
}

/// Maximizes the ground state energy `ε₁` over admissible configurations.
pub fn maximize_ground_state(
    n: usize,
    length: f64,
    alpha: f64,
    dim: usize,
    opts: &OptimizerOptions,
) -> Result<(PointConfiguration, KktReport)> {
    let problem = Problem::new(n, dim, length)?;
    ground_energy(
        &crate::geometry::regular_polygon(n, length, dim)?,
        alpha,
        dim,
    )?;
    let objective = GroundStateEnergy {
        dim,
        length,
        alpha,
        step: 1e-6 * length,
    };
    optimize(&problem, &objective, opts)
}

/// One `(m, r)` entry of the Chebyshev certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevMargin {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub r: usize,
    /// `sin(πm/N) sin(πr/N)`.
    pub lhs: f64,
    /// `|sin(π/N) sin(πmr/N)|`.
    pub rhs: f64,
    pub margin: f64,
    /// `U_{m−1}(cos π/N) − |U_{m−1}(cos πr/N)|`.
    pub chebyshev_margin: f64,
}

/// `U_k(x)` by the three-term recurrence.
pub fn chebyshev_u(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

/// Margins of `sin(πm/N) sin(πr/N) > |sin(π/N) sin(πmr/N)|` for all
/// `2 ≤ r < m ≤ ⌊N/2⌋`, cross-checked in sign against the Chebyshev form.
/// Empty for `N < 6`.
pub fn chebyshev_check(n: usize) -> Result<Vec<ChebyshevMargin>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("N = {n} < 2")));
    }
    let nf = n as f64;
    let s = |k: usize| (PI * k as f64 / nf).sin();
    let mut out = Vec::new();
    for m in 3..=n / 2 {
        for r in 2..m {
            let lhs = s(m) * s(r);
            let rhs = (s(1) * (PI * (m * r) as f64 / nf).sin()).abs();
            let margin = lhs - rhs;
            let chebyshev_margin = chebyshev_u(m - 1, (PI / nf).cos())
                - chebyshev_u(m - 1, (PI * r as f64 / nf).cos()).abs();
            if (margin > 0.0) != (chebyshev_margin > 0.0) {
                return Err(Error::NumericalAssumption(format!(
                    "sign mismatch at N={n}, m={m}, r={r}: {margin:e} vs {chebyshev_margin:e}"
                )));
            }
            out.push(ChebyshevMargin {
                n,
                m,
                r,
                lhs,
                rhs,
                margin,
                chebyshev_margin,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
