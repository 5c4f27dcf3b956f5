//! Mean-chord inequalities `D^{±p}_{L,N}(m)` and the Green's-function
//! deficit that reduces the spectral problem to them.
//!
//! For beads at equal arc spacing on a loop of length `L`,
//!
//! ```text
//! D^p(m):   Σ_n |y_{n+m} − y_n|^p  ≤  N^{1−p} L^p sin^p(πm/N) / sin^p(π/N)
//! D^{−p}(m): Σ_n |y_{n+m} − y_n|^{−p} ≥ N^{1+p} sin^p(π/N) / (L^p sin^p(πm/N))
//! ```
//!
//! with equality for the regular polygon.

use std::f64::consts::PI;

use serde::Serialize;

use crate::geometry::{check_chord_index, chord_sum, regular_polygon, PointConfiguration};
use crate::spectral::green_value;
use crate::{Error, Result};

/// Relative slack on the deficit before an inequality counts as violated.
pub const DEFICIT_TOL: f64 = 1e-9;

/// One evaluated instance of `D^p_{L,N}(m)`.
///
/// `p` carries its sign: negative for the `D^{−p}` family. `deficit ≥ 0`
/// means the inequality holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub p: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub holds: bool,
}

impl InequalityReport {
    pub const CSV_HEADER: &'static str = "N,m,p,L,lhs,rhs,deficit,holds";

    fn new(n: usize, m: usize, p: f64, length: f64, lhs: f64, rhs: f64) -> Self {
        let deficit = if p > 0.0 { rhs - lhs } else { lhs - rhs };
        Self {
            n,
            m,
            p,
            length,
            lhs,
            rhs,
            deficit,
            holds: deficit >= -DEFICIT_TOL * rhs.abs(),
        }
    }
}

/// Number of distinct chords `{i, j}` with `|i − j| = m` (mod `N`): `N`,
/// except `N/2` for the diameters of an even `N`.
pub fn nu(n: usize, m: usize) -> Result<usize> {
    check_chord_index(n, m)?;
    Ok(if 2 * m == n { n / 2 } else { n })
}

/// Right-hand side of `D^p(m)` for `p > 0`, of `D^{−|p|}(m)` for `p < 0`.
pub fn dp_bound(n: usize, length: f64, m: usize, p: f64) -> Result<f64> {
    check_chord_index(n, m)?;
    if p == 0.0 || !p.is_finite() {
        return Err(Error::InvalidInput(format!(
            "exponent {p} must be finite and nonzero"
        )));
    }
    let nf = n as f64;
    let ratio = (PI * m as f64 / nf).sin() / (PI / nf).sin();
    // Both families are N·(polygon chord)^p.
    Ok(nf * (length / nf * ratio).powf(p))
}

fn check_positive(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("p must be positive, got {p}")))
    }
}

/// Evaluates `D^p(m)` on `cfg` with `L = cfg.length()`.
pub fn check_dp(cfg: &PointConfiguration, m: usize, p: f64) -> Result<InequalityReport> {
    check_positive(p)?;
    let lhs = chord_sum(cfg, m, p)?;
    let rhs = dp_bound(cfg.len(), cfg.length(), m, p)?;
    Ok(InequalityReport::new(
        cfg.len(),
        m,
        p,
        cfg.length(),
        lhs,
        rhs,
    ))
}

/// Evaluates `D^{−p}(m)` on `cfg`; the report's `p` is `−p`.
pub fn check_dminus(cfg: &PointConfiguration, m: usize, p: f64) -> Result<InequalityReport> {
    check_positive(p)?;
    let lhs = chord_sum(cfg, m, -p)?;
    let rhs = dp_bound(cfg.len(), cfg.length(), m, -p)?;
    Ok(InequalityReport::new(
        cfg.len(),
        m,
        -p,
        cfg.length(),
        lhs,
        rhs,
    ))
}

/// `Σ_{i<j} G_{iκ}(|y_i − y_j|) − Σ_{i<j} G_{iκ}(|ỹ_i − ỹ_j|)`, the second sum
/// over the regular polygon with the same `N`, `L`, and dimension.
///
/// A positive value means the configuration binds more strongly than the
/// polygon at this `κ`.
pub fn green_deficit(cfg: &PointConfiguration, kappa: f64, dim: usize) -> Result<f64> {
    cfg.require_distinct()?;
    let n = cfg.len();
    let polygon = regular_polygon(n, cfg.length(), cfg.dim())?;
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += green_value(cfg.distance(i, j), kappa, dim)?
                - green_value(polygon.distance(i, j), kappa, dim)?;
        }
    }
    Ok(sum)
}

/// The Jensen-reduced lower bound on [`green_deficit`]:
/// `Σ_m ν_m [G(mean m-chord) − G(polygon m-chord)]`.
///
/// Groups `m` and `N − m` coincide, so the full pair sum splits as
/// `Σ_{m=1}^{⌊N/2⌋} ν_m`-weighted chord classes; the `m = 1` class is
/// included for completeness (the polygon saturates it).
pub fn green_deficit_jensen(cfg: &PointConfiguration, kappa: f64, dim: usize) -> Result<f64> {
    cfg.require_distinct()?;
    let n = cfg.len();
    let mut total = 0.0;
    for m in 1..=n / 2 {
        let count = nu(n, m)?;
        let mean = chord_sum(cfg, m, 1.0)? / n as f64;
        let polygon = crate::geometry::polygon_chord(n, cfg.length(), m);
        total +=
            count as f64 * (green_value(mean, kappa, dim)? - green_value(polygon, kappa, dim)?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{regular_polygon, rhomboid};

    #[test]
    fn chord_counts() {
        assert_eq!(nu(5, 2).unwrap(), 5);
        assert_eq!(nu(6, 3).unwrap(), 3);
        assert_eq!(nu(4, 1).unwrap(), 4);
        assert!(nu(4, 3).is_err());
        assert!(nu(4, 0).is_err());
    }

    #[test]
    fn chord_counts_partition_all_pairs() {
        for n in 2..40 {
            let total: usize = (1..=n / 2).map(|m| nu(n, m).unwrap()).sum();
            assert_eq!(total, n * (n - 1) / 2);
        }
    }

    #[test]
    fn bounds() {
        assert!((dp_bound(4, 4.0, 2, 2.0).unwrap() - 8.0).abs() < 1e-14);
        assert!((dp_bound(4, 4.0, 2, 3.0).unwrap() - 4.0 * 2f64.powf(1.5)).abs() < 1e-13);
        assert!((dp_bound(4, 4.0, 2, -1.0).unwrap() - 4.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((dp_bound(4, 4.0, 2, 3.0).unwrap() - 11.313_708_5).abs() < 1e-7);
        assert!(dp_bound(4, 4.0, 3, 1.0).is_err());
    }

    #[test]
    fn bound_matches_literal_formulas() {
        for n in 2..12 {
            for m in 1..=n / 2 {
                for p in [0.5, 1.0, 2.0, 3.0] {
                    let (nf, l) = (n as f64, 2.7f64);
                    let (sm, s1) = ((PI * m as f64 / nf).sin(), (PI / nf).sin());
                    let plus = nf.powf(1.0 - p) * l.powf(p) * sm.powf(p) / s1.powf(p);
                    let minus = nf.powf(1.0 + p) * s1.powf(p) / (l.powf(p) * sm.powf(p));
                    assert!((dp_bound(n, l, m, p).unwrap() - plus).abs() < 1e-12 * plus);
                    assert!((dp_bound(n, l, m, -p).unwrap() - minus).abs() < 1e-12 * minus);
                }
            }
        }
    }

    #[test]
    fn square_is_an_equality_case() {
        let sq = regular_polygon(4, 4.0, 2).unwrap();
        let r = check_dp(&sq, 2, 2.0).unwrap();
        assert!(r.holds && r.deficit.abs() < 1e-14);
        let r = check_dminus(&sq, 2, 1.0).unwrap();
        assert!(r.holds && r.deficit.abs() < 1e-14);
        assert_eq!(r.p, -1.0);
    }

    #[test]
    fn rhomboid_reports() {
        let rh = rhomboid(PI / 3.0, 1.0).unwrap();
        let r = check_dp(&rh, 2, 3.0).unwrap();
        assert!(!r.holds);
        assert!((r.deficit + 1.078_6).abs() < 1e-4);
        let r = check_dminus(&rh, 2, 1.0).unwrap();
        assert!(r.holds);
        assert!((r.lhs - 2.0 * (1.0 / 3f64.sqrt() + 1.0)).abs() < 1e-14);
        assert!((r.rhs - 2.828_427_1).abs() < 1e-7);
    }

    #[test]
    fn inscribed_hexagon_against_loop_bound() {
        // regular hexagon inscribed in the unit circle, L = 2π
        let hex = regular_polygon(6, 6.0, 2)
            .unwrap()
            .with_length(std::f64::consts::TAU)
            .unwrap();
        let r = check_dp(&hex, 2, 2.0).unwrap();
        assert!((r.lhs - 18.0).abs() < 1e-12);
        assert!((r.rhs - 4.0 * PI * PI / 2.0).abs() < 1e-12);
        assert!(r.holds && r.deficit > 1.7);
    }

    #[test]
    fn green_deficit_vanishes_on_polygon() {
        let p = regular_polygon(6, 6.0, 2).unwrap();
        assert_eq!(green_deficit(&p, 1.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn rhomboid_green_deficit_is_positive() {
        let rh = rhomboid(PI / 3.0, 1.0).unwrap();
        assert!(green_deficit(&rh, 1.0, 3).unwrap() > 0.0);
        assert!(green_deficit(&rh, 1.0, 2).unwrap() > 0.0);
        // Jensen step: the grouped bound is below the full deficit
        for dim in [2, 3] {
            let full = green_deficit(&rh, 1.0, dim).unwrap();
            let jensen = green_deficit_jensen(&rh, 1.0, dim).unwrap();
            assert!(jensen <= full + 1e-15);
        }
    }

    #[test]
    fn report_invariants() {
        let rh = rhomboid(1.0, 0.7).unwrap();
        for p in [0.5, 1.0, 2.0, 3.0] {
            let r = check_dp(&rh, 2, p).unwrap();
            assert_eq!(r.deficit, r.rhs - r.lhs);
            assert_eq!(r.holds, r.deficit >= -DEFICIT_TOL * r.rhs.abs());
            let r = check_dminus(&rh, 2, p).unwrap();
            assert_eq!(r.deficit, r.lhs - r.rhs);
        }
    }
}
