//! The operator `A^{(N,m)}` on `ℓ²(Z∖{0})` that controls the chord sums of
//! a unit-speed loop through its Fourier coefficients.
//!
//! With `d_j = |j| c_j`, the `p = 2` chord sum of a loop of length `2π`
//! equals `4N (d, (A ⊗ I) d)`, where
//!
//! ```text
//! A_jk = |sin(πmj/N)/j| · |sin(πmk/N)/k|   if j ≡ k (mod N),   0 otherwise.
//! ```
//!
//! Restricted to one residue class `n` the operator is rank one with norm
//! `sin²(πmn/N)·S_n`, `S_n = Σ_{l} (n + lN)^{−2} = (π / (N sin(πn/N)))²`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{check_chord_index, FourierLoop};
use crate::linalg::lanczos_max;
use crate::{Error, Result};

/// Largest tolerated `|speed − 1|` for loops fed to [`chordsum_fourier`].
pub const UNIT_SPEED_TOL: f64 = 1e-6;

/// Default truncation for [`NormMode::Dense`].
pub const DEFAULT_CUTOFF: usize = 10_000;

fn weight(n: usize, m: usize, j: i64) -> f64 {
    ((PI * m as f64 * j as f64 / n as f64).sin() / j as f64).abs()
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidInput("N must be positive".into()))
    } else {
        Ok(())
    }
}

/// Matrix element `A^{(N,m)}_{jk}`.
pub fn entry(n: usize, m: usize, j: i64, k: i64) -> Result<f64> {
    check_n(n)?;
    if j == 0 || k == 0 {
        return Err(Error::InvalidInput("indices of A must be nonzero".into()));
    }
    if (j - k).rem_euclid(n as i64) != 0 {
        return Ok(0.0);
    }
    Ok(weight(n, m, j) * weight(n, m, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SumMode {
    Series,
    Closed,
}

/// `S_n = Σ_{l ∈ Z, n+lN ≠ 0} (n + lN)^{−2}` for `1 ≤ n ≤ N − 1`.
///
/// `Closed` is `(π / (N sin(πn/N)))²`. `Series` sums `|l| ≤ 10⁶/N`
/// directly and replaces each tail by its midpoint-corrected integral.
pub fn s_n(n_big: usize, n: usize, mode: SumMode) -> Result<f64> {
    if n == 0 || n >= n_big {
        return Err(Error::InvalidInput(format!(
            "S_n needs 1 ≤ n ≤ N−1, got n = {n}, N = {n_big}"
        )));
    }
    let (nf, bf) = (n as f64, n_big as f64);
    Ok(match mode {
        SumMode::Closed => (PI / (bf * (PI * nf / bf).sin())).powi(2),
        SumMode::Series => {
            let cutoff = (1_000_000 / n_big).max(1);
            // 1/(lN − n)² and 1/(lN − N + n)² for l ≥ 1 cover all indices n + lN.
            let mut sum = 0.0;
            for l in (1..=cutoff).rev() {
                let lf = l as f64;
                let a = lf * bf - nf;
                let b = lf * bf - bf + nf;
                sum += 1.0 / (a * a) + 1.0 / (b * b);
            }
            // Σ_{l>c} f(l) ≈ ∫_{c+1/2}^∞ f, error O(f''), here ~1e-24.
            let c = cutoff as f64 + 0.5;
            let tail = 1.0 / (bf * (c * bf - nf)) + 1.0 / (bf * (c * bf - bf + nf));
            sum + tail
        }
    })
}

/// `(π sin(πm/N) / (N sin(π/N)))²`, the largest admissible value of
/// `(d, A d)` for unit `d`.
pub fn bound_rhs(n: usize, m: usize) -> Result<f64> {
    check_chord_index(n, m)?;
    let nf = n as f64;
    Ok((PI * (PI * m as f64 / nf).sin() / (nf * (PI / nf).sin())).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// Exact: maximum over residue classes of the rank-one block norms.
    Block,
    /// Largest eigenvalue of the truncation to `1 ≤ |j| ≤ K`.
    Dense,
}

/// The section of `A^{(N,m)}` on `1 ≤ |j| ≤ cutoff`, applied matrix-free
/// from the product form of [`entry`] on the `j ≡ k (mod N)` pattern.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub n: usize,
    pub m: usize,
    pub cutoff: usize,
    indices: Vec<i64>,
    weights: Vec<f64>,
    /// For each index position, the positions in the same residue class.
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl TruncatedOperator {
    pub fn new(n: usize, m: usize, cutoff: usize) -> Result<Self> {
        check_n(n)?;
        if cutoff == 0 {
            return Err(Error::InvalidInput("cutoff must be positive".into()));
        }
        let k = cutoff as i64;
        let indices: Vec<i64> = (-k..=k).filter(|&j| j != 0).collect();
        let weights = indices.iter().map(|&j| weight(n, m, j)).collect();
        let mut classes = vec![Vec::new(); n];
        let mut class_of = Vec::with_capacity(indices.len());
        for (pos, &j) in indices.iter().enumerate() {
            let r = j.rem_euclid(n as i64) as usize;
            classes[r].push(pos);
            class_of.push(r);
        }
        Ok(Self {
            n,
            m,
            cutoff,
            indices,
            weights,
            classes,
            class_of,
        })
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    /// `y = A x` over every nonzero `(j, k)` entry.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(row, out)| {
            let wj = self.weights[row];
            *out = self.classes[self.class_of[row]]
                .iter()
                .map(|&col| wj * self.weights[col] * x[col])
                .sum();
        });
    }

    /// Largest eigenvalue by Lanczos.
    pub fn largest_eigenvalue(&self) -> f64 {
        lanczos_max(self.dim(), 4 * self.n + 20, 1e-15, |x, y| self.apply(x, y))
    }
}

/// Operator norm of `A^{(N,m)}`.
pub fn operator_norm(n: usize, m: usize, mode: NormMode, cutoff: usize) -> Result<f64> {
    check_n(n)?;
    match mode {
        NormMode::Block => {
            let mut best = 0.0f64;
            for r in 1..n {
                let s = (PI * m as f64 * r as f64 / n as f64).sin();
                best = best.max(s * s * s_n(n, r, SumMode::Closed)?);
            }
            Ok(best)
        }
        NormMode::Dense => {
            if cutoff < n {
                return Err(Error::InvalidInput(format!(
                    "cutoff {cutoff} must be at least N = {n}"
                )));
            }
            Ok(TruncatedOperator::new(n, m, cutoff)?.largest_eigenvalue())
        }
    }
}

/// A finitely supported sequence in `ℓ²(Z∖{0}) ⊗ C^dim`.
pub type DSequence = BTreeMap<i64, Vec<Complex64>>;

/// `d_j = |j| c_j` for the coefficients of a loop.
pub fn d_sequence(curve: &FourierLoop) -> DSequence {
    curve
        .signed_coeffs()
        .into_iter()
        .map(|(j, c)| {
            (
                j,
                c.into_iter().map(|z| z * j.unsigned_abs() as f64).collect(),
            )
        })
        .collect()
}

pub fn sequence_norm_sqr(d: &DSequence) -> f64 {
    d.values().flatten().map(|z| z.norm_sqr()).sum()
}

fn form_with_phase(d: &DSequence, n: usize, m: usize, offset: f64) -> Result<f64> {
    check_n(n)?;
    if d.contains_key(&0) {
        return Err(Error::InvalidInput(
            "sequence is supported at index 0".into(),
        ));
    }
    let mut by_class: BTreeMap<i64, Vec<(i64, &Vec<Complex64>)>> = BTreeMap::new();
    for (&j, v) in d {
        by_class
            .entry(j.rem_euclid(n as i64))
            .or_default()
            .push((j, v));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for members in by_class.values() {
        for &(j, dj) in members {
            let wj = weight(n, m, j);
            for &(k, dk) in members {
                let a = wj * weight(n, m, k);
                if a == 0.0 {
                    continue;
                }
                let inner: Complex64 = dj.iter().zip(dk).map(|(x, y)| x.conj() * y).sum();
                acc += inner * a * Complex64::cis((k - j) as f64 * offset);
            }
        }
    }
    Ok(acc.re)
}

/// `(d, (A^{(N,m)} ⊗ I) d)`, summed coordinatewise over `C^dim`.
pub fn quadratic_form(d: &DSequence, n: usize, m: usize) -> Result<f64> {
    form_with_phase(d, n, m, 0.0)
}

/// The `p = 2` chord sum of a unit-speed loop of length `2π`, computed on
/// the Fourier side: `4N Σ_{j ≡ k} c_j^*·c_k |sin(πmj/N)| |sin(πmk/N)|`.
pub fn chordsum_fourier(curve: &FourierLoop, n: usize, m: usize) -> Result<f64> {
    chordsum_fourier_at(curve, n, m, 0.0)
}

/// As [`chordsum_fourier`] with the marks placed at `2πk/N + offset`.
pub fn chordsum_fourier_at(curve: &FourierLoop, n: usize, m: usize, offset: f64) -> Result<f64> {
    check_chord_index(n, m)?;
    let deviation = curve.max_unit_speed_deviation();
    if deviation > UNIT_SPEED_TOL {
        return Err(Error::Parametrization { deviation });
    }
    Ok(4.0 * n as f64 * form_with_phase(&d_sequence(curve), n, m, offset)?)
}

/// The same chord sum evaluated pointwise: `Σ_k |Γ(s_k + 2πm/N) − Γ(s_k)|²`
/// with `s_k = 2πk/N + offset`.
pub fn chordsum_direct(curve: &FourierLoop, n: usize, m: usize, offset: f64) -> Result<f64> {
    check_chord_index(n, m)?;
    let step = 2.0 * PI / n as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let s = offset + step * k as f64;
        let a = curve.eval(s);
        let b = curve.eval(s + step * m as f64);
        sum += a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>();
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinIneq {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|sin jx| ≤ j sin x` for `j ≥ 1`, `x ∈ (0, π/2]`.
pub fn sin_ineq(j: u32, x: f64) -> Result<SinIneq> {
    if j == 0 {
        return Err(Error::InvalidInput("j must be at least 1".into()));
    }
    if !(x > 0.0 && x <= PI / 2.0) {
        return Err(Error::InvalidInput(format!("x = {x} outside (0, π/2]")));
    }
    let lhs = (j as f64 * x).sin().abs();
    let rhs = j as f64 * x.sin();
    Ok(SinIneq {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-15),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> FourierLoop {
        FourierLoop::new(
            2,
            vec![vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, -0.5)]],
        )
        .unwrap()
    }

    #[test]
    fn entries() {
        assert!((entry(2, 1, 1, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(entry(2, 1, 1, 2).unwrap(), 0.0);
        assert!(entry(4, 2, 2, 2).unwrap() < 1e-30);
        assert!(entry(4, 2, 0, 2).is_err());
        assert_eq!(entry(5, 2, 3, -2).unwrap(), entry(5, 2, -2, 3).unwrap());
    }

    #[test]
    fn s_n_values() {
        let quarter = PI * PI / 4.0;
        assert!((s_n(2, 1, SumMode::Closed).unwrap() - quarter).abs() < 1e-15);
        assert!((s_n(2, 1, SumMode::Series).unwrap() - quarter).abs() < 1e-11);
        let s31 = s_n(3, 1, SumMode::Series).unwrap();
        // Σ_l (n + lN)^{−2} summed to high precision
        assert!((s31 - 1.462_163_614_976_201).abs() < 1e-11, "{s31}");
        assert!((s31 - s_n(3, 1, SumMode::Closed).unwrap()).abs() < 1e-11);
        assert_eq!(
            s_n(7, 2, SumMode::Closed).unwrap(),
            s_n(7, 5, SumMode::Closed).unwrap()
        );
        assert!(s_n(4, 0, SumMode::Closed).is_err());
        assert!(s_n(4, 4, SumMode::Series).is_err());
    }

    #[test]
    fn bound_values() {
        assert!((bound_rhs(2, 1).unwrap() - PI * PI / 4.0).abs() < 1e-15);
        assert!((bound_rhs(6, 3).unwrap() - (PI / 3.0).powi(2)).abs() < 1e-14);
        for n in 2..20 {
            assert!((bound_rhs(n, 1).unwrap() - (PI / n as f64).powi(2)).abs() < 1e-15);
        }
        assert!(bound_rhs(6, 4).is_err());
    }

    #[test]
    fn block_norm_examples() {
        let v = operator_norm(2, 1, NormMode::Block, 0).unwrap();
        assert!((v - PI * PI / 4.0).abs() < 1e-15);
        let v = operator_norm(5, 2, NormMode::Block, 0).unwrap();
        let want = (PI * (2.0 * PI / 5.0).sin() / (5.0 * (PI / 5.0).sin())).powi(2);
        assert!((v - want).abs() < 1e-15);
        assert!((v - 1.033_558).abs() < 1e-6);
    }

    #[test]
    fn dense_truncation_approaches_block_from_below() {
        let block = operator_norm(4, 2, NormMode::Block, 0).unwrap();
        let mut previous = 0.0;
        for k in [8, 64, 512, 4096] {
            let v = operator_norm(4, 2, NormMode::Dense, k).unwrap();
            assert!(v >= previous - 1e-13 && v <= block + 1e-12, "K={k}: {v}");
            previous = v;
        }
        assert!(block - previous < 1e-3);
        assert!(operator_norm(4, 2, NormMode::Dense, 3).is_err());
    }

    #[test]
    fn unit_masses() {
        for (n, m) in [(5, 2), (7, 3), (4, 1)] {
            let mut d = DSequence::new();
            d.insert(1, vec![Complex64::new(1.0, 0.0)]);
            let v = quadratic_form(&d, n, m).unwrap();
            assert!((v - (PI * m as f64 / n as f64).sin().powi(2)).abs() < 1e-15);
            let mut d = DSequence::new();
            d.insert(n as i64, vec![Complex64::new(1.0, 0.0)]);
            assert!(quadratic_form(&d, n, m).unwrap().abs() < 1e-30);
        }
        let mut d = DSequence::new();
        d.insert(0, vec![Complex64::new(1.0, 0.0)]);
        assert!(quadratic_form(&d, 3, 1).is_err());
    }

    #[test]
    fn circle_chord_sums() {
        let c = circle();
        for n in 2..10 {
            for m in 1..=n / 2 {
                let f = chordsum_fourier(&c, n, m).unwrap();
                let want = 4.0 * n as f64 * (PI * m as f64 / n as f64).sin().powi(2);
                assert!((f - want).abs() < 1e-12, "N={n} m={m}: {f} vs {want}");
                let q = quadratic_form(&d_sequence(&c), n, m).unwrap();
                assert!((f - 4.0 * n as f64 * q).abs() < 1e-12);
            }
        }
        assert!((chordsum_fourier(&c, 4, 2).unwrap() - 16.0).abs() < 1e-13);
    }

    #[test]
    fn two_mode_loop_matches_pointwise_sum() {
        // a(cos s, sin s, 0, 0) + b(0, 0, cos 2s, sin 2s) with a² + 4b² = 1
        let b = 0.3f64;
        let a = (1.0 - 4.0 * b * b).sqrt();
        let z = Complex64::new(0.0, 0.0);
        let c = FourierLoop::new(
            4,
            vec![
                vec![
                    Complex64::new(a / 2.0, 0.0),
                    Complex64::new(0.0, -a / 2.0),
                    z,
                    z,
                ],
                vec![
                    z,
                    z,
                    Complex64::new(b / 2.0, 0.0),
                    Complex64::new(0.0, -b / 2.0),
                ],
            ],
        )
        .unwrap();
        assert!(c.max_unit_speed_deviation() < 1e-14);
        for n in 2..9 {
            for m in 1..=n / 2 {
                let f = chordsum_fourier(&c, n, m).unwrap();
                let g = chordsum_direct(&c, n, m, 0.0).unwrap();
                assert!((f - g).abs() < 1e-12, "N={n} m={m}: {f} vs {g}");
            }
        }
    }

    #[test]
    fn non_unit_speed_is_rejected() {
        let big = circle().scaled(1.5);
        assert!(matches!(
            chordsum_fourier(&big, 4, 1),
            Err(Error::Parametrization { .. })
        ));
    }

    #[test]
    fn sine_inequality() {
        let r = sin_ineq(1, 0.7).unwrap();
        assert_eq!(r.lhs, r.rhs);
        let r = sin_ineq(3, PI / 6.0).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15 && (r.rhs - 1.5).abs() < 1e-15 && r.holds);
        assert!(sin_ineq(0, 0.5).is_err());
        assert!(sin_ineq(2, 2.0).is_err());
    }
}
