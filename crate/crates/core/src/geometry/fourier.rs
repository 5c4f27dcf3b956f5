use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::arclength::ArcLengthMap;
use crate::{Error, Result};

/// Tolerance on `Σ n²|c_n|² = 1` for loops flagged unit-normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A closed curve `Γ(t) = Σ_{n≠0} c_n e^{int}`, `t ∈ [0, 2π)`, with
/// `c_n ∈ C^dim` and `c_{−n} = conj(c_n)`.
///
/// Only the coefficients with `n ≥ 1` are stored, so the curve is real by
/// construction and has no `c_0` term.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLoop {
    dim: usize,
    /// `modes[n - 1]` is `c_n`.
    modes: Vec<Vec<Complex64>>,
    unit_normalized: bool,
}

impl FourierLoop {
    pub fn new(dim: usize, modes: Vec<Vec<Complex64>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("dimension {dim} < 2")));
        }
        if modes.is_empty() {
            return Err(Error::InvalidInput("a loop needs at least one mode".into()));
        }
        for (i, c) in modes.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "c_{} has {} components, expected {dim}",
                    i + 1,
                    c.len()
                )));
            }
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("c_{} is not finite", i + 1)));
            }
        }
        Ok(Self {
            dim,
            modes,
            unit_normalized: false,
        })
    }

    /// Builds a loop from coefficients indexed by signed mode number.
    ///
    /// Either or both of `c_n`, `c_{−n}` may be given; when both are
    /// present they must be complex conjugates. Mode `0` is rejected.
    pub fn from_signed(dim: usize, coeffs: &[(i64, Vec<Complex64>)]) -> Result<Self> {
        if coeffs.iter().any(|(n, _)| *n == 0) {
            return Err(Error::Spec(
                "coeffs[n=0]: the constant mode is not allowed".into(),
            ));
        }
        let max_mode = coeffs
            .iter()
            .map(|(n, _)| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        if max_mode == 0 {
            return Err(Error::Spec("no nonzero modes".into()));
        }
        let mut modes: Vec<Option<Vec<Complex64>>> = vec![None; max_mode];
        for (n, c) in coeffs {
            if c.len() != dim {
                return Err(Error::Spec(format!(
                    "coeffs[n={n}]: {} components, expected {dim}",
                    c.len()
                )));
            }
            let positive: Vec<Complex64> = if *n > 0 {
                c.clone()
            } else {
                c.iter().map(|z| z.conj()).collect()
            };
            let slot = &mut modes[n.unsigned_abs() as usize - 1];
            match slot {
                Some(existing) => {
                    for (a, b) in existing.iter().zip(&positive) {
                        let scale = 1.0 + a.norm().max(b.norm());
                        if (a - b).norm() > 1e-12 * scale {
                            return Err(Error::Spec(format!(
                                "coeffs[n={n}]: reality condition c_-n = conj(c_n) violated"
                            )));
                        }
                    }
                }
                None => *slot = Some(positive),
            }
        }
        let modes = modes
            .into_iter()
            .map(|m| m.unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); dim]))
            .collect();
        Self::new(dim, modes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest mode number `M`.
    pub fn max_mode(&self) -> usize {
        self.modes.len()
    }

    pub fn is_unit_normalized(&self) -> bool {
        self.unit_normalized
    }

    /// `c_n` for any nonzero `n`; zero beyond the stored modes.
    pub fn coeff(&self, n: i64) -> Vec<Complex64> {
        let k = n.unsigned_abs() as usize;
        if n == 0 || k > self.modes.len() {
            return vec![Complex64::new(0.0, 0.0); self.dim];
        }
        let c = &self.modes[k - 1];
        if n > 0 {
            c.clone()
        } else {
            c.iter().map(|z| z.conj()).collect()
        }
    }

    /// All stored coefficients `(n, c_n)` for `1 ≤ |n| ≤ M`, negative modes first.
    pub fn signed_coeffs(&self) -> Vec<(i64, Vec<Complex64>)> {
        let m = self.max_mode() as i64;
        (-m..=m)
            .filter(|&n| n != 0)
            .map(|n| (n, self.coeff(n)))
            .collect()
    }

    /// `Σ_{n≠0} n²|c_n|²`, which equals `(1/2π)∫|Γ'|²`.
    pub fn derivative_energy(&self) -> f64 {
        2.0 * self
            .modes
            .iter()
            .enumerate()
            .map(|(i, c)| ((i + 1) as f64).powi(2) * c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
    }

    /// Rescales so that `Σ n²|c_n|² = 1` and flags the result.
    pub fn unit_normalized(&self) -> Result<Self> {
        let e = self.derivative_energy();
        if e <= 0.0 {
            return Err(Error::InvalidInput(
                "loop has no nonzero coefficient".into(),
            ));
        }
        let mut out = self.scaled(1.0 / e.sqrt());
        if (out.derivative_energy() - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NumericalAssumption(
                "normalization drifted beyond 1e-12".into(),
            ));
        }
        out.unit_normalized = true;
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            modes: self
                .modes
                .iter()
                .map(|c| c.iter().map(|z| z * factor).collect())
                .collect(),
            unit_normalized: false,
        }
    }

    /// The reparametrized loop `s ↦ Γ(s + s0)`, i.e. `c_n ↦ c_n e^{ins0}`.
    pub fn phase_shifted(&self, s0: f64) -> Self {
        Self {
            dim: self.dim,
            modes: self
                .modes
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let phase = Complex64::cis((i + 1) as f64 * s0);
                    c.iter().map(|z| z * phase).collect()
                })
                .collect(),
            unit_normalized: self.unit_normalized,
        }
    }

    fn for_each_mode<F: FnMut(usize, Complex64)>(&self, t: f64, mut f: F) {
        let step = Complex64::cis(t);
        let mut z = step;
        for k in 1..=self.modes.len() {
            if k % 64 == 1 {
                // reseed to keep the recurrence from drifting
                z = Complex64::cis(k as f64 * t);
            }
            f(k, z);
            z *= step;
        }
    }

    /// `Γ(t)`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        self.for_each_mode(t, |k, z| {
            for (o, c) in out.iter_mut().zip(&self.modes[k - 1]) {
                *o += 2.0 * (c * z).re;
            }
        });
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    /// `Γ'(t) = Σ i n c_n e^{int}`.
    pub fn velocity_into(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        self.for_each_mode(t, |k, z| {
            for (o, c) in out.iter_mut().zip(&self.modes[k - 1]) {
                // Re(i k c z) = -k Im(c z)
                *o -= 2.0 * k as f64 * (c * z).im;
            }
        });
    }

    pub fn speed(&self, t: f64) -> f64 {
        let mut v = vec![0.0; self.dim];
        self.velocity_into(t, &mut v);
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest `|speed − 1|` over a uniform grid fine enough to resolve the
    /// highest mode.
    pub fn max_unit_speed_deviation(&self) -> f64 {
        let samples = 16 * self.max_mode() + 64;
        (0..samples)
            .map(|k| (self.speed(TAU * k as f64 / samples as f64) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Re-expands the loop in arc length, rescaled to total length `2π`, so
    /// that the result is unit-speed on `[0, 2π)` up to truncation.
    ///
    /// `samples` equally spaced arc-length points feed an FFT; modes below
    /// `samples/2` are kept and trailing negligible modes are trimmed.
    pub fn unit_speed(&self, samples: usize) -> Result<Self> {
        if samples < 8 || !samples.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "sample count {samples} must be even and at least 8"
            )));
        }
        let map = ArcLengthMap::new(self, 1e-13)?;
        let total = map.total();
        let scale = TAU / total;
        let mut channels = vec![vec![Complex64::new(0.0, 0.0); samples]; self.dim];
        let mut p = vec![0.0; self.dim];
        for k in 0..samples {
            let t = map.param_at(total * k as f64 / samples as f64);
            self.eval_into(t, &mut p);
            for (ch, x) in channels.iter_mut().zip(&p) {
                ch[k] = Complex64::new(x * scale, 0.0);
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(samples);
        for ch in channels.iter_mut() {
            fft.process(ch);
        }
        let half = samples / 2 - 1;
        let inv = 1.0 / samples as f64;
        let mut modes: Vec<Vec<Complex64>> = (1..=half)
            .map(|n| channels.iter().map(|ch| ch[n] * inv).collect())
            .collect();
        let peak = modes
            .iter()
            .flat_map(|c| c.iter().map(|z| z.norm()))
            .fold(0.0, f64::max);
        while modes.len() > 1
            && modes
                .last()
                .is_some_and(|c| c.iter().all(|z| z.norm() < 1e-14 * peak))
        {
            modes.pop();
        }
        Self::new(self.dim, modes)
    }
}

/// A random loop with `|c_n| ∝ n^{−decay}` for `1 ≤ n ≤ M`, rescaled so its
/// total arc length is `length`. Deterministic in `seed`.
pub fn random_fourier_loop(
    seed: u64,
    max_mode: usize,
    decay: f64,
    dim: usize,
    length: f64,
) -> Result<FourierLoop> {
    if max_mode == 0 {
        return Err(Error::InvalidInput("M must be at least 1".into()));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "length {length} is not positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = (1..=max_mode)
        .map(|n| {
            let amp = (n as f64).powf(-decay);
            (0..dim)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re * amp, im * amp)
                })
                .collect()
        })
        .collect();
    let raw = FourierLoop::new(dim, modes)?;
    let total = ArcLengthMap::new(&raw, 1e-13)?.total();
    Ok(raw.scaled(length / total))
}

/// A random loop of length `2π` resampled to unit speed, with the speed
/// deviation verified below `1e-9`.
///
/// Draws whose speed dips below a quarter of its mean are redrawn from the
/// next seed in a fixed sequence, so the result is deterministic in `seed`.
pub fn random_unit_speed_loop(
    seed: u64,
    max_mode: usize,
    decay: f64,
    dim: usize,
) -> Result<FourierLoop> {
    const ATTEMPTS: u64 = 64;
    for r in 0..ATTEMPTS {
        let raw = random_fourier_loop(
            seed.wrapping_add(r.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            max_mode,
            decay,
            dim,
            TAU,
        )?;
        let speeds: Vec<f64> = (0..4096)
            .map(|i| raw.speed(TAU * i as f64 / 4096.0))
            .collect();
        let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
        if speeds.iter().copied().fold(f64::INFINITY, f64::min) < 0.25 * mean {
            continue;
        }
        let unit = raw.unit_speed(8192)?;
        if unit.max_unit_speed_deviation() <= 1e-9 {
            return Ok(unit);
        }
    }
    Err(Error::NumericalAssumption(format!(
        "no well-resolved unit-speed loop after {ATTEMPTS} draws from seed {seed}"
    )))
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
    fn circle_evaluates_to_unit_circle() {
        let c = circle();
        for k in 0..16 {
            let t = TAU * k as f64 / 16.0;
            let p = c.eval(t);
            assert!((p[0] - t.cos()).abs() < 1e-15);
            assert!((p[1] - t.sin()).abs() < 1e-15);
            assert!((c.speed(t) - 1.0).abs() < 1e-15);
        }
        assert!((c.derivative_energy() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reality_condition_is_enforced() {
        let c = vec![Complex64::new(0.5, 0.1), Complex64::new(0.0, -0.5)];
        let conj: Vec<_> = c.iter().map(|z| z.conj()).collect();
        assert!(FourierLoop::from_signed(2, &[(1, c.clone()), (-1, conj)]).is_ok());
        let err = FourierLoop::from_signed(2, &[(1, c.clone()), (-1, c.clone())]).unwrap_err();
        assert!(err.to_string().contains("reality"));
        assert!(FourierLoop::from_signed(2, &[(0, c)]).is_err());
    }

    #[test]
    fn negative_modes_alone_determine_positive_ones() {
        let c = vec![Complex64::new(0.5, 0.2), Complex64::new(0.1, -0.5)];
        let conj: Vec<_> = c.iter().map(|z| z.conj()).collect();
        let a = FourierLoop::from_signed(2, &[(-2, conj)]).unwrap();
        assert_eq!(a.coeff(2), c);
        assert_eq!(a.coeff(1), vec![Complex64::new(0.0, 0.0); 2]);
    }

    #[test]
    fn random_loops_are_deterministic() {
        let a = random_fourier_loop(11, 6, 3.0, 3, 5.0).unwrap();
        let b = random_fourier_loop(11, 6, 3.0, 3, 5.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_fourier_loop(12, 6, 3.0, 3, 5.0).unwrap());
    }

    #[test]
    fn single_mode_random_loop_is_an_ellipse() {
        let l = random_fourier_loop(3, 1, 3.0, 2, 1.0).unwrap();
        assert_eq!(l.max_mode(), 1);
    }

    #[test]
    fn unit_normalization_flags_and_scales() {
        let l = random_fourier_loop(5, 4, 3.0, 2, 3.0)
            .unwrap()
            .unit_normalized()
            .unwrap();
        assert!(l.is_unit_normalized());
        assert!((l.derivative_energy() - 1.0).abs() < NORMALIZATION_TOL);
    }

    #[test]
    fn phase_shift_reparametrizes() {
        let l = random_fourier_loop(2, 5, 3.0, 2, 4.0).unwrap();
        let s = l.phase_shifted(0.7);
        let (a, b) = (l.eval(1.9), s.eval(1.2));
        assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    }

    #[test]
    fn unit_speed_resampling_of_ellipse() {
        let e = FourierLoop::new(
            2,
            vec![vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, -0.3)]],
        )
        .unwrap();
        let u = e.unit_speed(512).unwrap();
        assert!(
            u.max_unit_speed_deviation() < 1e-10,
            "{}",
            u.max_unit_speed_deviation()
        );
    }

    #[test]
    fn random_unit_speed_loops() {
        for seed in [3, 7, 11] {
            let u = random_unit_speed_loop(seed, 5, 3.0, 3).unwrap();
            assert!(u.max_unit_speed_deviation() <= 1e-9);
            let total = ArcLengthMap::new(&u, 1e-12).unwrap().total();
            assert!((total - TAU).abs() < 1e-8, "{total}");
            assert_eq!(u, random_unit_speed_loop(seed, 5, 3.0, 3).unwrap());
        }
    }
}
