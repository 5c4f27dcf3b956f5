use std::f64::consts::TAU;

use super::{FourierLoop, PointConfiguration};
use crate::quad::{gk15, integrate};
use crate::{Error, Result};

/// Cumulative arc length `s(t) = ∫_0^t |Γ'|` of a Fourier loop and its inverse.
///
/// `[0, 2π]` is cut into uniform panels whose lengths are integrated
/// adaptively; within a panel, `s(t)` is a single 15-point Kronrod rule and
/// `t(s)` is safeguarded Newton on that.
#[derive(Debug, Clone)]
pub struct ArcLengthMap {
    curve: FourierLoop,
    panel: f64,
    cumulative: Vec<f64>,
    tol: f64,
}

impl ArcLengthMap {
    pub fn new(curve: &FourierLoop, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance {tol} is not positive"
            )));
        }
        let panels = (8 * curve.max_mode()).max(64);
        let panel = TAU / panels as f64;

        // Immersion check on a grid finer than the panels.
        let probes = 4 * panels;
        let mut min_speed = f64::INFINITY;
        let mut mean_speed = 0.0;
        for k in 0..probes {
            let v = curve.speed(TAU * k as f64 / probes as f64);
            min_speed = min_speed.min(v);
            mean_speed += v / probes as f64;
        }
        if !(min_speed >= 1e-8 * mean_speed) || mean_speed == 0.0 {
            return Err(Error::DegenerateCurve {
                min_speed,
                mean_speed,
            });
        }

        let speed = |t: f64| curve.speed(t);
        let abs_tol = tol * mean_speed * panel;
        let mut cumulative = Vec::with_capacity(panels + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for k in 0..panels {
            let a = panel * k as f64;
            acc += integrate(&speed, a, a + panel, abs_tol);
            cumulative.push(acc);
        }
        Ok(Self {
            curve: curve.clone(),
            panel,
            cumulative,
            tol,
        })
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("at least one panel")
    }

    pub fn curve(&self) -> &FourierLoop {
        &self.curve
    }

    fn panel_count(&self) -> usize {
        self.cumulative.len() - 1
    }

    fn partial(&self, k: usize, t: f64) -> f64 {
        let a = self.panel * k as f64;
        if t <= a {
            return 0.0;
        }
        gk15(&|x: f64| self.curve.speed(x), a, t).0
    }

    /// Arc length from `t = 0` to `t ∈ [0, 2π]`.
    pub fn length_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, TAU);
        let k = ((t / self.panel) as usize).min(self.panel_count() - 1);
        self.cumulative[k] + self.partial(k, t)
    }

    /// Parameter `t` at arc length `s`; `s` is taken modulo the total length.
    pub fn param_at(&self, s: f64) -> f64 {
        let total = self.total();
        let s = s.rem_euclid(total);
        let k = match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => return self.panel * i as f64,
            Err(i) => i - 1,
        };
        let (mut lo, mut hi) = (self.panel * k as f64, self.panel * (k + 1) as f64);
        let target = s - self.cumulative[k];
        let width = self.cumulative[k + 1] - self.cumulative[k];
        let mut t = lo + self.panel * target / width;
        let goal = 1e-2 * self.tol * total;
        for _ in 0..60 {
            let f = self.partial(k, t) - target;
            if f.abs() <= goal.max(1e-15 * total) {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let newton = t - f / self.curve.speed(t);
            t = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 {
                break;
            }
        }
        t
    }
}

/// Beads at `Γ(kL/N)`, `k = 0..N−1`, in arc length, with `L` the loop's own length.
pub fn sample_equidistant(curve: &FourierLoop, n: usize, tol: f64) -> Result<PointConfiguration> {
    let map = ArcLengthMap::new(curve, tol)?;
    sample_with_map(&map, n)
}

/// As [`sample_equidistant`], reusing a prepared map.
pub fn sample_with_map(map: &ArcLengthMap, n: usize) -> Result<PointConfiguration> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    let total = map.total();
    let dim = map.curve().dim();
    let mut coords = vec![0.0; n * dim];
    for (k, p) in coords.chunks_exact_mut(dim).enumerate() {
        let t = map.param_at(total * k as f64 / n as f64);
        map.curve().eval_into(t, p);
    }
    PointConfiguration::from_flat(dim, total, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_fourier_loop;
    use num_complex::Complex64;

    fn ellipse(a: f64, b: f64) -> FourierLoop {
        FourierLoop::new(
            2,
            vec![vec![
                Complex64::new(a / 2.0, 0.0),
                Complex64::new(0.0, -b / 2.0),
            ]],
        )
        .unwrap()
    }

    /// Perimeter of an ellipse from the Gauss–Kummer series
    /// `π(a+b) Σ binom(1/2, n)² h^n`, `h = ((a−b)/(a+b))²`.
    fn ellipse_perimeter_oracle(a: f64, b: f64) -> f64 {
        let h = ((a - b) / (a + b)).powi(2);
        let mut binom = 1.0;
        let mut hn = 1.0;
        let mut sum = 0.0;
        for n in 0..200 {
            sum += binom * binom * hn;
            binom *= (0.5 - n as f64) / (n as f64 + 1.0);
            hn *= h;
        }
        std::f64::consts::PI * (a + b) * sum
    }

    #[test]
    fn circle_map_is_identity() {
        let m = ArcLengthMap::new(&ellipse(1.0, 1.0), 1e-10).unwrap();
        assert!((m.total() - TAU).abs() < 1e-12);
        for k in 0..20 {
            let s = 0.3 * k as f64;
            assert!((m.param_at(s) - s).abs() < 1e-12);
            assert!((m.length_at(s) - s).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_perimeter_matches_series() {
        let m = ArcLengthMap::new(&ellipse(1.0, 0.5), 1e-10).unwrap();
        let oracle = ellipse_perimeter_oracle(1.0, 0.5);
        assert!((oracle - 4.844_224_110_273_838).abs() < 1e-12);
        assert!((m.total() - oracle).abs() < 1e-9 * oracle);
    }

    #[test]
    fn scaling_doubles_length() {
        let l = random_fourier_loop(4, 5, 3.0, 3, 2.0).unwrap();
        let a = ArcLengthMap::new(&l, 1e-10).unwrap().total();
        let b = ArcLengthMap::new(&l.scaled(2.0), 1e-10).unwrap().total();
        assert!((b - 2.0 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn inverse_round_trip() {
        let l = random_fourier_loop(9, 8, 3.0, 2, 7.0).unwrap();
        let m = ArcLengthMap::new(&l, 1e-10).unwrap();
        for k in 0..50 {
            let t = TAU * k as f64 / 50.0 + 0.01;
            let back = m.param_at(m.length_at(t));
            assert!((back - t).abs() < 1e-9, "{t} -> {back}");
        }
    }

    #[test]
    fn degenerate_curve_is_rejected() {
        // x = cos t, y = 0: speed vanishes at t = 0, π.
        let flat = FourierLoop::new(
            2,
            vec![vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)]],
        )
        .unwrap();
        assert!(matches!(
            ArcLengthMap::new(&flat, 1e-10),
            Err(Error::DegenerateCurve { .. })
        ));
    }

    #[test]
    fn circle_samples() {
        let c = ellipse(1.0, 1.0);
        let four = sample_equidistant(&c, 4, 1e-10).unwrap();
        assert!((four.length() - TAU).abs() < 1e-12);
        for j in 0..4 {
            assert!((four.distance(j, j + 1) - 2f64.sqrt()).abs() < 1e-12);
        }
        let six = sample_equidistant(&c, 6, 1e-10).unwrap();
        for j in 0..6 {
            assert!((six.distance(j, j + 1) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_loop_samples_are_admissible() {
        let l = random_fourier_loop(7, 8, 3.0, 2, TAU).unwrap();
        let m = ArcLengthMap::new(&l, 1e-10).unwrap();
        assert!((m.total() - TAU).abs() < 1e-9);
        let cfg = sample_with_map(&m, 5).unwrap();
        assert!(cfg.is_admissible());
    }
}
