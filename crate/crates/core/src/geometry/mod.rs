//! Loops, bead configurations, and the test families built from them.

mod arclength;
mod config;
mod fourier;
mod shape;

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub use arclength::{sample_equidistant, sample_with_map, ArcLengthMap};
pub use config::{distance, PointConfiguration, ADMISSIBILITY_TOL};
pub use fourier::{random_fourier_loop, random_unit_speed_loop, FourierLoop, NORMALIZATION_TOL};
pub use shape::{shape_distance, to_gauge};

use crate::{Error, Result};

/// Fails unless `1 ≤ m ≤ ⌊N/2⌋`.
pub fn check_chord_index(n: usize, m: usize) -> Result<()> {
    let max = n / 2;
    if m == 0 || m > max {
        return Err(Error::ChordIndex { m, n, max });
    }
    Ok(())
}

/// Circumradius of the regular `N`-gon with perimeter `L`.
pub fn polygon_radius(n: usize, length: f64) -> f64 {
    length / n as f64 / (2.0 * (PI / n as f64).sin())
}

/// `|ỹ_j − ỹ_{j+m}| = (L/N) sin(πm/N) / sin(π/N)` for the regular polygon.
pub fn polygon_chord(n: usize, length: f64, m: usize) -> f64 {
    let nf = n as f64;
    length / nf * (PI * m as f64 / nf).sin() / (PI / nf).sin()
}

/// The regular `N`-gon of perimeter `L`, centred at the origin in the plane
/// of the first two coordinates.
pub fn regular_polygon(n: usize, length: f64, dim: usize) -> Result<PointConfiguration> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "a polygon needs N ≥ 2, got {n}"
        )));
    }
    if dim < 2 {
        return Err(Error::InvalidInput(format!("dimension {dim} < 2")));
    }
    let r = polygon_radius(n, length);
    let mut coords = vec![0.0; n * dim];
    for (k, p) in coords.chunks_exact_mut(dim).enumerate() {
        let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
        p[0] = r * c;
        p[1] = r * s;
    }
    PointConfiguration::from_flat(dim, length, coords)
}

/// Equilateral quadrilateral with side `side` and interior angle `theta` at
/// the first vertex; `L = 4·side`.
pub fn rhomboid(theta: f64, side: f64) -> Result<PointConfiguration> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::InvalidInput(format!("angle {theta} outside (0, π)")));
    }
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::InvalidInput(format!("side {side} is not positive")));
    }
    let (s, c) = theta.sin_cos();
    PointConfiguration::new(
        2,
        4.0 * side,
        &[
            vec![0.0, 0.0],
            vec![side, 0.0],
            vec![side * (1.0 + c), side * s],
            vec![side * c, side * s],
        ],
    )
}

/// `Σ_{n=1}^N |y_{n+m} − y_n|^p`.
///
/// For `p < 0` a chord shorter than `1e-12·L` is an error rather than a
/// huge number.
pub fn chord_sum(cfg: &PointConfiguration, m: usize, p: f64) -> Result<f64> {
    check_chord_index(cfg.len(), m)?;
    if p == 0.0 || !p.is_finite() {
        return Err(Error::InvalidInput(format!(
            "exponent {p} must be finite and nonzero"
        )));
    }
    let n = cfg.len();
    let mut sum = 0.0;
    for j in 0..n {
        let d = cfg.distance(j, j + m);
        if p < 0.0 && d < 1e-12 * cfg.length() {
            return Err(Error::SingularChord {
                i: j,
                j: (j + m) % n,
                distance: d,
            });
        }
        sum += d.powf(p);
    }
    Ok(sum)
}

/// A random admissible configuration: Gaussian beads rescaled so the
/// longest consecutive step is `fill·L/N`.
pub fn random_admissible<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    length: f64,
    dim: usize,
    fill: f64,
) -> Result<PointConfiguration> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("N = {n} < 2")));
    }
    if !(fill > 0.0 && fill <= 1.0) {
        return Err(Error::InvalidInput(format!("fill {fill} outside (0, 1]")));
    }
    let coords: Vec<f64> = (0..n * dim).map(|_| StandardNormal.sample(rng)).collect();
    let raw = PointConfiguration::from_flat(dim, length, coords)?;
    let step = raw.max_step();
    if step == 0.0 {
        return Err(Error::InvalidInput("all beads coincide".into()));
    }
    let factor = fill * raw.spacing() / step;
    PointConfiguration::from_flat(
        dim,
        length,
        raw.coords().iter().map(|x| x * factor).collect(),
    )
}

/// A random orthogonal matrix (row-major, possibly a reflection) and a
/// Gaussian shift: Gram–Schmidt on a Gaussian matrix.
pub fn random_rigid_motion<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for r in &rows {
            let p: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(r).for_each(|(a, b)| *a -= p * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            rows.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let shift = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    (rows.concat(), shift)
}
