use serde::Serialize;

use crate::{Error, Result};

/// `N` beads in `R^dim` carrying a loop-length budget `L`.
///
/// Indices are cyclic: `point(j)` is `point(j mod N)`. The configuration is
/// admissible when every consecutive distance is at most `L/N`, which is
/// exactly when the beads can be equal-arc marks on some loop of length `L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointConfiguration {
    dim: usize,
    length: f64,
    coords: Vec<f64>,
}

/// Default admissibility slack, relative to the spacing `L/N`.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

impl PointConfiguration {
    pub fn new(dim: usize, length: f64, points: &[Vec<f64>]) -> Result<Self> {
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInput(format!(
                "every point must have {dim} coordinates"
            )));
        }
        Self::from_flat(dim, length, points.concat())
    }

    pub fn from_flat(dim: usize, length: f64, coords: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("dimension {dim} < 2")));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not form points in R^{dim}",
                coords.len()
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "length {length} is not positive"
            )));
        }
        if let Some(bad) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate {bad}")));
        }
        Ok(Self {
            dim,
            length,
            coords,
        })
    }

    /// Number of beads `N`.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Length budget `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.len() as f64
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, j: usize) -> &[f64] {
        let j = j % self.len();
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.point(i), self.point(j))
    }

    /// Largest consecutive distance `max_j |y_{j+1} − y_j|`.
    pub fn max_step(&self) -> f64 {
        (0..self.len())
            .map(|j| self.distance(j, j + 1))
            .fold(0.0, f64::max)
    }

    pub fn is_admissible(&self) -> bool {
        self.is_admissible_with(ADMISSIBILITY_TOL)
    }

    pub fn is_admissible_with(&self, rel_tol: f64) -> bool {
        self.max_step() <= self.spacing() * (1.0 + rel_tol)
    }

    /// Smallest distance over all distinct pairs, with the pair attaining it.
    pub fn min_pair_distance(&self) -> (usize, usize, f64) {
        let n = self.len();
        let mut best = (0, 0, f64::INFINITY);
        for i in 0..n {
            for j in i + 1..n {
                let d = self.distance(i, j);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        best
    }

    /// Fails with [`Error::SingularChord`] when two beads are closer than `1e-12·L`.
    pub fn require_distinct(&self) -> Result<()> {
        let (i, j, d) = self.min_pair_distance();
        if d < 1e-12 * self.length {
            return Err(Error::SingularChord { i, j, distance: d });
        }
        Ok(())
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::from_flat(self.dim, length, self.coords.clone())
    }

    /// Zero-pads the coordinates into a higher dimension.
    pub fn embedded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(Error::InvalidInput(format!(
                "cannot embed R^{} into R^{dim}",
                self.dim
            )));
        }
        let mut coords = Vec::with_capacity(self.len() * dim);
        for p in self.points() {
            coords.extend_from_slice(p);
            coords.extend(std::iter::repeat_n(0.0, dim - self.dim));
        }
        Self::from_flat(dim, self.length, coords)
    }

    /// Applies `y ↦ Q y + shift` with `Q` row-major `dim × dim`.
    pub fn transformed(&self, q: &[f64], shift: &[f64]) -> Result<Self> {
        let d = self.dim;
        if q.len() != d * d || shift.len() != d {
            return Err(Error::InvalidInput("transform has the wrong shape".into()));
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.points() {
            for r in 0..d {
                coords.push(shift[r] + (0..d).map(|c| q[r * d + c] * p[c]).sum::<f64>());
            }
        }
        Self::from_flat(d, self.length, coords)
    }

    /// Relabels beads `j ↦ j + shift`, optionally reversing orientation.
    pub fn relabeled(&self, shift: usize, reverse: bool) -> Self {
        let n = self.len();
        let mut coords = Vec::with_capacity(self.coords.len());
        for j in 0..n {
            let src = if reverse {
                (n + shift - j % n) % n
            } else {
                (j + shift) % n
            };
            coords.extend_from_slice(self.point(src));
        }
        Self {
            dim: self.dim,
            length: self.length,
            coords,
        }
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
