use nalgebra::DMatrix;

use super::PointConfiguration;
use crate::{Error, Result};

/// Root-mean-square bead distance after the best Euclidean alignment.
///
/// Minimizes over translations, orthogonal maps (reflections included), and
/// the `2N` cyclic and reversed relabelings. Zero exactly when the two
/// configurations are Euclidean-equivalent.
pub fn shape_distance(a: &PointConfiguration, b: &PointConfiguration) -> Result<f64> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "shapes differ in size: {}×R^{} vs {}×R^{}",
            a.len(),
            a.dim(),
            b.len(),
            b.dim()
        )));
    }
    let n = a.len();
    let d = a.dim();
    let ca = centered(a);
    let mut best = f64::INFINITY;
    for reverse in [false, true] {
        for shift in 0..n {
            let cb = centered(&b.relabeled(shift, reverse));
            // H = Σ a_i b_iᵀ; the optimal orthogonal map is U Vᵀ.
            let h = &ca.transpose() * &cb;
            let svd = h.svd(true, true);
            let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
                return Err(Error::NumericalAssumption("SVD did not converge".into()));
            };
            let r = u * vt;
            let aligned = &cb * r.transpose();
            let sq: f64 = (&ca - aligned).iter().map(|x| x * x).sum();
            best = best.min((sq / n as f64).sqrt());
        }
    }
    debug_assert!(d >= 2);
    Ok(best)
}

fn centered(c: &PointConfiguration) -> DMatrix<f64> {
    let (n, d) = (c.len(), c.dim());
    let mut m = DMatrix::from_row_slice(n, d, c.coords());
    for j in 0..d {
        let mean = m.column(j).mean();
        m.column_mut(j).add_scalar_mut(-mean);
    }
    m
}

/// Moves a configuration into the gauge used by the optimizers: `y_0` at
/// the origin and each `y_k`, `k < dim`, inside the span of the first `k`
/// coordinate axes (first component of `y_1` nonnegative).
pub fn to_gauge(c: &PointConfiguration) -> Result<PointConfiguration> {
    let d = c.dim();
    let origin = c.point(0).to_vec();
    let shifted: Vec<Vec<f64>> = c
        .points()
        .map(|p| p.iter().zip(&origin).map(|(x, o)| x - o).collect())
        .collect();
    // Gram–Schmidt frame from y_1, y_2, …, completed with coordinate axes.
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d);
    let candidates = shifted
        .iter()
        .skip(1)
        .cloned()
        .chain((0..d).map(|i| (0..d).map(|k| if k == i { 1.0 } else { 0.0 }).collect()));
    for mut v in candidates {
        if frame.len() == d {
            break;
        }
        for _ in 0..2 {
            for f in &frame {
                let proj: f64 = v.iter().zip(f).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(f).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 * c.length() {
            frame.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let coords = shifted
        .iter()
        .flat_map(|p| {
            frame
                .iter()
                .map(|f| f.iter().zip(p).map(|(x, y)| x * y).sum::<f64>())
                .collect::<Vec<_>>()
        })
        .collect();
    PointConfiguration::from_flat(d, c.length(), coords)
}
