//! Small dense linear algebra: a cyclic Jacobi eigensolver for symmetric
//! matrices, a Lanczos iteration for the top of the spectrum of large
//! matrix-free operators, and a Cholesky solve.

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub n: usize,
    pub values: Vec<f64>,
    /// Column-major: eigenvector `k` is `vectors[k*n..(k+1)*n]`.
    pub vectors: Vec<f64>,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }
}

/// Cyclic Jacobi rotations on a row-major symmetric `n × n` matrix.
///
/// Sweeps until the off-diagonal mass is at the roundoff level of the
/// matrix norm. Each eigenvector is sign-normalized so its first component
/// of magnitude above `1e-12` is positive.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> SymEigen {
    assert_eq!(matrix.len(), n * n, "matrix is not {n}×{n}");
    let mut a = matrix.to_vec();
    // v is row-major here; column k holds eigenvector k.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = f64::EPSILON * f64::EPSILON * norm * norm * 1e-2;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= threshold || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        let mut col: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
        }
        vectors.extend(col);
    }
    SymEigen { n, values, vectors }
}

/// Largest eigenvalue of a symmetric operator given only its action.
///
/// Lanczos with full reorthogonalization, started from the all-ones vector.
/// Ritz values never exceed the true spectral maximum, so the estimate
/// approaches it from below.
pub fn lanczos_max<F>(dim: usize, max_steps: usize, rel_tol: f64, mut apply: F) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    let start = 1.0 / (dim as f64).sqrt();
    let mut basis: Vec<Vec<f64>> = vec![vec![start; dim]];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut previous = f64::NEG_INFINITY;
    let mut estimate = 0.0;

    for step in 0..max_steps.min(dim) {
        apply(&basis[step], &mut w);
        let alpha = dot(&w, &basis[step]);
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                axpy(-c, q, &mut w);
            }
        }
        let beta = dot(&w, &w).sqrt();
        estimate = tridiagonal_max(&alphas, &betas);
        let scale = estimate.abs().max(f64::MIN_POSITIVE);
        if beta <= 1e-14 * scale.max(alpha.abs()) || (estimate - previous).abs() <= rel_tol * scale
        {
            break;
        }
        previous = estimate;
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    estimate
}

fn tridiagonal_max(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    let mut t = vec![0.0; k * k];
    for i in 0..k {
        t[i * k + i] = alphas[i];
        if i + 1 < k {
            t[i * k + i + 1] = betas[i];
            t[(i + 1) * k + i] = betas[i];
        }
    }
    *jacobi_eigen(&t, k)
        .values
        .last()
        .expect("non-empty tridiagonal")
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for symmetric positive definite row-major `A`.
/// Returns `None` if a pivot is not positive.
pub fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(e: &SymEigen) -> Vec<f64> {
        let n = e.n;
        let mut out = vec![0.0; n * n];
        for k in 0..n {
            let v = e.vector(k);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += e.values[k] * v[i] * v[j];
                }
            }
        }
        out
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b) = (0.7, -0.3);
        let e = jacobi_eigen(&[a, b, b, a], 2);
        assert!((e.values[0] - (a - b.abs())).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // b < 0: vector (1, 1)/√2
        assert!((e.vector(0)[0] - s).abs() < 1e-15);
        assert!((e.vector(0)[1] - s).abs() < 1e-15);
    }

    #[test]
    fn diagonal_matrix() {
        let e = jacobi_eigen(&[3.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 5.0], 3);
        assert_eq!(e.values, vec![-2.0, 3.0, 5.0]);
        assert_eq!(e.vector(0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let n = 9;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = ((i * 31 + j * 17) % 13) as f64 / 7.0 - 0.9;
                m[i * n + j] = x;
                m[j * n + i] = x;
            }
        }
        let e = jacobi_eigen(&m, n);
        let r = reconstruct(&e);
        for (x, y) in r.iter().zip(&m) {
            assert!((x - y).abs() < 1e-13);
        }
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn lanczos_matches_jacobi() {
        let n = 40;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = 1.0 / (1.0 + (i as f64 - j as f64).abs());
            }
        }
        let exact = *jacobi_eigen(&m, n).values.last().unwrap();
        let est = lanczos_max(n, n, 1e-15, |x, y| {
            for i in 0..n {
                y[i] = (0..n).map(|j| m[i * n + j] * x[j]).sum();
            }
        });
        assert!((est - exact).abs() < 1e-11 * exact, "{est} vs {exact}");
        assert!(est <= exact + 1e-12);
    }

    #[test]
    fn cholesky_small_system() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let x = cholesky_solve(&a, &[1.0, 2.0], 2).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-15);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-15);
        assert!(cholesky_solve(&[1.0, 2.0, 2.0, 1.0], &[1.0, 1.0], 2).is_none());
    }
}
