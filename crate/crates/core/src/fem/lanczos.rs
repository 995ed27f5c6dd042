//! Extremal eigenvalues of symmetric operators by Lanczos with full
//! reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};

/// Largest eigenvalue of the symmetric operator `op` of dimension `n`,
/// using at most `steps` Lanczos iterations from a deterministic start vector.
pub fn largest_eigenvalue(n: usize, steps: usize, mut op: impl FnMut(&[f64]) -> Vec<f64>) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let m = steps.min(n).max(1);
    // Deterministic start vector with no special alignment to mesh modes.
    let mut q: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i as f64 * 0.618_033_988_75).fract() - 0.5))
        .collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    for _ in 0..m {
        let mut w = op(&q);
        let a = dot(&w, &q);
        alpha.push(a);
        basis.push(q.clone());
        // Full reorthogonalization, applied twice for stability.
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        if b <= 1e-14 * a.abs().max(1e-300) || basis.len() == m {
            break;
        }
        beta.push(b);
        q = w.into_iter().map(|x| x / b).collect();
    }
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    SymmetricEigen::new(t)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += c * xi);
}
