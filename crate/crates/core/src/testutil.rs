//! Independent oracles for unit tests. Nothing here shares code with the
//! solvers it checks.

use crate::linalg::DenseMatrix;
use rand::Rng;

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

pub fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    let mut out = Vec::with_capacity(a.rows() * b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut s = 0.0;
            for k in 0..a.cols() {
                s += a.get(i, k) * b.get(k, j);
            }
            out.push(s);
        }
    }
    DenseMatrix::new(a.rows(), b.cols(), out).unwrap()
}

/// Gaussian elimination with partial pivoting on a copy of `[m | b]`.
pub fn gauss_solve(m: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = m.rows();
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.push(b[i]);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| aug[x][c].abs().total_cmp(&aug[y][c].abs()))
            .unwrap();
        aug.swap(c, p);
        for r in c + 1..n {
            let f = aug[r][c] / aug[c][c];
            for k in c..=n {
                aug[r][k] -= f * aug[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = aug[i][n];
        for k in i + 1..n {
            s -= aug[i][k] * x[k];
        }
        x[i] = s / aug[i][i];
    }
    x
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
pub fn power_iteration(m: &DenseMatrix, iters: usize) -> f64 {
    let n = m.rows();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = naive_matmul(m, &DenseMatrix::new(n, 1, v.clone()).unwrap());
        let w = w.as_slice();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        lambda = v.iter().zip(w).map(|(a, b)| a * b).sum();
        v = w.iter().map(|x| x / norm).collect();
    }
    lambda
}
