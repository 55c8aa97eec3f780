//! Small dense linear algebra: row-major matrices, Gram products and
//! Cholesky-based SPD solves for the normal equations.

use crate::error::{Error, Result};

/// Relative pivot tolerance for the positive-definiteness test.
pub const PIVOT_EPS: f64 = 1e-14;

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact(0) panics, so guard the empty-column case.
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        Ok(self.row_iter().map(|r| dot(r, x)).collect())
    }

    /// `Aᵀ y`
    pub fn tr_matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, &yi) in self.row_iter().zip(y) {
            for (o, &a) in out.iter_mut().zip(r) {
                *o += a * yi;
            }
        }
        Ok(out)
    }

    /// Returns `self + shift * I`; `self` must be square.
    pub fn add_diagonal(&self, shift: f64) -> DenseMatrix {
        let mut m = self.clone();
        let n = self.rows.min(self.cols);
        for i in 0..n {
            m.data[i * self.cols + i] += shift;
        }
        m
    }

    /// Copy of the matrix with column `j` appended again at the end.
    pub fn with_duplicated_column(&self, j: usize) -> DenseMatrix {
        let cols = self.cols + 1;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in self.row_iter() {
            data.extend_from_slice(r);
            data.push(r[j]);
        }
        DenseMatrix {
            rows: self.rows,
            cols,
            data,
        }
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `AᵀA`. Only the upper triangle is accumulated; the lower triangle is a
/// mirror so the result is exactly symmetric.
pub fn gram(a: &DenseMatrix) -> DenseMatrix {
    let m = a.cols();
    let mut g = DenseMatrix::zeros(m, m);
    for r in a.row_iter() {
        for i in 0..m {
            let ri = r[i];
            if ri == 0.0 {
                continue;
            }
            for j in i..m {
                g.data[i * m + j] += ri * r[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            g.data[i * m + j] = g.data[j * m + i];
        }
    }
    g
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    /// Factors a symmetric matrix, reading only its lower triangle.
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        check_len(m.rows(), m.cols())?;
        let n = m.rows();
        let tol = PIVOT_EPS * m.max_abs();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let lj = &l.data[j * n..j * n + j];
            let pivot = m.get(j, j) - dot(lj, lj);
            if !(pivot > tol) {
                return Err(Error::NotPositiveDefinite { column: j, pivot });
            }
            let d = pivot.sqrt();
            l.data[j * n + j] = d;
            for i in j + 1..n {
                let s = m.get(i, j) - dot(&l.data[i * n..i * n + j], &l.data[j * n..j * n + j]);
                l.data[i * n + j] = s / d;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor_matrix(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn into_factor(self) -> DenseMatrix {
        self.l
    }

    /// Solves `L Lᵀ x = b` by forward then back substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.l.rows();
        check_len(n, b.len())?;
        let l = &self.l;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s = b[i] - dot(&l.row(i)[..i], &y[..i]);
            y[i] = s / l.get(i, i);
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l.get(k, i) * x[k];
            }
            x[i] = s / l.get(i, i);
        }
        Ok(x)
    }
}

pub fn cholesky(m: &DenseMatrix) -> Result<DenseMatrix> {
    Cholesky::factor(m).map(Cholesky::into_factor)
}

pub fn solve_spd(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_len(m.cols(), b.len())?;
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }
    Cholesky::factor(m)?.solve(b)
}

pub fn is_positive_definite(m: &DenseMatrix) -> bool {
    Cholesky::factor(m).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{gauss_solve, naive_matmul, random_matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_bad_lengths() {
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0, f64::NAN, 0.0, 1.0]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram(&DenseMatrix::identity(2)), DenseMatrix::identity(2));
        assert_eq!(
            gram(&m(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]])),
            DenseMatrix::identity(2)
        );
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let expected = naive_matmul(&a.transpose(), &a);
        assert_eq!(expected, m(&[&[10.0, 14.0], &[14.0, 20.0]]));
        assert_eq!(gram(&a), expected);
    }

    #[test]
    fn gram_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 17, 6);
        let g = gram(&a);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(g.get(i, j).to_bits(), g.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn cholesky_examples() {
        assert_eq!(cholesky(&DenseMatrix::identity(3)).unwrap(), DenseMatrix::identity(3));
        let l = cholesky(&m(&[&[4.0, 2.0], &[2.0, 5.0]])).unwrap();
        assert_eq!(l, m(&[&[2.0, 0.0], &[1.0, 2.0]]));
        assert_eq!(naive_matmul(&l, &l.transpose()), m(&[&[4.0, 2.0], &[2.0, 5.0]]));
        assert!(matches!(
            cholesky(&m(&[&[1.0, 1.0], &[1.0, 1.0]])),
            Err(Error::NotPositiveDefinite { column: 1, .. })
        ));
    }

    #[test]
    fn cholesky_reconstructs_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let n = rng.random_range(1..=8);
            let rows = n + rng.random_range(0..20);
            let a = random_matrix(&mut rng, rows, n);
            let spd = gram(&a).add_diagonal(1e-6);
            let l = cholesky(&spd).unwrap();
            for i in 0..n {
                assert!(l.get(i, i) > 0.0);
                for j in i + 1..n {
                    assert_eq!(l.get(i, j), 0.0);
                }
            }
            let llt = naive_matmul(&l, &l.transpose());
            let mut diff = 0.0;
            for i in 0..n {
                for j in 0..n {
                    diff += (llt.get(i, j) - spd.get(i, j)).powi(2);
                }
            }
            assert!(diff.sqrt() <= 1e-10 * spd.frobenius_norm());
        }
    }

    #[test]
    fn solve_spd_examples() {
        assert_eq!(
            solve_spd(&DenseMatrix::identity(2), &[3.0, 7.0]).unwrap(),
            vec![3.0, 7.0]
        );
        let x = solve_spd(&m(&[&[4.0, 2.0], &[2.0, 5.0]]), &[8.0, 9.0]).unwrap();
        assert!((x[0] - 1.375).abs() < 1e-14 && (x[1] - 1.25).abs() < 1e-14);
        let d = DenseMatrix::identity(3).add_diagonal(1.0);
        let x = solve_spd(&d, &[2.0, 4.0, 6.0]).unwrap();
        for (a, b) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() <= 1e-14);
        }
        assert!(matches!(
            solve_spd(&d, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn solve_spd_matches_gaussian_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.random_range(1..=20);
            let a = random_matrix(&mut rng, n + 5, n);
            let spd = gram(&a).add_diagonal(1e-3);
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let x = solve_spd(&spd, &b).unwrap();
            let oracle = gauss_solve(&spd, &b);
            let scale = norm_inf(&oracle).max(1.0);
            for (u, v) in x.iter().zip(&oracle) {
                assert!((u - v).abs() <= 1e-8 * scale);
            }
            let r: Vec<f64> = spd.matvec(&x).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect();
            assert!(norm_inf(&r) <= 1e-9 * (1.0 + norm_inf(&b)));
        }
    }

    #[test]
    fn positive_definiteness_follows_column_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        assert!(is_positive_definite(&DenseMatrix::identity(4)));
        for _ in 0..40 {
            let cols = rng.random_range(1..=8);
            let rows = rng.random_range(cols + 1..=30);
            let a = random_matrix(&mut rng, rows, cols);
            let g = gram(&a);
            assert!(is_positive_definite(&g));
            for _ in 0..100 {
                let v: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
                let gv = g.matvec(&v).unwrap();
                assert!(dot(&v, &gv) > 0.0);
            }
            let dup = a.with_duplicated_column(rng.random_range(0..cols));
            assert!(!is_positive_definite(&gram(&dup)));
        }
    }
}
