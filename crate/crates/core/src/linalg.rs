//! Dense row-major matrices and Householder least squares.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Householder QR of an m×n matrix with m ≥ n, stored compactly:
/// reflector vectors below and on the diagonal, R strictly above it,
/// diag(R) separately.
struct Qr {
    qr: Matrix,
    rdiag: Vec<f64>,
}

impl Qr {
    fn factor(mut qr: Matrix) -> Qr {
        let (m, n) = (qr.rows, qr.cols);
        debug_assert!(m >= n);
        let mut rdiag = vec![0.0; n];
        for k in 0..n {
            let mut nrm = 0.0f64;
            for i in k..m {
                nrm = nrm.hypot(qr[(i, k)]);
            }
            if nrm != 0.0 {
                if qr[(k, k)] < 0.0 {
                    nrm = -nrm;
                }
                for i in k..m {
                    qr[(i, k)] /= nrm;
                }
                qr[(k, k)] += 1.0;
                for j in k + 1..n {
                    let mut s = 0.0;
                    for i in k..m {
                        s += qr[(i, k)] * qr[(i, j)];
                    }
                    s = -s / qr[(k, k)];
                    for i in k..m {
                        let v = qr[(i, k)];
                        qr[(i, j)] += s * v;
                    }
                }
            }
            rdiag[k] = -nrm;
        }
        Qr { qr, rdiag }
    }

    /// Rank relative to the largest diagonal of R.
    fn rank(&self) -> usize {
        let (m, n) = (self.qr.rows, self.qr.cols);
        let largest = self.rdiag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        if largest == 0.0 {
            return 0;
        }
        let tol = m.max(n) as f64 * f64::EPSILON * largest;
        self.rdiag.iter().filter(|d| d.abs() > tol).count()
    }

    #[allow(clippy::needless_range_loop)]
    fn reflect(&self, k: usize, v: &mut [f64]) {
        if self.rdiag[k] == 0.0 {
            return;
        }
        let m = self.qr.rows;
        let mut s = 0.0;
        for i in k..m {
            s += self.qr[(i, k)] * v[i];
        }
        s = -s / self.qr[(k, k)];
        for i in k..m {
            v[i] += s * self.qr[(i, k)];
        }
    }

    fn apply_qt(&self, v: &mut [f64]) {
        for k in 0..self.qr.cols {
            self.reflect(k, v);
        }
    }

    fn apply_q(&self, v: &mut [f64]) {
        for k in (0..self.qr.cols).rev() {
            self.reflect(k, v);
        }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.rdiag[i]
        } else {
            self.qr[(i, j)]
        }
    }

    /// Solves R x = y[..n].
    fn solve_r(&self, y: &[f64]) -> Vec<f64> {
        let n = self.qr.cols;
        let mut x = y[..n].to_vec();
        for k in (0..n).rev() {
            for j in k + 1..n {
                x[k] -= self.r(k, j) * x[j];
            }
            x[k] /= self.rdiag[k];
        }
        x
    }

    /// Solves Rᵀ z = b.
    fn solve_rt(&self, b: &[f64]) -> Vec<f64> {
        let n = self.qr.cols;
        let mut z = b.to_vec();
        for k in 0..n {
            for j in 0..k {
                z[k] -= self.r(j, k) * z[j];
            }
            z[k] /= self.rdiag[k];
        }
        z
    }
}

/// Least squares `min ‖A x − b‖` by Householder QR.
///
/// Tall or square systems need full column rank. Wide systems (fewer rows
/// than columns) need full row rank and return the minimum-norm exact
/// solution, computed from the QR factorization of Aᵀ.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows {
        return Err(Error::LengthMismatch { left: b.len(), right: a.rows });
    }
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::Empty("least-squares system"));
    }
    if a.data.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("least-squares system contains non-finite values"));
    }
    if a.rows >= a.cols {
        let qr = Qr::factor(a.clone());
        let rank = qr.rank();
        if rank < a.cols {
            return Err(Error::RankDeficient { rank, needed: a.cols });
        }
        let mut y = b.to_vec();
        qr.apply_qt(&mut y);
        Ok(qr.solve_r(&y))
    } else {
        let qr = Qr::factor(a.transpose());
        let rank = qr.rank();
        if rank < a.rows {
            return Err(Error::RankDeficient { rank, needed: a.rows });
        }
        let mut x = qr.solve_rt(b);
        x.resize(a.cols, 0.0);
        qr.apply_q(&mut x);
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::from_row_major(rows, cols, data).unwrap()
    }

    #[test]
    fn identity_system() {
        let b = [1.0, -2.0, 3.5];
        let x = lstsq(&Matrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn tall_residual_is_orthogonal_to_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(12, 4, &mut rng);
        let b: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = lstsq(&a, &b).unwrap();
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        let atr = a.transpose().mul_vec(&r);
        assert!(atr.iter().all(|v| v.abs() < 1e-12), "{atr:?}");
    }

    #[test]
    fn wide_system_is_solved_exactly_with_min_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random(3, 6, &mut rng);
        let b = [0.3, -1.2, 2.0];
        let x = lstsq(&a, &b).unwrap();
        for (p, q) in a.mul_vec(&x).iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
        // minimum norm ⇔ x lies in the row space: x = Aᵀ y for some y
        let y = lstsq(&a.transpose(), &x).unwrap();
        let back = a.transpose().mul_vec(&y);
        for (p, q) in back.iter().zip(&x) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        let a = Matrix::from_row_major(3, 2, vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0]).unwrap();
        assert!(matches!(
            lstsq(&a, &[1.0, 2.0, 3.0]),
            Err(Error::RankDeficient { rank: 1, needed: 2 })
        ));
    }
}
