//! Exact rational matrices (rank, inverse, Moore-Penrose pseudoinverse) and
//! the floating-point symmetric pseudoinverse.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::Rational;

/// Default threshold below which an eigenvalue counts as zero.
pub const DEFAULT_ZERO_EIGEN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Rational::one() } else { Rational::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        RatMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let n = rows.len();
        Ok(RatMatrix { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn transpose(&self) -> RatMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(Rational::zero(), |acc, k| acc + self.get(i, k) * rhs.get(k, j))
        })
    }

    pub fn sub(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - rhs.get(i, j))
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Rational::zero(), |acc, k| acc + self.get(i, k) * &v[k]))
            .collect()
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, pr);
            let inv = Rational::one() / m.get(row, col).clone();
            for c in col..m.cols {
                let v = m.get(row, c) * &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = m.get(r, c) - &factor * m.get(row, c);
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(self.rows, self.cols, self.data.clone())
    }

    pub fn inverse(&self) -> Result<RatMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::InvalidInput("singular matrix".into()));
        }
        Ok(Self::from_fn(n, n, |i, j| r.get(i, n + j).clone()))
    }

    /// Exact Moore-Penrose pseudoinverse through the full-rank factorization
    /// `A = C F`: `A+ = F^T (F F^T)^-1 (C^T C)^-1 C^T`.
    pub fn pseudoinverse(&self) -> RatMatrix {
        let (r, pivots) = self.rref();
        if pivots.is_empty() {
            return Self::zeros(self.cols, self.rows);
        }
        let rank = pivots.len();
        let c = Self::from_fn(self.rows, rank, |i, j| self.get(i, pivots[j]).clone());
        let f = Self::from_fn(rank, self.cols, |i, j| r.get(i, j).clone());
        let ct = c.transpose();
        let ft = f.transpose();
        let ctc_inv = ct.mul(&c).inverse().expect("C has full column rank");
        let fft_inv = f.mul(&ft).inverse().expect("F has full row rank");
        ft.mul(&fft_inv).mul(&ctc_inv).mul(&ct)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| crate::poly::rational_to_f64(self.get(i, j)))
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Rank of a row-major rational matrix by fraction-producing elimination.
pub fn rank_of_rows(rows: usize, cols: usize, mut data: Vec<Rational>) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pr) = (rank..rows).find(|&r| !data[r * cols + col].is_zero()) else {
            continue;
        };
        if pr != rank {
            for c in 0..cols {
                data.swap(pr * cols + c, rank * cols + c);
            }
        }
        let pivot = data[rank * cols + col].clone();
        for r in rank + 1..rows {
            if data[r * cols + col].is_zero() {
                continue;
            }
            let factor = &data[r * cols + col] / &pivot;
            for c in col..cols {
                let v = &data[r * cols + c] - &factor * &data[rank * cols + c];
                data[r * cols + c] = v;
            }
        }
        rank += 1;
    }
    rank
}

/// Largest `|m_ij - m_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Moore-Penrose pseudoinverse of a symmetric matrix from its
/// eigendecomposition; eigenvalues with `|lambda| < tol` are treated as zero.
pub fn sym_pinv(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let asym = asymmetry(m);
    if asym > tol {
        return Err(Error::AsymmetricMatrix { asymmetry: asym, tol });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() < tol {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += (v * v.transpose()) / lambda;
    }
    Ok(out)
}

/// Number of eigenvalues with `|lambda| >= tol` of a symmetric matrix.
pub fn sym_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().filter(|l| l.abs() >= tol).count()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
