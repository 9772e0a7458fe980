//! Dense matrices over [`Scalar`] with exact Gaussian elimination.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalarfield::{FieldSpec, LogVal, Scalar};
use crate::Q;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    /// Builds from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        if rows.iter().any(|v| v.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_columns(cols: &[Vec<Scalar>]) -> Matrix {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        let mut m = Matrix::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn diag(entries: &[Scalar]) -> Matrix {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for (i, x) in entries.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Scalar) {
        self.data[i * self.cols + j] = x;
    }

    pub fn entries(&self) -> impl Iterator<Item = &Scalar> {
        self.data.iter()
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Matrix {
        let mut m = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn neg(&self) -> Matrix {
        self.map(|x| -x)
    }

    pub fn derive(&self, j: usize) -> Matrix {
        self.map(|x| x.derive(j))
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        self.map(|x| x * s)
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch in matrix product");
        let mut m = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Scalar::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Scalar::zero();
                for (k, x) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if !a.is_zero() && !x.is_zero() {
                        acc = &acc + &(a * x);
                    }
                }
                acc
            })
            .collect()
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, o: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(self.rows + o.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..o.rows {
            for j in 0..o.cols {
                m.set(self.rows + i, self.cols + j, o.get(i, j).clone());
            }
        }
        m
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.rows, o.rows);
        let mut cols: Vec<Vec<Scalar>> = (0..self.cols).map(|j| self.column(j)).collect();
        cols.extend((0..o.cols).map(|j| o.column(j)));
        if cols.is_empty() {
            return Matrix::zeros(self.rows, 0);
        }
        Matrix::from_columns(&cols)
    }

    /// Minimum entry valuation (`+∞` for the zero matrix).
    pub fn min_val(&self, field: &FieldSpec) -> LogVal {
        self.data.iter().map(|x| field.val(x)).min().unwrap_or(LogVal::Infinite)
    }

    /// Row echelon reduction; returns pivot columns and the determinant sign
    /// bookkeeping product of pivots.
    fn echelon(&self) -> (Matrix, Vec<usize>, Scalar) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut det = Scalar::one();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(p) = (r..a.rows).find(|&i| !a.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..a.cols {
                    a.data.swap(p * a.cols + j, r * a.cols + j);
                }
                det = -det;
            }
            let piv = a.get(r, c).clone();
            det = &det * &piv;
            let inv = piv.inv();
            for i in (r + 1)..a.rows {
                let f = a.get(i, c);
                if f.is_zero() {
                    continue;
                }
                let f = f * &inv;
                for j in c..a.cols {
                    let v = a.get(i, j) - &(&f * a.get(r, j));
                    a.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots, det)
    }

    pub fn rank(&self) -> usize {
        let full = self.rows.min(self.cols);
        // A specialization never has larger rank, so full rank at a sample
        // point settles it without the symbolic elimination.
        for (x0, x1) in [(3, 5), (-7, 11), (13, -2)] {
            if self.rank_at(&Q::from_integer(x0.into()), &Q::from_integer(x1.into())) == Some(full) {
                return full;
            }
        }
        self.echelon().1.len()
    }

    /// Rank of the specialization at `(x0, x1)`, if no entry has a pole there.
    fn rank_at(&self, x0: &Q, x1: &Q) -> Option<usize> {
        let mut a: Vec<Vec<Q>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).eval(x0, x1)).collect::<Option<_>>())
            .collect::<Option<_>>()?;
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(pr) = (rank..self.rows).find(|&r| !a[r][c].is_zero()) else {
                continue;
            };
            a.swap(rank, pr);
            let inv = a[rank][c].recip();
            for r in rank + 1..self.rows {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = &a[r][c] * &inv;
                for k in c..self.cols {
                    let v = &a[rank][k] * &f;
                    a[r][k] -= v;
                }
            }
            rank += 1;
        }
        Some(rank)
    }

    pub fn det(&self) -> Scalar {
        assert!(self.is_square());
        let (_, piv, det) = self.echelon();
        if piv.len() < self.rows {
            Scalar::zero()
        } else {
            det
        }
    }

    /// Solves `self · X = b` for square invertible `self`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        assert!(self.is_square());
        assert_eq!(self.rows, b.rows);
        let n = self.rows;
        let aug = self.hcat(b);
        let (mut a, piv, _) = aug.echelon();
        if piv.len() < n || piv.iter().any(|&c| c >= n) {
            return Err(Error::DivisionByZero);
        }
        // Back substitution.
        let w = a.cols;
        for r in (0..n).rev() {
            let inv = a.get(r, r).inv();
            for j in r..w {
                let v = a.get(r, j) * &inv;
                a.set(r, j, v);
            }
            for i in 0..r {
                let f = a.get(i, r).clone();
                if f.is_zero() {
                    continue;
                }
                for j in r..w {
                    let v = a.get(i, j) - &(&f * a.get(r, j));
                    a.set(i, j, v);
                }
            }
        }
        let mut x = Matrix::zeros(n, b.cols);
        for i in 0..n {
            for j in 0..b.cols {
                x.set(i, j, a.get(i, n + j).clone());
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.rows))
    }

    /// Indices of a maximal set of linearly independent rows.
    pub fn independent_rows(&self) -> Vec<usize> {
        self.transpose().echelon_pivots_original()
    }

    fn echelon_pivots_original(&self) -> Vec<usize> {
        self.echelon().1
    }

    /// Submatrix made of the given rows.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let rows: Vec<Vec<Scalar>> = idx.iter().map(|&i| self.row(i)).collect();
        if rows.is_empty() {
            return Matrix::zeros(0, self.cols);
        }
        Matrix::from_rows(rows).expect("rows have equal length")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}
