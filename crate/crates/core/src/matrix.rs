//! Dense positive matrices, diagonal scalings and permutations.
//!
//! Every value here is immutable once built: transforms return new matrices.

use std::fmt;

use crate::error::{Error, Result};

/// Dense matrix whose entries are all strictly positive.
///
/// Most of the crate works with square matrices; rectangular shapes exist
/// only for target-sum scaling.
#[derive(Clone, PartialEq)]
pub struct PositiveMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PositiveMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 || rows[0].is_empty() {
            return Err(Error::Empty);
        }
        let ncols = rows[0].len();
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Ragged { row: i + 1, expected: ncols, found: row.len() });
            }
            data.extend(row);
        }
        Self::from_vec(nrows, ncols, data)
    }

    /// Builds a matrix from row-major storage.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty);
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        // `!(v > 0)` also rejects NaN.
        if let Some(idx) = data.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::NonPositiveEntry {
                row: idx / cols + 1,
                col: idx % cols + 1,
                value: data[idx].to_string(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// The matrix with every entry equal to `value`.
    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::from_vec(rows, cols, vec![value; rows * cols])
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    /// Multiplies every entry by `lambda`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        Self::from_vec(self.rows, self.cols, self.data.iter().map(|v| v * lambda).collect())
    }

    /// Symmetric within a relative tolerance; reports the first offending entry.
    pub fn check_symmetric(&self, rel_tol: f64) -> Result<()> {
        let n = self.dim()?;
        for i in 0..n {
            for j in (i + 1)..n {
                let (u, v) = (self.get(i, j), self.get(j, i));
                if (u - v).abs() > rel_tol * u.abs().max(v.abs()) {
                    return Err(Error::NotSymmetric { row: i + 1, col: j + 1 });
                }
            }
        }
        Ok(())
    }

    /// Largest entrywise absolute difference; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for PositiveMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.cols)).finish()
    }
}

/// Positive diagonal matrix, stored as its diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagScaling(Vec<f64>);

impl DiagScaling {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(idx) = values.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::NonPositiveEntry { row: idx + 1, col: idx + 1, value: values[idx].to_string() });
        }
        Ok(Self(values))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A permutation of `0..n`, identified with the permutation matrix that has
/// a one at `(i, map[i])` in every row `i`.
///
/// With that convention `(P A)[i][j] = A[map[i]][j]` and
/// `(A Pᵀ)[i][j] = A[i][map[j]]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || seen[m] {
                return Err(Error::InvalidParameter(format!("{map:?} is not a permutation")));
            }
            seen[m] = true;
        }
        Ok(Self(map))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Reversal `i -> n-1-i`.
    pub fn reversal(n: usize) -> Self {
        Self((0..n).rev().collect())
    }

    /// Transposition of `a` and `b`.
    pub fn swap(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::InvalidParameter(format!("swap({a},{b}) out of range for n={n}")));
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Ok(Self(map))
    }

    /// All permutations of `0..n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Self(current.clone()));
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// The transpose, which is also the inverse.
    pub fn transpose(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &m) in self.0.iter().enumerate() {
            inv[m] = i;
        }
        Self(inv)
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self(self.0.iter().map(|&m| other.0[m]).collect())
    }
}

pub fn row_sums(a: &PositiveMatrix) -> Vec<f64> {
    (0..a.nrows()).map(|i| a.row(i).iter().sum()).collect()
}

pub fn col_sums(a: &PositiveMatrix) -> Vec<f64> {
    let mut sums = vec![0.0; a.ncols()];
    for i in 0..a.nrows() {
        for (s, v) in sums.iter_mut().zip(a.row(i)) {
            *s += v;
        }
    }
    sums
}

/// Largest deviation of any row sum from `r` and any column sum from `c`.
pub fn target_deviation(a: &PositiveMatrix, r: &[f64], c: &[f64]) -> f64 {
    let rows = row_sums(a).iter().zip(r).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max);
    col_sums(a).iter().zip(c).map(|(s, t)| (s - t).abs()).fold(rows, f64::max)
}

/// Largest deviation of any row or column sum from 1.
pub fn stochastic_deviation(a: &PositiveMatrix) -> f64 {
    target_deviation(a, &vec![1.0; a.nrows()], &vec![1.0; a.ncols()])
}

pub fn is_doubly_stochastic(a: &PositiveMatrix, tol: f64) -> bool {
    a.is_square() && stochastic_deviation(a) <= tol
}

/// `X A Y`, entry `(i, j)` being `x[i] · a[i][j] · y[j]`.
pub fn apply_scaling(x: &DiagScaling, a: &PositiveMatrix, y: &DiagScaling) -> Result<PositiveMatrix> {
    if x.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: x.len() });
    }
    if y.len() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), found: y.len() });
    }
    let mut data = Vec::with_capacity(a.nrows() * a.ncols());
    for (i, &xi) in x.values().iter().enumerate() {
        data.extend(a.row(i).iter().zip(y.values()).map(|(v, yj)| v * (xi * yj)));
    }
    PositiveMatrix::from_vec(a.nrows(), a.ncols(), data)
        .map_err(|_| Error::NumericFailure("scaled matrix left the positive range".into()))
}

/// `λ · P A Q` for a square matrix.
pub fn permute_dilate(a: &PositiveMatrix, p: &Permutation, q: &Permutation, lambda: f64) -> Result<PositiveMatrix> {
    let n = a.dim()?;
    if p.len() != n || q.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: if p.len() != n { p.len() } else { q.len() } });
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("dilation must be positive, got {lambda}")));
    }
    let qt = q.transpose();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            data.push(lambda * a.get(p.apply(i), qt.apply(j)));
        }
    }
    PositiveMatrix::from_vec(n, n, data)
}

/// `P A Pᵀ`.
pub fn conjugate(a: &PositiveMatrix, p: &Permutation) -> Result<PositiveMatrix> {
    permute_dilate(a, p, &p.transpose(), 1.0)
}
