//! Minimal compressed-sparse-row matrices.
//!
//! Integer instances hold the incidence matrices, so topological
//! identities are checked without floating-point contamination; `f64`
//! instances hold mass matrices and the assembled saddle-point system.

use std::fmt::{Display, Write as _};
use std::io::{self, Write};
use std::ops::{Add, Mul, Neg};

/// Element type usable in a [`Csr`].
pub trait Scalar:
    Copy + Default + PartialEq + Add<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + Display
{
    fn to_f64(self) -> f64;
    const MM_FIELD: &'static str;
}

impl Scalar for f64 {
    fn to_f64(self) -> f64 {
        self
    }
    const MM_FIELD: &'static str = "real";
}

impl Scalar for i64 {
    fn to_f64(self) -> f64 {
        self as f64
    }
    const MM_FIELD: &'static str = "integer";
}

impl Scalar for i8 {
    fn to_f64(self) -> f64 {
        self as f64
    }
    const MM_FIELD: &'static str = "integer";
}

#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed,
    /// exact zeros dropped, columns sorted within each row.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, T)>) -> Self {
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut vals: Vec<T> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows_of = Vec::with_capacity(trip.len());
        for (r, c, v) in trip {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                let top = vals.last_mut().unwrap();
                *top = *top + v;
            } else {
                col_idx.push(c);
                vals.push(v);
                rows_of.push(r);
                last = Some((r, c));
            }
        }
        let zero = T::default();
        let mut k = 0;
        let mut out_cols = Vec::with_capacity(col_idx.len());
        let mut out_vals = Vec::with_capacity(vals.len());
        for r in 0..nrows {
            while k < rows_of.len() && rows_of[k] == r {
                if vals[k] != zero {
                    out_cols.push(col_idx[k]);
                    out_vals.push(vals[k]);
                }
                k += 1;
            }
            row_ptr[r + 1] = out_cols.len();
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx: out_cols,
            vals: out_vals,
        }
    }

    pub fn identity(n: usize, one: T) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, one)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => T::default(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, c, v)| (c, r, v)).collect(),
        )
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).fold(T::default(), |acc, (c, v)| acc + v * x[c]))
            .collect()
    }

    /// Sparse product `self * rhs` (row-by-row accumulation).
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols, rhs.nrows);
        let mut acc = vec![T::default(); rhs.ncols];
        let mut touched = vec![false; rhs.ncols];
        let mut cols: Vec<usize> = Vec::new();
        let mut trip = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        cols.push(c);
                    }
                    acc[c] = acc[c] + a * b;
                }
            }
            for &c in &cols {
                trip.push((r, c, acc[c]));
                acc[c] = T::default();
                touched[c] = false;
            }
            cols.clear();
        }
        Self::from_triplets(self.nrows, rhs.ncols, trip)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz() * rhs.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in rhs.triplets() {
                trip.push((r1 * rhs.nrows + r2, c1 * rhs.ncols + c2, v1 * v2));
            }
        }
        Self::from_triplets(self.nrows * rhs.nrows, self.ncols * rhs.ncols, trip)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v = *v * s);
        out
    }

    /// Keeps the listed columns, renumbered in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            map[old] = new;
        }
        let trip = self
            .triplets()
            .filter(|&(_, c, _)| map[c] != usize::MAX)
            .map(|(r, c, v)| (r, map[c], v))
            .collect();
        Self::from_triplets(self.nrows, cols.len(), trip)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let trip = rows
            .iter()
            .enumerate()
            .flat_map(|(new, &old)| self.row(old).map(move |(c, v)| (new, c, v)))
            .collect();
        Self::from_triplets(rows.len(), self.ncols, trip)
    }

    pub fn to_f64(&self) -> Csr<f64> {
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            vals: self.vals.iter().map(|v| v.to_f64()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|v| *v == T::default())
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v.to_f64();
        }
        m
    }

    /// Matrix Market coordinate format, 1-based indices.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut s = String::new();
        writeln!(s, "%%MatrixMarket matrix coordinate {} general", T::MM_FIELD).unwrap();
        writeln!(s, "{} {} {}", self.nrows, self.ncols, self.nnz()).unwrap();
        for (r, c, v) in self.triplets() {
            match T::MM_FIELD {
                "real" => writeln!(s, "{} {} {:.17e}", r + 1, c + 1, v.to_f64()).unwrap(),
                _ => writeln!(s, "{} {} {}", r + 1, c + 1, v).unwrap(),
            }
        }
        out.write_all(s.as_bytes())
    }
}

impl Csr<f64> {
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Self::from_triplets(self.nrows, self.ncols, self.triplets().chain(rhs.triplets()).collect())
    }

    /// `max |A - Aᵀ| / max |A|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let scale = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = self.add(&t.scale(-1.0));
        diff.vals.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale.max(f64::MIN_POSITIVE)
    }

    pub fn to_faer(&self) -> faer::sparse::SparseColMat<usize, f64> {
        let trip: Vec<_> = self
            .triplets()
            .map(|(r, c, v)| faer::sparse::Triplet::new(r, c, v))
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trip)
            .expect("valid sparse structure")
    }
}

/// Block-diagonal concatenation.
pub fn block_diag<T: Scalar>(blocks: &[Csr<T>]) -> Csr<T> {
    let nrows = blocks.iter().map(Csr::nrows).sum();
    let ncols = blocks.iter().map(Csr::ncols).sum();
    let mut trip = Vec::new();
    let (mut ro, mut co) = (0, 0);
    for b in blocks {
        trip.extend(b.triplets().map(|(r, c, v)| (r + ro, c + co, v)));
        ro += b.nrows();
        co += b.ncols();
    }
    Csr::from_triplets(nrows, ncols, trip)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Csr<i64> {
        Csr::from_triplets(2, 3, vec![(0, 0, 1), (0, 2, 2), (1, 1, 3), (0, 0, 4), (1, 2, 0)])
    }

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let a = small();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 0), 5);
        assert_eq!(a.get(1, 2), 0);
    }

    #[test]
    fn products_match_dense() {
        let a = small();
        let at = a.transpose();
        let p = a.matmul(&at);
        let dense = a.to_dense() * at.to_dense();
        assert_eq!(p.to_dense(), dense);
        assert_eq!(a.mul_vec(&[1, 1, 1]), vec![7, 3]);
        let k = a.kron(&Csr::identity(2, 1));
        assert_eq!(k.nrows(), 4);
        assert_eq!(k.get(1, 1), 5);
        assert_eq!(k.get(3, 5), 0);
        assert_eq!(k.get(2, 3), 0);
        assert_eq!(k.get(3, 3), 3);
    }

    #[test]
    fn selection() {
        let a = small();
        let s = a.select_cols(&[2, 0]);
        assert_eq!(s.get(0, 0), 2);
        assert_eq!(s.get(0, 1), 5);
        let r = a.select_rows(&[1]);
        assert_eq!(r.get(0, 1), 3);
    }

    #[test]
    fn matrix_market_header() {
        let mut buf = Vec::new();
        small().write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate integer general\n2 3 3\n1 1 5\n"));
    }
}
