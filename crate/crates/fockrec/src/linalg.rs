//! Complex linear algebra used by the Fock-space engine.
//!
//! [`Dense`] holds small gate matrices; [`Sparse`] (compressed rows) holds
//! Fock blocks, whose dimension grows as `d^n * dim(H)` but whose entries are
//! mostly structural zeros.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{modulus, Amp, Real};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    rows: usize,
    cols: usize,
    data: Vec<Amp<T>>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense { rows, cols, data: vec![Amp::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Amp::one();
        }
        m
    }

    /// Builds a matrix from row vectors; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<Amp<T>>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Dense { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
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

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dense matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Amp<T>) -> Self {
        Dense { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.rows), |acc, _| acc.matmul(self))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| modulus(a - b))
            .fold(T::zero(), T::max)
    }

    /// `U†U = I` within `tol` per entry.
    pub fn is_unitary(&self, tol: T) -> bool {
        self.is_square() && self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.rows)) <= tol
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.adjoint().max_abs_diff(self) <= tol
    }

    pub fn to_sparse(&self) -> Sparse<T> {
        let mut trips = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self[(i, j)];
                if !v.is_zero() {
                    trips.push((i, j, v));
                }
            }
        }
        Sparse::from_triplets(self.rows, self.cols, trips)
    }

    /// Column `j` as a list of `(row, value)` with nonzero values.
    pub fn column_nonzeros(&self, j: usize) -> Vec<(usize, Amp<T>)> {
        (0..self.rows).map(|i| (i, self[(i, j)])).filter(|(_, v)| !v.is_zero()).collect()
    }
}

impl<T> std::ops::Index<(usize, usize)> for Dense<T> {
    type Output = Amp<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Amp<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Dense<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Amp<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Compressed-sparse-row complex matrix.
///
/// Entries whose modulus falls below [`Real::zero_threshold`] are dropped by
/// every constructor, so `nnz() == 0` is the structural zero test.
#[derive(Clone, Debug, PartialEq)]
pub struct Sparse<T> {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Amp<T>>,
}

impl<T: Real> Sparse<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Sparse { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Sparse {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![Amp::one(); n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(rows: usize, cols: usize, mut trips: Vec<(usize, usize, Amp<T>)>) -> Self {
        trips.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(trips.len());
        let mut values: Vec<Amp<T>> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(trips.len());
        for (r, c, v) in trips {
            debug_assert!(r < rows && c < cols, "triplet out of range");
            if last == Some((r, c)) {
                let k = values.len() - 1;
                values[k] = values[k] + v;
            } else {
                indices.push(c);
                values.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        let thr = T::zero_threshold();
        let mut kept_idx = Vec::with_capacity(indices.len());
        let mut kept_val = Vec::with_capacity(values.len());
        for ((c, v), r) in indices.into_iter().zip(values).zip(row_of) {
            if modulus(v) > thr {
                kept_idx.push(c);
                kept_val.push(v);
                indptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Sparse { rows, cols, indptr, indices: kept_idx, values: kept_val }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Nonzero entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Amp<T>)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    /// All nonzero entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Amp<T>)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Amp<T> {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[a..b].binary_search(&c) {
            Ok(k) => self.values[a + k],
            Err(_) => Amp::zero(),
        }
    }

    pub fn to_dense(&self) -> Dense<T> {
        let mut d = Dense::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            d[(r, c)] = v;
        }
        d
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "sparse matmul shape mismatch");
        let thr = T::zero_threshold();
        let mut acc = vec![Amp::<T>::zero(); other.cols];
        let mut mark = vec![usize::MAX; other.cols];
        let mut touched = Vec::new();
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.rows {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = Amp::zero();
                        touched.push(c);
                    }
                    acc[c] = acc[c] + a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if modulus(acc[c]) > thr {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr.push(indices.len());
        }
        Sparse { rows: self.rows, cols: other.cols, indptr, indices, values }
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sparse add shape mismatch");
        let thr = T::zero_threshold();
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0);
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.rows {
            let mut a = self.row(r).peekable();
            let mut b = other.row(r).peekable();
            loop {
                let next = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&(ca, va)), Some(&(cb, vb))) if ca == cb => {
                        a.next();
                        b.next();
                        (ca, va + vb * sign)
                    }
                    (Some(&(ca, va)), Some(&(cb, _))) if ca < cb => {
                        a.next();
                        (ca, va)
                    }
                    (Some(_), Some(&(cb, vb))) => {
                        b.next();
                        (cb, vb * sign)
                    }
                    (Some(&(ca, va)), None) => {
                        a.next();
                        (ca, va)
                    }
                    (None, Some(&(cb, vb))) => {
                        b.next();
                        (cb, vb * sign)
                    }
                };
                if modulus(next.1) > thr {
                    indices.push(next.0);
                    values.push(next.1);
                }
            }
            indptr.push(indices.len());
        }
        Sparse { rows: self.rows, cols: self.cols, indptr, indices, values }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -T::one())
    }

    pub fn scale(&self, s: Amp<T>) -> Self {
        let trips = self.iter().map(|(r, c, v)| (r, c, v * s)).collect();
        Self::from_triplets(self.rows, self.cols, trips)
    }

    pub fn adjoint(&self) -> Self {
        let trips = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.cols, self.rows, trips)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut trips = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.iter() {
            for (r2, c2, v2) in other.iter() {
                trips.push((r1 * other.rows + r2, c1 * other.cols + c2, v1 * v2));
            }
        }
        Self::from_triplets(self.rows * other.rows, self.cols * other.cols, trips)
    }

    pub fn matvec(&self, v: &[Amp<T>]) -> Vec<Amp<T>> {
        assert_eq!(v.len(), self.cols, "matvec length mismatch");
        (0..self.rows).map(|r| self.row(r).fold(Amp::zero(), |acc, (c, a)| acc + a * v[c])).collect()
    }

    /// Keeps only the rows for which `keep(row)` holds.
    pub fn filter_rows(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.rows {
            if keep(r) {
                let (a, b) = (self.indptr[r], self.indptr[r + 1]);
                indices.extend_from_slice(&self.indices[a..b]);
                values.extend_from_slice(&self.values[a..b]);
            }
            indptr.push(indices.len());
        }
        Sparse { rows: self.rows, cols: self.cols, indptr, indices, values }
    }

    /// Relabels rows and columns through `fr`/`fc` into a matrix of the given shape.
    pub fn remap(&self, rows: usize, cols: usize, fr: impl Fn(usize) -> usize, fc: impl Fn(usize) -> usize) -> Self {
        let trips = self.iter().map(|(r, c, v)| (fr(r), fc(c), v)).collect();
        Self::from_triplets(rows, cols, trips)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|&v| modulus(v)).fold(T::zero(), T::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let mut worst = T::zero();
        for r in 0..self.rows {
            let mut map: BTreeMap<usize, Amp<T>> = self.row(r).collect();
            for (c, v) in other.row(r) {
                let e = map.entry(c).or_insert_with(Amp::zero);
                *e = *e - v;
            }
            for v in map.values() {
                worst = worst.max(modulus(*v));
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    /// True when every entry is at most `tol` in modulus.
    pub fn is_zero_within(&self, tol: T) -> bool {
        self.max_abs() <= tol
    }

    /// `‖A†A − I‖_max ≤ tol`.
    pub fn is_unitary(&self, tol: T) -> bool {
        self.rows == self.cols && self.adjoint().matmul(self).approx_eq(&Self::identity(self.rows), tol)
    }

    pub fn commutes_with(&self, other: &Self, tol: T) -> bool {
        self.matmul(other).approx_eq(&other.matmul(self), tol)
    }
}

/// Converts a complex vector to `f64` parts for reporting.
pub fn to_f64_pair<T: Real>(z: Amp<T>) -> (f64, f64) {
    (z.re.as_f64(), z.im.as_f64())
}

/// Inner product `⟨a|b⟩`.
pub fn inner<T: Real>(a: &[Amp<T>], b: &[Amp<T>]) -> Amp<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

/// Squared Euclidean norm.
pub fn norm_sqr<T: Real>(a: &[Amp<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}
