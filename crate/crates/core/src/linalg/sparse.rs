//! Coordinate-format complex matrices for witness-scale operators.
//!
//! Spectral routines split the operator into connected components of its
//! nonzero pattern and hand each component to the dense solver.

use std::collections::BTreeMap;

use num_complex::Complex;

use super::{eigvalsh, matrix_abs, singular_values, ComplexMatrix, DisjointSets};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Complex<T>>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m.add_at(i, i, Complex::new(v, T::zero()));
        }
        m
    }

    pub fn from_dense(m: &ComplexMatrix<T>) -> Self {
        let mut s = Self::zeros(m.rows(), m.cols());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let z = m[(r, c)];
                if z.re != T::zero() || z.im != T::zero() {
                    s.entries.insert((r, c), z);
                }
            }
        }
        s
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for (&(r, c), &z) in &self.entries {
            m[(r, c)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.entries
            .get(&(r, c))
            .copied()
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        self.entries.iter().map(|(&(r, c), &z)| (r, c, z))
    }

    /// Accumulates `z` into entry `(r, c)`.
    pub fn add_at(&mut self, r: usize, c: usize, z: Complex<T>) {
        assert!(r < self.rows && c < self.cols, "sparse index out of range");
        *self
            .entries
            .entry((r, c))
            .or_insert_with(|| Complex::new(T::zero(), T::zero())) += z;
    }

    /// `self += s * other` with `other` placed at offset `(r0, c0)`.
    pub fn add_embedded(&mut self, r0: usize, c0: usize, s: T, other: &Self) {
        for (r, c, z) in other.iter() {
            self.add_at(r0 + r, c0 + c, z.scale(s));
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|(&k, &z)| (k, z.scale(s))).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sparse add");
        let mut out = self.clone();
        out.add_embedded(0, 0, T::one(), other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sparse sub");
        let mut out = self.clone();
        out.add_embedded(0, 0, -T::one(), other);
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            entries: self.entries.iter().map(|(&(r, c), &z)| ((c, r), z.conj())).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.entries.values().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn hermitian_deviation(&self) -> T {
        if self.rows != self.cols {
            return T::infinity();
        }
        let mut dev = T::zero();
        for (&(r, c), &z) in &self.entries {
            dev = dev.max((z - self.get(c, r).conj()).norm());
        }
        dev
    }

    fn check_bipartite(&self, (da, db): (usize, usize)) -> Result<()> {
        if self.rows != da * db || self.cols != da * db {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} sparse operator on a {da}x{db} bipartite space",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// Transpose on the second factor of `A (x) B`.
    pub fn partial_transpose(&self, dims: (usize, usize)) -> Result<Self> {
        self.check_bipartite(dims)?;
        let db = dims.1;
        let mut out = Self::zeros(self.rows, self.cols);
        for (&(r, c), &z) in &self.entries {
            let (a, b) = (r / db, r % db);
            let (a2, b2) = (c / db, c % db);
            out.entries.insert((a * db + b2, a2 * db + b), z);
        }
        Ok(out)
    }

    /// Trace over the second factor, keeping `A`.
    pub fn partial_trace_second(&self, dims: (usize, usize)) -> Result<ComplexMatrix<T>> {
        self.check_bipartite(dims)?;
        let (da, db) = dims;
        let mut out = ComplexMatrix::zeros(da, da);
        for (&(r, c), &z) in &self.entries {
            if r % db == c % db {
                out[(r / db, c / db)] += z;
            }
        }
        Ok(out)
    }

    /// Trace over the first factor, keeping `B`.
    pub fn partial_trace_first(&self, dims: (usize, usize)) -> Result<ComplexMatrix<T>> {
        self.check_bipartite(dims)?;
        let (_, db) = dims;
        let mut out = ComplexMatrix::zeros(db, db);
        for (&(r, c), &z) in &self.entries {
            if r / db == c / db {
                out[(r % db, c % db)] += z;
            }
        }
        Ok(out)
    }

    /// Connected components `(rows, cols)` of the bipartite nonzero pattern.
    fn bipartite_components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut sets = DisjointSets::new(self.rows + self.cols);
        for &(r, c) in self.entries.keys() {
            sets.union(r, self.rows + c);
        }
        let mut touched = vec![false; self.rows + self.cols];
        for &(r, c) in self.entries.keys() {
            touched[r] = true;
            touched[self.rows + c] = true;
        }
        sets.groups()
            .into_iter()
            .filter(|g| g.iter().any(|&i| touched[i]))
            .map(|g| {
                let rows = g.iter().copied().filter(|&i| i < self.rows).collect();
                let cols = g
                    .iter()
                    .copied()
                    .filter(|&i| i >= self.rows)
                    .map(|i| i - self.rows)
                    .collect();
                (rows, cols)
            })
            .collect()
    }

    /// Components of a square operator's symmetric nonzero pattern, plus the
    /// number of untouched indices (each an isolated zero eigenvalue).
    fn square_components(&self) -> (Vec<Vec<usize>>, usize) {
        assert_eq!(self.rows, self.cols, "square operator expected");
        let n = self.rows;
        let mut sets = DisjointSets::new(n);
        let mut touched = vec![false; n];
        for &(r, c) in self.entries.keys() {
            sets.union(r, c);
            touched[r] = true;
            touched[c] = true;
        }
        let groups: Vec<Vec<usize>> = sets
            .groups()
            .into_iter()
            .filter(|g| g.iter().any(|&i| touched[i]))
            .collect();
        let untouched = touched.iter().filter(|&&t| !t).count();
        (groups, untouched)
    }

    fn dense_select(&self, rows: &[usize], cols: &[usize]) -> ComplexMatrix<T> {
        let mut rpos = BTreeMap::new();
        for (i, &r) in rows.iter().enumerate() {
            rpos.insert(r, i);
        }
        let mut cpos = BTreeMap::new();
        for (j, &c) in cols.iter().enumerate() {
            cpos.insert(c, j);
        }
        let mut m = ComplexMatrix::zeros(rows.len(), cols.len());
        for &r in rows {
            let lo = (r, 0);
            let hi = (r, self.cols);
            for (&(_, c), &z) in self.entries.range(lo..hi) {
                if let Some(&j) = cpos.get(&c) {
                    m[(rpos[&r], j)] = z;
                }
            }
        }
        m
    }

    /// All eigenvalues (ascending) of the Hermitian part.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        let (groups, untouched) = self.square_components();
        let mut vals = vec![T::zero(); untouched];
        for g in groups {
            vals.extend(eigvalsh(&self.dense_select(&g, &g)));
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        vals
    }

    fn require_hermitian(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("square operator expected".into()));
        }
        let dev = self.hermitian_deviation();
        if dev > T::tolerance(1e-12) * (T::one() + self.max_abs()) {
            return Err(Error::NonHermitian {
                deviation: dev.as_f64(),
            });
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        self.require_hermitian()?;
        Ok(self.hermitian_eigenvalues().first().copied().unwrap_or(T::zero()))
    }

    pub fn max_eigenvalue(&self) -> Result<T> {
        self.require_hermitian()?;
        Ok(self.hermitian_eigenvalues().last().copied().unwrap_or(T::zero()))
    }

    /// Nonzero singular values, unordered.
    pub fn singular_values(&self) -> Vec<T> {
        let mut out = Vec::new();
        for (rows, cols) in self.bipartite_components() {
            out.extend(singular_values(&self.dense_select(&rows, &cols)));
        }
        out
    }

    pub fn spectral_norm(&self) -> T {
        self.singular_values()
            .into_iter()
            .fold(T::zero(), |m, s| m.max(s))
    }

    pub fn trace_norm(&self) -> T {
        self.singular_values().into_iter().sum()
    }

    /// `|M| = sqrt(M^dag M)`, a `cols x cols` operator.
    pub fn abs(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.cols);
        for (rows, cols) in self.bipartite_components() {
            if rows.is_empty() || cols.is_empty() {
                continue;
            }
            let a = matrix_abs(&self.dense_select(&rows, &cols));
            for (i, &ci) in cols.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    let z = a[(i, j)];
                    if z.re != T::zero() || z.im != T::zero() {
                        out.entries.insert((ci, cj), z);
                    }
                }
            }
        }
        out
    }
}
