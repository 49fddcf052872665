//! Hermitian eigensolver (cyclic complex Jacobi).
//!
//! The input is first split into the connected components of its nonzero
//! pattern. The split is an exact permutation similarity, and the structured
//! operators in this crate (block-diagonal states, Choi matrices of sparse Kraus
//! families) decompose into many small pieces.

use num_complex::Complex;

use super::ComplexMatrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Eigen-decomposition `M = V diag(values) V^dag` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V diag(f(values)) V^dag`.
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(|&v| f(v)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in fv.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            for r in 0..n {
                let a = v[(r, k)].scale(w);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += a * v[(c, k)].conj();
                }
            }
        }
        out
    }
}

/// Union-find over `n` indices.
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Groups of indices, each sorted, ordered by smallest member.
    pub(crate) fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        groups
    }
}

fn components<T: Real>(m: &ComplexMatrix<T>) -> Vec<Vec<usize>> {
    let n = m.rows();
    let mut sets = DisjointSets::new(n);
    for r in 0..n {
        for c in (r + 1)..n {
            let a = m[(r, c)];
            let b = m[(c, r)];
            if a.norm_sqr() > T::zero() || b.norm_sqr() > T::zero() {
                sets.union(r, c);
            }
        }
    }
    sets.groups()
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub fn eigh<T: Real>(m: &ComplexMatrix<T>) -> HermitianEigen<T> {
    assert!(m.is_square(), "eigh needs a square matrix");
    let n = m.rows();
    let mut pairs: Vec<(T, Vec<(usize, Complex<T>)>)> = Vec::with_capacity(n);
    for comp in components(m) {
        let sub = m.select(&comp, &comp);
        let (vals, vecs) = jacobi(&sub, true);
        let vecs = vecs.expect("vectors requested");
        let k = comp.len();
        for (j, &val) in vals.iter().enumerate() {
            let col: Vec<(usize, Complex<T>)> =
                (0..k).map(|r| (comp[r], vecs[r * k + j])).collect();
            pairs.push((val, col));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (j, (val, col)) in pairs.into_iter().enumerate() {
        values.push(val);
        for (r, z) in col {
            vectors[(r, j)] = z;
        }
    }
    HermitianEigen { values, vectors }
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn eigvalsh<T: Real>(m: &ComplexMatrix<T>) -> Vec<T> {
    assert!(m.is_square(), "eigvalsh needs a square matrix");
    let mut values = Vec::with_capacity(m.rows());
    for comp in components(m) {
        let sub = m.select(&comp, &comp);
        values.extend(jacobi(&sub, false).0);
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    values
}

/// Cyclic Jacobi on the Hermitian part of a small dense matrix. Returns
/// unsorted eigenvalues and, optionally, row-major eigenvectors (columns).
fn jacobi<T: Real>(m: &ComplexMatrix<T>, want_vectors: bool) -> (Vec<T>, Option<Vec<Complex<T>>>) {
    let n = m.rows();
    let zero = Complex::new(T::zero(), T::zero());
    let half = T::lit(0.5);
    let mut a: Vec<Complex<T>> = vec![zero; n * n];
    for r in 0..n {
        for c in 0..n {
            a[r * n + c] = (m[(r, c)] + m[(c, r)].conj()).scale(half);
        }
    }
    let mut v = if want_vectors {
        let mut v = vec![zero; n * n];
        for i in 0..n {
            v[i * n + i] = Complex::new(T::one(), T::zero());
        }
        Some(v)
    } else {
        None
    };
    if n == 1 {
        return (vec![a[0].re], v);
    }

    let eps = T::epsilon();
    for sweep in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for r in 0..n {
            diag += a[r * n + r].norm_sqr();
            for c in (r + 1)..n {
                off += a[r * n + c].norm_sqr();
            }
        }
        if off == T::zero() || off <= eps * eps * (diag + off + off) * T::lit(1e-2) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                if sweep > 4 && mag <= eps * T::lit(1e-3) * (app.abs() + aqq.abs()) {
                    a[p * n + q] = zero;
                    a[q * n + p] = zero;
                    continue;
                }
                let u = (apq / mag).conj();
                let zeta = (aqq - app) / (mag + mag);
                let t = if zeta == T::zero() {
                    T::one()
                } else {
                    zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let su = u.scale(s);
                let cu = u.scale(c);
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp.scale(c) - akq * su;
                    a[k * n + q] = akp.scale(s) + akq * cu;
                }
                let suc = su.conj();
                let cuc = cu.conj();
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk.scale(c) - aqk * suc;
                    a[q * n + k] = apk.scale(s) + aqk * cuc;
                }
                a[p * n + p] = Complex::new(app - t * mag, T::zero());
                a[q * n + q] = Complex::new(aqq + t * mag, T::zero());
                a[p * n + q] = zero;
                a[q * n + p] = zero;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp.scale(c) - vkq * su;
                        v[k * n + q] = vkp.scale(s) + vkq * cu;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i].re).collect(), v)
}
