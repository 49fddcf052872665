//! Dense and sparse complex linear algebra.
//!
//! Matrices use a row-major layout. Bipartite operators on `A (x) B` index the
//! pair `(a, b)` as `a * d_B + b`.

mod eigen;
mod matrix;
pub mod sparse;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use eigen::{eigh, eigvalsh, HermitianEigen};
pub(crate) use eigen::DisjointSets;
pub use matrix::ComplexMatrix;
pub use sparse::SparseMatrix;

use crate::error::{Error, Result};
use crate::scalar::{xlog2x, Real};

/// Which tensor factor of a bipartite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partition of `0..total` into consecutive blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "block sizes must be positive and non-empty, got {sizes:?}"
            )));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        Ok(Self { sizes, offsets })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn size(&self, i: usize) -> usize {
        self.sizes[i]
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.sizes[i]
    }

    /// Block containing `index`.
    pub fn block_of(&self, index: usize) -> Option<usize> {
        (0..self.len()).find(|&i| self.range(i).contains(&index))
    }
}

/// Kronecker product `a (x) b`.
pub fn tensor_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let x = a[(i, j)];
            if x.re == T::zero() && x.im == T::zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Block-diagonal matrix with the given (possibly non-square) blocks.
pub fn direct_sum<T: Real>(blocks: &[ComplexMatrix<T>]) -> ComplexMatrix<T> {
    let rows = blocks.iter().map(|b| b.rows()).sum();
    let cols = blocks.iter().map(|b| b.cols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.set_block(r0, c0, b);
        r0 += b.rows();
        c0 += b.cols();
    }
    out
}

fn check_bipartite<T: Real>(m: &ComplexMatrix<T>, (da, db): (usize, usize)) -> Result<()> {
    if m.rows() != da * db || m.cols() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on a {da}x{db} bipartite space",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Partial trace over one factor of `A (x) B`, keeping the other.
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix<T>> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    Ok(match keep {
        Subsystem::First => ComplexMatrix::from_fn(da, da, |a, a2| {
            (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum()
        }),
        Subsystem::Second => ComplexMatrix::from_fn(db, db, |b, b2| {
            (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum()
        }),
    })
}

/// Transpose on the second factor of `A (x) B`.
pub fn partial_transpose<T: Real>(
    m: &ComplexMatrix<T>,
    dims: (usize, usize),
) -> Result<ComplexMatrix<T>> {
    check_bipartite(m, dims)?;
    let (_, db) = dims;
    Ok(ComplexMatrix::from_fn(m.rows(), m.cols(), |r, c| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (c / db, c % db);
        m[(a * db + b2, a2 * db + b)]
    }))
}

/// Eigen-decomposition of `[[0, M], [M^dag, 0]]`.
fn hermitian_embedding<T: Real>(m: &ComplexMatrix<T>) -> HermitianEigen<T> {
    let (r, c) = m.shape();
    let mut h = ComplexMatrix::zeros(r + c, r + c);
    h.set_block(0, r, m);
    h.set_block(r, 0, &m.adjoint());
    eigh(&h)
}

/// Singular values in descending order (length `min(rows, cols)`).
pub fn singular_values<T: Real>(m: &ComplexMatrix<T>) -> Vec<T> {
    let k = m.rows().min(m.cols());
    if m.is_square() && m.is_hermitian() {
        let mut s: Vec<T> = eigvalsh(m).into_iter().map(|v| v.abs()).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        return s;
    }
    let (r, c) = m.shape();
    let mut h = ComplexMatrix::zeros(r + c, r + c);
    h.set_block(0, r, m);
    h.set_block(r, 0, &m.adjoint());
    let mut vals = eigvalsh(&h);
    vals.reverse();
    vals.truncate(k);
    vals.into_iter().map(|v| v.max(T::zero())).collect()
}

/// `|M| = sqrt(M^dag M)`, a `cols x cols` positive operator.
pub fn matrix_abs<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (r, c) = m.shape();
    let eig = hermitian_embedding(m);
    let mut out = ComplexMatrix::zeros(c, c);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= T::zero() {
            continue;
        }
        let w = lam + lam;
        let y: Vec<Complex<T>> = (0..c).map(|i| eig.vectors[(r + i, k)]).collect();
        for i in 0..c {
            let yi = y[i].scale(w);
            if yi.re == T::zero() && yi.im == T::zero() {
                continue;
            }
            for j in 0..c {
                out[(i, j)] += yi * y[j].conj();
            }
        }
    }
    out
}

/// Trace norm (sum of singular values).
pub fn trace_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    singular_values(m).into_iter().sum()
}

/// Spectral norm (largest singular value).
pub fn spectral_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    singular_values(m).first().copied().unwrap_or(T::zero())
}

/// Moore-Penrose pseudo-inverse, discarding singular values below
/// `rel_tol * sigma_max`.
pub fn pseudo_inverse<T: Real>(m: &ComplexMatrix<T>, rel_tol: T) -> ComplexMatrix<T> {
    let (r, c) = m.shape();
    let eig = hermitian_embedding(m);
    let smax = eig.values.last().copied().unwrap_or(T::zero()).max(T::zero());
    let cutoff = rel_tol * smax;
    let mut out = ComplexMatrix::zeros(c, r);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= cutoff || lam <= T::zero() {
            continue;
        }
        let w = (T::one() + T::one()) / lam;
        for i in 0..c {
            let yi = eig.vectors[(r + i, k)].scale(w);
            for j in 0..r {
                out[(i, j)] += yi * eig.vectors[(j, k)].conj();
            }
        }
    }
    out
}

fn require_hermitian<T: Real>(m: &ComplexMatrix<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_hermitian() {
        return Err(Error::NonHermitian {
            deviation: m.hermitian_deviation().as_f64(),
        });
    }
    Ok(())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    require_hermitian(m)?;
    Ok(eigvalsh(m).first().copied().unwrap_or(T::zero()))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    require_hermitian(m)?;
    Ok(eigvalsh(m).last().copied().unwrap_or(T::zero()))
}

/// PSD feasibility rule shared by all certificates:
/// `min_eig >= -1e-9 * (1 + spectral_norm)`.
pub fn psd_feasible<T: Real>(min_eig: T, norm: T) -> bool {
    min_eig >= -T::tolerance(1e-9) * (T::one() + norm)
}

/// Checks that `rho` is a density matrix: Hermitian, unit trace within
/// `1e-9`, eigenvalues at least `-1e-9`. Returns its eigenvalues.
pub fn validate_density<T: Real>(rho: &ComplexMatrix<T>) -> Result<Vec<T>> {
    require_hermitian(rho)?;
    let tr = rho.real_trace();
    if (tr - T::one()).abs() > T::tolerance(1e-9) {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let vals = eigvalsh(rho);
    if let Some(&lo) = vals.first() {
        if lo < -T::tolerance(1e-9) {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo}")));
        }
    }
    Ok(vals)
}

/// Shannon entropy in bits of a list of eigenvalues, clipping values in
/// `[-1e-12, 0)` (and below) to zero.
pub fn entropy_of_spectrum<T: Real>(vals: &[T]) -> T {
    -vals.iter().map(|&v| xlog2x(v)).sum::<T>()
}

/// Von Neumann entropy in bits of a density matrix.
pub fn von_neumann_entropy<T: Real>(rho: &ComplexMatrix<T>) -> Result<T> {
    let vals = validate_density(rho)?;
    Ok(entropy_of_spectrum(&vals))
}

/// Entropy in bits of a positive operator without validation.
pub(crate) fn entropy_unchecked<T: Real>(m: &ComplexMatrix<T>) -> T {
    entropy_of_spectrum(&eigvalsh(m))
}

/// Entropy in bits together with `log2 m` (eigenvalues floored at the
/// smallest positive normal number).
pub(crate) fn entropy_and_log2<T: Real>(m: &ComplexMatrix<T>) -> (T, ComplexMatrix<T>) {
    let eig = eigh(m);
    let s = entropy_of_spectrum(&eig.values);
    let floor = T::min_positive_value();
    let log = eig.map(|v| v.max(floor).log2());
    (s, log)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn abs_of_row_vector() {
        let m = M::from_real_rows(&[&[1.0, 1.0]]);
        let a = matrix_abs(&m);
        let h = 1.0 / 2f64.sqrt();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[(i, j)] - c(h, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn swap_min_eigenvalue() {
        let mut swap = M::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                swap[(a * 2 + b, b * 2 + a)] = c(1.0, 0.0);
            }
        }
        assert!((min_eigenvalue(&swap).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(min_eigenvalue(&m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn entropy_of_maximally_mixed() {
        let rho = M::identity(4).scale(0.25);
        assert!((von_neumann_entropy(&rho).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_bad_states() {
        let rho = M::identity(2);
        assert!(von_neumann_entropy(&rho).is_err());
        let rho = M::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(von_neumann_entropy(&rho).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let a = M::from_real_rows(&[&[0.3, 0.1], &[0.1, 0.7]]);
        let b = M::from_rows(vec![
            vec![c(0.5, 0.0), c(0.0, 0.2), c(0.0, 0.0)],
            vec![c(0.0, -0.2), c(0.25, 0.0), c(0.1, 0.0)],
            vec![c(0.0, 0.0), c(0.1, 0.0), c(0.25, 0.0)],
        ])
        .unwrap();
        let ab = tensor_product(&a, &b);
        let ta = partial_trace(&ab, (2, 3), Subsystem::First).unwrap();
        let tb = partial_trace(&ab, (2, 3), Subsystem::Second).unwrap();
        assert!((&ta - &a).max_abs() < 1e-14);
        assert!((&tb - &b).max_abs() < 1e-14);
    }

    #[test]
    fn partial_transpose_is_involution() {
        let m = M::from_fn(6, 6, |r, c| Complex::new((r * 7 + c) as f64, (r as f64) - (c as f64)));
        let once = partial_transpose(&m, (2, 3)).unwrap();
        let twice = partial_transpose(&once, (2, 3)).unwrap();
        assert_eq!(twice, m);
    }

    #[test]
    fn direct_sum_rectangular() {
        let a = M::from_real_rows(&[&[1.0, 2.0]]);
        let b = M::from_real_rows(&[&[3.0], &[4.0]]);
        let s = direct_sum(&[a, b]);
        assert_eq!(s.shape(), (3, 3));
        assert_eq!(s[(0, 1)], c(2.0, 0.0));
        assert_eq!(s[(2, 2)], c(4.0, 0.0));
        assert_eq!(s[(1, 0)], c(0.0, 0.0));
    }

    #[test]
    fn pseudo_inverse_of_rank_deficient() {
        let m = M::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[0.0, 0.0]]);
        let p = pseudo_inverse(&m, 1e-12);
        let back = m.matmul(&p).matmul(&m);
        assert!((&back - &m).max_abs() < 1e-12);
    }

    #[test]
    fn block_structure_offsets() {
        let b = BlockStructure::new(vec![1, 3, 2]).unwrap();
        assert_eq!(b.offsets(), &[0, 1, 4]);
        assert_eq!(b.total(), 6);
        assert_eq!(b.block_of(4), Some(2));
        assert!(BlockStructure::new(vec![2, 0]).is_err());
    }

    #[test]
    fn f32_entropy() {
        let rho = ComplexMatrix::<f32>::identity(2).scale(0.5);
        assert!((von_neumann_entropy(&rho).unwrap() - 1.0).abs() < 1e-5);
    }
}
