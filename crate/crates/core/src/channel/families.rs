//! Standard channel families.

use num_complex::Complex;

use super::KrausChannel;
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

fn build<T: Real>(name: String, kraus: Vec<ComplexMatrix<T>>) -> KrausChannel<T> {
    KrausChannel::new(name, kraus).expect("family is trace preserving")
}

/// Identity channel on `C^d`.
pub fn identity<T: Real>(d: usize) -> KrausChannel<T> {
    build(format!("id_{d}"), vec![ComplexMatrix::identity(d)])
}

/// Qubit amplitude damping with decay probability `gamma` in `[0, 1]`.
pub fn amplitude_damping<T: Real>(gamma: T) -> KrausChannel<T> {
    let mut k0 = ComplexMatrix::zeros(2, 2);
    k0[(0, 0)] = re(T::one());
    k0[(1, 1)] = re((T::one() - gamma).sqrt());
    let mut k1 = ComplexMatrix::zeros(2, 2);
    k1[(0, 1)] = re(gamma.sqrt());
    build(format!("AD({gamma})"), vec![k0, k1])
}

/// Phase flip `rho -> (1-p) rho + p Z rho Z`.
pub fn phase_flip<T: Real>(p: T) -> KrausChannel<T> {
    let k0 = ComplexMatrix::identity(2).scale((T::one() - p).sqrt());
    let k1 = ComplexMatrix::from_diagonal(&[p.sqrt(), -p.sqrt()]);
    build(format!("Z({p})"), vec![k0, k1])
}

/// Bit flip `rho -> (1-p) rho + p X rho X`.
pub fn bit_flip<T: Real>(p: T) -> KrausChannel<T> {
    let k0 = ComplexMatrix::identity(2).scale((T::one() - p).sqrt());
    let mut k1 = ComplexMatrix::zeros(2, 2);
    k1[(0, 1)] = re(p.sqrt());
    k1[(1, 0)] = re(p.sqrt());
    build(format!("X({p})"), vec![k0, k1])
}

/// Qubit completely dephasing channel with Kraus pair
/// `{I/sqrt2, Z/sqrt2}`.
pub fn dephasing_pauli<T: Real>() -> KrausChannel<T> {
    let h = T::lit(0.5).sqrt();
    build(
        "Delta_E".into(),
        vec![
            ComplexMatrix::from_diagonal(&[h, h]),
            ComplexMatrix::from_diagonal(&[h, -h]),
        ],
    )
}

/// Qubit completely dephasing channel with Kraus pair `{|0><0|, |1><1|}`.
pub fn dephasing_projective<T: Real>() -> KrausChannel<T> {
    build(
        "Delta_F".into(),
        vec![
            ComplexMatrix::from_diagonal(&[T::one(), T::zero()]),
            ComplexMatrix::from_diagonal(&[T::zero(), T::one()]),
        ],
    )
}

/// Completely depolarizing channel `rho -> Tr(rho) I / d_out` with Kraus
/// operators `E_k = |k mod d_out><floor(k / d_out)| / sqrt(d_out)`,
/// `k = 0 .. d_in * d_out`.
pub fn completely_depolarizing<T: Real>(d_in: usize, d_out: usize) -> KrausChannel<T> {
    let w = T::one() / T::from_count(d_out).sqrt();
    let kraus = (0..d_in * d_out)
        .map(|k| {
            let mut e = ComplexMatrix::zeros(d_out, d_in);
            e[(k % d_out, k / d_out)] = re(w);
            e
        })
        .collect();
    build(format!("depol({d_in}->{d_out})"), kraus)
}

/// Prepares the diagonal state `diag(mu)` from a one-dimensional input, with
/// Kraus operators `sqrt(mu_k) |k><0|`.
pub fn diagonal_preparation<T: Real>(mu: &[T]) -> Option<KrausChannel<T>> {
    let total: T = mu.iter().copied().sum();
    if mu.is_empty() || mu.iter().any(|&m| m < T::zero()) || (total - T::one()).abs() > T::tolerance(1e-10) {
        return None;
    }
    let d = mu.len();
    let kraus = (0..d)
        .map(|k| {
            let mut e = ComplexMatrix::zeros(d, 1);
            e[(k, 0)] = re(mu[k].sqrt());
            e
        })
        .collect();
    KrausChannel::new(format!("prep({d})"), kraus).ok()
}

/// Discards a `d`-dimensional input and outputs the one-dimensional state,
/// with Kraus operators `|0><k|`.
pub fn trace_out<T: Real>(d: usize) -> KrausChannel<T> {
    let kraus = (0..d).map(|k| ComplexMatrix::ket_bra(1, 0, d, k)).collect();
    build(format!("trace({d})"), kraus)
}
