//! Quantum channels in Kraus form.
//!
//! The environment of a Kraus representation `{E_k}` is spanned by the Kraus
//! labels, so the complementary channel is
//! `N^c(rho)_{kk'} = Tr(E_k rho E_k'^dag)`. Kraus lists are kept exactly as
//! given: never reordered, merged or pruned behind the caller's back.

pub mod families;
mod spec;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use spec::ChannelSpec;

use crate::error::{Error, Result};
use crate::linalg::{
    eigvalsh, partial_transpose, pseudo_inverse, spectral_norm, ComplexMatrix, SparseMatrix,
};
use crate::scalar::Real;

/// Tolerance used by the degradability least-squares fit.
pub const DEGRADABILITY_TOL: f64 = 1e-7;

/// Channel given by Kraus operators `E_k : C^{dim_in} -> C^{dim_out}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel<T> {
    name: String,
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix<T>>,
}

/// Structural predicate tested on a channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predicate {
    Degradable,
    Antidegradable,
    Ppt,
}

/// Outcome of a structural test.
///
/// `residual` is the worst violation among the checked conditions, so
/// `holds` implies `residual <= DEGRADABILITY_TOL` for the degradability
/// family. `witness` is the Choi matrix of the degrading map when one was
/// found.
#[derive(Clone, Debug)]
pub struct ChannelVerdict<T> {
    pub predicate: Predicate,
    pub holds: bool,
    pub residual: T,
    pub witness: Option<ComplexMatrix<T>>,
}

impl<T: Real> KrausChannel<T> {
    /// Validates shapes and trace preservation
    /// (`||sum E_k^dag E_k - I||_inf <= 1e-10`).
    pub fn new(name: impl Into<String>, kraus: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let ch = Self::from_parts(name, kraus)?;
        let residual = ch.tp_residual();
        if residual > T::tolerance(1e-10) {
            return Err(Error::NotTracePreserving {
                residual: residual.as_f64(),
            });
        }
        Ok(ch)
    }

    /// Shape checks only; trace preservation is the caller's responsibility.
    pub(crate) fn from_parts(name: impl Into<String>, kraus: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("zero dimension".into()));
        }
        if let Some(k) = kraus.iter().position(|e| e.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {k} has shape {:?}, expected {:?}",
                kraus[k].shape(),
                (dim_out, dim_in)
            )));
        }
        Ok(Self {
            name: name.into(),
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix<T>] {
        &self.kraus
    }

    /// Number of Kraus operators, which is also the environment dimension.
    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    /// `||sum_k E_k^dag E_k - I||_inf`.
    pub fn tp_residual(&self) -> T {
        let mut acc = ComplexMatrix::identity(self.dim_in).scale(-T::one());
        for e in &self.kraus {
            acc += &e.adjoint().matmul(e);
        }
        spectral_norm(&acc)
    }

    /// Appends zero Kraus operators up to `count`. The channel is unchanged;
    /// its environment grows.
    pub fn pad_kraus_to(&self, count: usize) -> Result<Self> {
        if count < self.kraus.len() {
            return Err(Error::InvalidParameter(format!(
                "cannot pad {} Kraus operators down to {count}",
                self.kraus.len()
            )));
        }
        let mut kraus = self.kraus.clone();
        kraus.resize(count, ComplexMatrix::zeros(self.dim_out, self.dim_in));
        Ok(Self {
            kraus,
            ..self.clone()
        })
    }

    /// Removes Kraus operators that are exactly zero.
    pub fn drop_zero_kraus(&self) -> Self {
        let kraus: Vec<_> = self.kraus.iter().filter(|e| !e.is_zero()).cloned().collect();
        Self {
            kraus,
            ..self.clone()
        }
    }

    fn check_input(&self, rho: &ComplexMatrix<T>) -> Result<()> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} input to a channel with input dimension {}",
                rho.rows(),
                rho.cols(),
                self.dim_in
            )));
        }
        Ok(())
    }

    /// `N(rho) = sum_k E_k rho E_k^dag`. Linear, so any square operator of
    /// the right size is accepted.
    pub fn apply(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.check_input(rho)?;
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for e in &self.kraus {
            out += &e.sandwich(rho);
        }
        Ok(out)
    }

    /// Complementary output `Tr(E_k rho E_k'^dag)`.
    pub fn complement_apply(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.check_input(rho)?;
        let f: Vec<ComplexMatrix<T>> = self.kraus.iter().map(|e| e.matmul(rho)).collect();
        let k = self.kraus.len();
        let mut out = ComplexMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                // Tr(F_a E_b^dag) = sum conj(E_b) * F_a elementwise.
                out[(a, b)] = self.kraus[b].hs_inner(&f[a]);
            }
        }
        Ok(out)
    }

    /// Adjoint map `Y -> sum_k E_k^dag Y E_k`.
    pub fn apply_adjoint(&self, y: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for e in &self.kraus {
            out += &e.adjoint().matmul(y).matmul(e);
        }
        out
    }

    /// Adjoint of the complement, `Y -> sum_{k,k'} Y_{k'k} E_k'^dag E_k`.
    pub fn complement_adjoint(&self, y: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let k = self.kraus.len();
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for kp in 0..k {
            let mut z = ComplexMatrix::zeros(self.dim_out, self.dim_in);
            for kk in 0..k {
                let w = y[(kp, kk)];
                if w.re != T::zero() || w.im != T::zero() {
                    z.add_scaled(w, &self.kraus[kk]);
                }
            }
            out += &self.kraus[kp].adjoint().matmul(&z);
        }
        out
    }

    /// Complementary channel with Kraus operators `R_b[k, a] = E_k[b, a]`.
    pub fn complement(&self) -> Self {
        let k = self.kraus.len();
        let kraus = (0..self.dim_out)
            .map(|b| ComplexMatrix::from_fn(k, self.dim_in, |kk, a| self.kraus[kk][(b, a)]))
            .collect();
        Self {
            name: format!("{}^c", self.name),
            dim_in: self.dim_in,
            dim_out: k,
            kraus,
        }
    }

    /// Unnormalized Choi matrix `sum_{s,t} |s><t| (x) N(|s><t|)` on `A (x) B`.
    pub fn choi(&self) -> ComplexMatrix<T> {
        let (din, dout) = (self.dim_in, self.dim_out);
        let n = din * dout;
        let mut out = ComplexMatrix::zeros(n, n);
        for e in &self.kraus {
            let v: Vec<Complex<T>> = (0..n).map(|idx| e[(idx % dout, idx / dout)]).collect();
            for (r, vr) in v.iter().enumerate() {
                if vr.re == T::zero() && vr.im == T::zero() {
                    continue;
                }
                for (c, vc) in v.iter().enumerate() {
                    out[(r, c)] += vr * vc.conj();
                }
            }
        }
        out
    }

    /// Sparse Choi matrix built from the nonzero Kraus entries.
    pub fn choi_sparse(&self) -> SparseMatrix<T> {
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut out = SparseMatrix::zeros(din * dout, din * dout);
        for e in &self.kraus {
            let nz = nonzeros(e);
            for &(b, s, x) in &nz {
                for &(b2, t, y) in &nz {
                    out.add_at(s * dout + b, t * dout + b2, x * y.conj());
                }
            }
        }
        out
    }

    /// Superoperator acting on row-major vectorizations:
    /// `vec(N(X)) = T vec(X)` with `T = sum_k E_k (x) conj(E_k)`.
    pub fn transfer_matrix(&self) -> ComplexMatrix<T> {
        let mut t = ComplexMatrix::zeros(self.dim_out * self.dim_out, self.dim_in * self.dim_in);
        for e in &self.kraus {
            t += &crate::linalg::tensor_product(e, &e.conj());
        }
        t
    }

    /// Applies the channel to one factor of a bipartite operator.
    ///
    /// `dims` are the dimensions of the two input factors; the factor
    /// selected by `on` must equal `dim_in`.
    pub fn apply_on(
        &self,
        rho: &ComplexMatrix<T>,
        dims: (usize, usize),
        on: crate::linalg::Subsystem,
    ) -> Result<ComplexMatrix<T>> {
        use crate::linalg::Subsystem;
        let (dx, dy) = dims;
        if rho.shape() != (dx * dy, dx * dy) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a {dx}x{dy} bipartite space",
                rho.rows(),
                rho.cols()
            )));
        }
        let acted = match on {
            Subsystem::First => dx,
            Subsystem::Second => dy,
        };
        if acted != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input {} applied to a factor of dimension {acted}",
                self.dim_in
            )));
        }
        let d = self.dim_out;
        match on {
            Subsystem::First => {
                let mut out = ComplexMatrix::zeros(d * dy, d * dy);
                for e in &self.kraus {
                    let nz = nonzeros(e);
                    for &(u, x, ex) in &nz {
                        for &(u2, x2, ex2) in &nz {
                            let w = ex * ex2.conj();
                            for y in 0..dy {
                                for y2 in 0..dy {
                                    out[(u * dy + y, u2 * dy + y2)] +=
                                        w * rho[(x * dy + y, x2 * dy + y2)];
                                }
                            }
                        }
                    }
                }
                Ok(out)
            }
            Subsystem::Second => {
                let mut out = ComplexMatrix::zeros(dx * d, dx * d);
                for e in &self.kraus {
                    let nz = nonzeros(e);
                    for &(u, y, ey) in &nz {
                        for &(u2, y2, ey2) in &nz {
                            let w = ey * ey2.conj();
                            for x in 0..dx {
                                for x2 in 0..dx {
                                    out[(x * d + u, x2 * d + u2)] +=
                                        w * rho[(x * dy + y, x2 * dy + y2)];
                                }
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Decides degradability: finds a channel `D` with `D o N = N^c` by
    /// least squares on transfer matrices and checks that the minimum-norm
    /// solution is completely positive and trace preserving.
    ///
    /// A negative answer is only conclusive when the fit is unique, i.e.
    /// when `N` has an injective transfer matrix. Otherwise the minimum-norm
    /// solution may fail positivity while some other solution passes, and
    /// the verdict can be a false negative.
    pub fn is_degradable(&self) -> ChannelVerdict<T> {
        fit_post_processing(self, &self.complement(), Predicate::Degradable)
    }

    /// Antidegradability, tested as degradability of the complement.
    pub fn is_antidegradable(&self) -> ChannelVerdict<T> {
        fit_post_processing(&self.complement(), self, Predicate::Antidegradable)
    }

    /// PPT test on the Choi matrix.
    pub fn is_ppt(&self) -> ChannelVerdict<T> {
        let pt = self.choi_sparse().partial_transpose((self.dim_in, self.dim_out));
        let pt = pt.expect("Choi matrix has bipartite shape");
        let vals = pt.hermitian_eigenvalues();
        let lo = vals.first().copied().unwrap_or(T::zero());
        let hi = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        ChannelVerdict {
            predicate: Predicate::Ppt,
            holds: crate::linalg::psd_feasible(lo, hi),
            residual: (-lo).max(T::zero()),
            witness: None,
        }
    }
}

/// Nonzero entries `(row, col, value)` of a dense matrix.
pub(crate) fn nonzeros<T: Real>(m: &ComplexMatrix<T>) -> Vec<(usize, usize, Complex<T>)> {
    let mut out = Vec::new();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let z = m[(r, c)];
            if z.re != T::zero() || z.im != T::zero() {
                out.push((r, c, z));
            }
        }
    }
    out
}

/// Tensor product channel with Kraus operators `E_k (x) F_l`, `k` outer.
pub fn tensor<T: Real>(a: &KrausChannel<T>, b: &KrausChannel<T>) -> KrausChannel<T> {
    let mut kraus = Vec::with_capacity(a.kraus_count() * b.kraus_count());
    for e in a.kraus() {
        for f in b.kraus() {
            kraus.push(crate::linalg::tensor_product(e, f));
        }
    }
    KrausChannel {
        name: format!("{} (x) {}", a.name(), b.name()),
        dim_in: a.dim_in() * b.dim_in(),
        dim_out: a.dim_out() * b.dim_out(),
        kraus,
    }
}

/// Max-entry distance between the Choi matrices of two channels with the same
/// input and output dimensions.
pub fn choi_distance<T: Real>(a: &KrausChannel<T>, b: &KrausChannel<T>) -> Result<T> {
    if (a.dim_in(), a.dim_out()) != (b.dim_in(), b.dim_out()) {
        return Err(Error::DimensionMismatch("channels act on different spaces".into()));
    }
    Ok((&a.choi() - &b.choi()).max_abs())
}

/// Least-squares search for `D` with `D o source = target`.
fn fit_post_processing<T: Real>(
    source: &KrausChannel<T>,
    target: &KrausChannel<T>,
    predicate: Predicate,
) -> ChannelVerdict<T> {
    let ts = source.transfer_matrix();
    let tt = target.transfer_matrix();
    let x = tt.matmul(&pseudo_inverse(&ts, T::lit(1e-10)));
    let fit = &x.matmul(&ts) - &tt;
    let eq_residual = fit.max_abs() / (T::one() + tt.max_abs());

    // Choi(D) on B (x) E: entry [(b,e),(b',e')] = X[(e,e'), (b,b')].
    let (db, de) = (source.dim_out(), target.dim_out());
    let choi = ComplexMatrix::from_fn(db * de, db * de, |r, c| {
        let (b, e) = (r / de, r % de);
        let (b2, e2) = (c / de, c % de);
        x[(e * de + e2, b * db + b2)]
    });
    let herm_residual = choi.hermitian_deviation();
    let herm = choi.hermitian_part();
    let vals = eigvalsh(&herm);
    let psd_residual = (-vals.first().copied().unwrap_or(T::zero())).max(T::zero());
    let mut tp_residual = T::zero();
    for b in 0..db {
        for b2 in 0..db {
            let tr: Complex<T> = (0..de).map(|e| herm[(b * de + e, b2 * de + e)]).sum();
            let target = if b == b2 { T::one() } else { T::zero() };
            tp_residual = tp_residual.max((tr - Complex::new(target, T::zero())).norm());
        }
    }
    let residual = eq_residual
        .max(herm_residual)
        .max(psd_residual)
        .max(tp_residual);
    let holds = residual <= T::tolerance(DEGRADABILITY_TOL);
    ChannelVerdict {
        predicate,
        holds,
        residual,
        witness: holds.then_some(herm),
    }
}

/// Choi matrix with the output factor transposed.
pub fn transposed_choi<T: Real>(ch: &KrausChannel<T>) -> ComplexMatrix<T> {
    partial_transpose(&ch.choi(), (ch.dim_in(), ch.dim_out())).expect("bipartite Choi matrix")
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;
    use crate::linalg::Subsystem;

    #[test]
    fn rejects_non_trace_preserving() {
        let k = vec![ComplexMatrix::<f64>::identity(2).scale(0.9)];
        assert!(matches!(
            KrausChannel::new("bad", k),
            Err(Error::NotTracePreserving { .. })
        ));
        assert!(KrausChannel::<f64>::new("empty", vec![]).is_err());
    }

    #[test]
    fn complement_matches_explicit_channel() {
        let ch = amplitude_damping::<f64>(0.3);
        let rho = ComplexMatrix::from_real_rows(&[&[0.6, 0.2], &[0.2, 0.4]]);
        let direct = ch.complement_apply(&rho).unwrap();
        let via = ch.complement().apply(&rho).unwrap();
        assert!((&direct - &via).max_abs() < 1e-14);
    }

    #[test]
    fn double_complement_recovers_channel() {
        let ch = amplitude_damping::<f64>(0.37);
        let cc = ch.complement().complement();
        assert!(choi_distance(&ch, &cc).unwrap() < 1e-12);
    }

    #[test]
    fn adjoints_are_adjoint() {
        let ch = amplitude_damping::<f64>(0.3);
        let rho = ComplexMatrix::from_rows(vec![
            vec![Complex::new(0.6, 0.0), Complex::new(0.1, 0.2)],
            vec![Complex::new(0.1, -0.2), Complex::new(0.4, 0.0)],
        ])
        .unwrap();
        let y = ComplexMatrix::from_rows(vec![
            vec![Complex::new(1.0, 0.0), Complex::new(0.3, -0.5)],
            vec![Complex::new(0.3, 0.5), Complex::new(-2.0, 0.0)],
        ])
        .unwrap();
        let lhs = y.hs_inner(&ch.apply(&rho).unwrap());
        let rhs = ch.apply_adjoint(&y).hs_inner(&rho);
        assert!((lhs - rhs).norm() < 1e-14);
        let lhs = y.hs_inner(&ch.complement_apply(&rho).unwrap());
        let rhs = ch.complement_adjoint(&y).hs_inner(&rho);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn transfer_matrix_acts_on_row_major_vec() {
        let ch = amplitude_damping::<f64>(0.2);
        let rho = ComplexMatrix::from_real_rows(&[&[0.6, 0.2], &[0.2, 0.4]]);
        let out = ch.apply(&rho).unwrap();
        let t = ch.transfer_matrix();
        let v = t.mul_vec(rho.as_slice());
        for (a, b) in v.iter().zip(out.as_slice()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn apply_on_second_factor() {
        let id = identity::<f64>(2);
        let ad = amplitude_damping::<f64>(0.4);
        let joint = tensor(&id, &ad);
        let rho = ComplexMatrix::from_fn(4, 4, |r, c| {
            Complex::new(if r == c { 0.25 } else { 0.05 }, 0.0)
        });
        let a = joint.apply(&rho).unwrap();
        let b = ad.apply_on(&rho, (2, 2), Subsystem::Second).unwrap();
        assert!((&a - &b).max_abs() < 1e-14);
        let joint = tensor(&ad, &id);
        let a = joint.apply(&rho).unwrap();
        let b = ad.apply_on(&rho, (2, 2), Subsystem::First).unwrap();
        assert!((&a - &b).max_abs() < 1e-14);
    }

    #[test]
    fn degradability_examples() {
        assert!(phase_flip::<f64>(0.2).is_degradable().holds);
        assert!(amplitude_damping::<f64>(0.3).is_degradable().holds);
        assert!(!amplitude_damping::<f64>(0.7).is_degradable().holds);
        let id = identity::<f64>(2);
        assert!(id.is_degradable().holds);
        assert!(!id.is_antidegradable().holds);
        assert!(!id.is_ppt().holds);
        let dep = completely_depolarizing::<f64>(2, 2);
        assert!(dep.is_antidegradable().holds);
        assert!(dep.is_ppt().holds);
    }

    #[test]
    fn degrading_map_witness_is_a_channel() {
        let v = amplitude_damping::<f64>(0.25).is_degradable();
        let w = v.witness.unwrap();
        assert!(crate::linalg::min_eigenvalue(&w).unwrap() > -1e-9);
    }
}
