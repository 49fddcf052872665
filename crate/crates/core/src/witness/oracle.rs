//! Lower estimates of the diamond norm of a Hermiticity-preserving map.
//!
//! For such maps the diamond norm is attained on pure inputs
//! `psi = vec(K)`, `||K||_F = 1`, where the output is
//! `O(K) = (K (x) I) J (K (x) I)^dag` with `J` the Choi matrix. Every value
//! returned is `||O(K)||_1` at an explicit `K`, hence a certified lower bound.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigh, partial_trace, tensor_product, ComplexMatrix, Subsystem};
use crate::optim::{normal_vec, restart_rng};
use crate::scalar::Real;

pub const DEFAULT_ORACLE_RESTARTS: usize = 64;

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_ORACLE_RESTARTS,
            seed: 0,
            max_iter: 400,
        }
    }
}

struct Problem<'a, T> {
    choi: &'a ComplexMatrix<T>,
    dims: (usize, usize),
}

impl<T: Real> Problem<'_, T> {
    fn lift(&self, k: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        tensor_product(k, &ComplexMatrix::identity(self.dims.1))
    }

    fn value(&self, k: &ComplexMatrix<T>) -> T {
        let ki = self.lift(k);
        let out = ki.matmul(&self.choi.matmul(&ki.adjoint())).hermitian_part();
        crate::linalg::eigvalsh(&out).into_iter().map(|v| v.abs()).sum()
    }

    /// Value and the gradient `2 W^dag`, `W = Tr_B(J (K (x) I)^dag S)` with
    /// `S` the sign of the output.
    fn value_and_gradient(&self, k: &ComplexMatrix<T>) -> (T, ComplexMatrix<T>) {
        let ki = self.lift(k);
        let z = self.choi.matmul(&ki.adjoint());
        let out = ki.matmul(&z).hermitian_part();
        let eig = eigh(&out);
        let value = eig.values.iter().map(|v| v.abs()).sum();
        let sign = eig.map(|v| {
            if v > T::zero() {
                T::one()
            } else if v < T::zero() {
                -T::one()
            } else {
                T::zero()
            }
        });
        let w = partial_trace(&z.matmul(&sign), self.dims, Subsystem::First).expect("bipartite product");
        (value, w.adjoint().scale(T::one() + T::one()))
    }

    fn ascend(&self, mut k: ComplexMatrix<T>, max_iter: usize) -> T {
        let (mut f, mut g) = self.value_and_gradient(&k);
        let mut step = T::one();
        for _ in 0..max_iter {
            let radial = k.hs_inner(&g).re;
            let mut tangent = g.clone();
            tangent.add_scaled(Complex::new(-radial, T::zero()), &k);
            let gnorm = tangent.frobenius_norm();
            if gnorm <= T::tolerance(1e-12) * (T::one() + f) {
                break;
            }
            let mut accepted = None;
            let mut trial_step = step;
            for _ in 0..50 {
                let mut cand = k.clone();
                cand.add_scaled(Complex::new(trial_step / gnorm, T::zero()), &tangent);
                let cand = cand.scale(T::one() / cand.frobenius_norm());
                let fc = self.value(&cand);
                if fc > f {
                    accepted = Some((cand, fc));
                    break;
                }
                trial_step *= T::lit(0.5);
            }
            let Some((cand, fc)) = accepted else {
                break;
            };
            let gain = fc - f;
            k = cand;
            step = (trial_step + trial_step).min(T::lit(4.0));
            let (fv, gv) = self.value_and_gradient(&k);
            f = fv;
            g = gv;
            if gain <= T::tolerance(1e-15) * (T::one() + f) {
                break;
            }
        }
        f
    }
}

/// Lower estimate of `||Phi||_diamond` for the map with Choi matrix `choi`
/// on `A (x) B`. Restart 0 starts from the maximally entangled input;
/// restart `r > 0` from a Gaussian `K` drawn with seed `seed + r`.
pub fn diamond_norm_oracle<T: Real>(
    choi: &ComplexMatrix<T>,
    dims: (usize, usize),
    cfg: &OracleConfig,
) -> Result<T> {
    let (da, db) = dims;
    if choi.shape() != (da * db, da * db) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} Choi matrix on a {da}x{db} bipartite space",
            choi.rows(),
            choi.cols()
        )));
    }
    if !choi.is_hermitian() {
        return Err(Error::NonHermitian {
            deviation: choi.hermitian_deviation().as_f64(),
        });
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidParameter("at least one restart is required".into()));
    }
    let problem = Problem { choi, dims };
    let values: Vec<T> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let k0 = if r == 0 {
                ComplexMatrix::identity(da).scale(T::one() / T::from_count(da).sqrt())
            } else {
                let raw: Vec<T> = normal_vec(&mut restart_rng(cfg.seed, r), 2 * da * da);
                let data = raw.chunks(2).map(|c| Complex::new(c[0], c[1])).collect();
                let k = ComplexMatrix::from_vec(da, da, data).expect("square sample");
                k.scale(T::one() / k.frobenius_norm())
            };
            problem.ascend(k0, cfg.max_iter)
        })
        .collect();
    Ok(values.into_iter().fold(T::zero(), |a, b| a.max(b)))
}
