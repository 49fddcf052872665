//! Unconstrained smooth maximization (L-BFGS with backtracking) and the
//! state parametrizations used by the capacity searches.

use std::collections::VecDeque;

use num_complex::Complex;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// Settings for [`lbfgs_maximize`].
#[derive(Clone, Copy, Debug)]
pub struct LbfgsConfig<T> {
    pub max_iter: usize,
    pub memory: usize,
    /// Stop once the per-iteration improvement stays below this for
    /// `patience` consecutive iterations.
    pub tol: T,
    pub patience: usize,
    /// Stop once the gradient norm drops below this.
    pub grad_tol: T,
}

impl<T: Real> Default for LbfgsConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            memory: 12,
            tol: T::tolerance(1e-9),
            patience: 3,
            grad_tol: T::tolerance(1e-10),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsOutcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub converged: bool,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Maximizes a smooth function given value and gradient.
pub fn lbfgs_maximize<T: Real>(
    mut f: impl FnMut(&[T]) -> (T, Vec<T>),
    x0: Vec<T>,
    cfg: &LbfgsConfig<T>,
) -> LbfgsOutcome<T> {
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    if n == 0 {
        return LbfgsOutcome {
            x,
            value: fx,
            grad_norm: T::zero(),
            iterations: 0,
            converged: true,
        };
    }
    let mut hist: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::new();
    let mut quiet = 0;
    let mut converged = false;
    let mut iterations = 0;
    let c1 = T::lit(1e-4);
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let gnorm = dot(&g, &g).sqrt();
        if !gnorm.is_finite() {
            break;
        }
        if gnorm <= cfg.grad_tol {
            converged = true;
            break;
        }
        // Two-loop recursion on the ascent direction.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = *rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * *yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            for qi in q.iter_mut() {
                *qi *= gamma;
            }
        } else {
            let scale = T::one() / gnorm.max(T::one());
            for qi in q.iter_mut() {
                *qi *= scale;
            }
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = *rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (*a - b) * *si;
            }
        }
        let mut dir = q;
        let mut slope = dot(&dir, &g);
        if !(slope > T::zero()) {
            hist.clear();
            dir = g.iter().map(|&v| v / gnorm.max(T::one())).collect();
            slope = dot(&dir, &g);
        }

        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<T> = x.iter().zip(&dir).map(|(a, d)| *a + step * *d).collect();
            let (fn_, gn) = f(&xn);
            if fn_.is_finite() && fn_ >= fx + c1 * step * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            step *= T::lit(0.5);
        }
        let Some((xn, fn_, gn)) = accepted else {
            converged = gnorm <= cfg.grad_tol.sqrt();
            break;
        };
        let s: Vec<T> = xn.iter().zip(&x).map(|(a, b)| *a - *b).collect();
        // Curvature pair for the minimization of -f.
        let y: Vec<T> = g.iter().zip(&gn).map(|(a, b)| *a - *b).collect();
        let sy = dot(&s, &y);
        if sy > T::epsilon() * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if hist.len() == cfg.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, T::one() / sy));
        }
        let improvement = fn_ - fx;
        x = xn;
        fx = fn_;
        g = gn;
        if improvement < cfg.tol {
            quiet += 1;
            if quiet >= cfg.patience {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let grad_norm = dot(&g, &g).sqrt();
    LbfgsOutcome {
        x,
        value: fx,
        grad_norm,
        iterations,
        converged,
    }
}

/// Deterministic generator for restart `index` under `seed`.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64))
}

/// Standard normal samples.
pub fn normal_vec<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    (0..n)
        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

/// How a density matrix on `C^dim` is parametrized by real numbers.
///
/// `Full`: `rho = L L^dag / Tr(L L^dag)` with `L` lower triangular with real
/// diagonal (`dim^2` parameters). `Pure`: `rho = v v^dag / |v|^2`
/// (`2 dim` parameters). One-dimensional blocks have no parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateShape {
    Full,
    Pure,
}

/// A parametrized density matrix.
#[derive(Clone, Copy, Debug)]
pub struct StateParam {
    pub dim: usize,
    pub shape: StateShape,
}

impl StateParam {
    pub fn len(&self) -> usize {
        if self.dim == 1 {
            return 0;
        }
        match self.shape {
            StateShape::Full => self.dim * self.dim,
            StateShape::Pure => 2 * self.dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The factor `L` (`dim x dim` or `dim x 1`).
    pub fn factor<T: Real>(&self, x: &[T]) -> ComplexMatrix<T> {
        let d = self.dim;
        if d == 1 {
            return ComplexMatrix::identity(1);
        }
        match self.shape {
            StateShape::Full => {
                let mut l = ComplexMatrix::zeros(d, d);
                let mut it = x.iter();
                for r in 0..d {
                    l[(r, r)] = Complex::new(*it.next().unwrap(), T::zero());
                    for c in 0..r {
                        let re = *it.next().unwrap();
                        let im = *it.next().unwrap();
                        l[(r, c)] = Complex::new(re, im);
                    }
                }
                l
            }
            StateShape::Pure => {
                let v: Vec<Complex<T>> = (0..d).map(|i| Complex::new(x[2 * i], x[2 * i + 1])).collect();
                ComplexMatrix::column(&v)
            }
        }
    }

    /// Density matrix and the normalization `t = Tr(L L^dag)`.
    pub fn state<T: Real>(&self, x: &[T]) -> (ComplexMatrix<T>, ComplexMatrix<T>, T) {
        let l = self.factor(x);
        let llh = l.matmul(&l.adjoint());
        let t = llh.real_trace();
        (llh.scale(T::one() / t), l, t)
    }

    /// Parameters reproducing the pure state `v` (only for `Pure`).
    pub fn pure_params<T: Real>(&self, v: &[Complex<T>]) -> Vec<T> {
        if self.dim == 1 {
            return Vec::new();
        }
        v.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    /// Parameters of the maximally mixed state (`L = I`) for `Full`.
    pub fn identity_params<T: Real>(&self) -> Vec<T> {
        let d = self.dim;
        if d == 1 {
            return Vec::new();
        }
        match self.shape {
            StateShape::Full => {
                let mut out = Vec::with_capacity(d * d);
                for r in 0..d {
                    out.push(T::one());
                    for _ in 0..r {
                        out.push(T::zero());
                        out.push(T::zero());
                    }
                }
                out
            }
            StateShape::Pure => {
                let mut out = vec![T::zero(); 2 * d];
                out[0] = T::one();
                out
            }
        }
    }

    /// Pulls a Euclidean gradient `G = df/drho` (Hermitian) back to the
    /// parameters: with `W = (2/t)(G - Tr(G rho) I) L`, the derivatives are
    /// `Re W` and `Im W` entrywise.
    pub fn pull_back<T: Real>(
        &self,
        grad_rho: &ComplexMatrix<T>,
        rho: &ComplexMatrix<T>,
        l: &ComplexMatrix<T>,
        t: T,
        out: &mut Vec<T>,
    ) {
        let d = self.dim;
        if d == 1 {
            return;
        }
        let shift = grad_rho.trace_of_product(rho).re;
        let mut g = grad_rho.clone();
        for i in 0..d {
            g[(i, i)] -= Complex::new(shift, T::zero());
        }
        let w = g.matmul(l).scale((T::one() + T::one()) / t);
        match self.shape {
            StateShape::Full => {
                for r in 0..d {
                    out.push(w[(r, r)].re);
                    for c in 0..r {
                        out.push(w[(r, c)].re);
                        out.push(w[(r, c)].im);
                    }
                }
            }
            StateShape::Pure => {
                for r in 0..d {
                    out.push(w[(r, 0)].re);
                    out.push(w[(r, 0)].im);
                }
            }
        }
    }
}

/// Softmax probabilities.
pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let m = logits.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let e: Vec<T> = logits.iter().map(|&v| (v - m).exp()).collect();
    let s: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Gradient with respect to logits from gradient with respect to the
/// probabilities: `p_k (g_k - sum_j p_j g_j)`.
pub fn softmax_pull_back<T: Real>(p: &[T], g: &[T]) -> Vec<T> {
    let mean: T = p.iter().zip(g).map(|(a, b)| *a * *b).sum();
    p.iter().zip(g).map(|(a, b)| *a * (*b - mean)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximizes_concave_quadratic() {
        let target = [1.0, -2.0, 0.5];
        let out = lbfgs_maximize(
            |x: &[f64]| {
                let v = -x.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                let g = x.iter().zip(&target).map(|(a, b)| -2.0 * (a - b)).collect();
                (v, g)
            },
            vec![0.0; 3],
            &LbfgsConfig::default(),
        );
        assert!(out.converged);
        for (a, b) in out.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rosenbrock() {
        let out = lbfgs_maximize(
            |x: &[f64]| {
                let (a, b) = (x[0], x[1]);
                let v = -((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2));
                let ga = 2.0 * (1.0 - a) + 400.0 * a * (b - a * a);
                let gb = -200.0 * (b - a * a);
                (v, vec![ga, gb])
            },
            vec![-1.2, 1.0],
            &LbfgsConfig {
                tol: 1e-15,
                grad_tol: 1e-9,
                ..LbfgsConfig::default()
            },
        );
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn state_param_round_trip() {
        let p = StateParam {
            dim: 3,
            shape: StateShape::Full,
        };
        let (rho, _, _) = p.state::<f64>(&p.identity_params());
        assert!((&rho - &ComplexMatrix::identity(3).scale(1.0 / 3.0)).max_abs() < 1e-15);
    }
}
