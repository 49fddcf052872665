//! Multi-restart maximization of the coherent information of a GDS channel
//! over block-diagonal inputs.
//!
//! For `rho = (+)_i p_i rho_i` the objective splits as
//! `H(p) + sum_i p_i S(N_i(rho_i)) - S(sum_i p_i omega_i)` with
//! `omega_i = N_i^c(rho_i)`, which needs only per-block outputs and one
//! environment-sized entropy.

use rayon::prelude::*;

use super::{coherent_information, shannon_entropy, BlockDiagState};
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::gds::{build_gds, GdsChannel};
use crate::linalg::{entropy_and_log2, ComplexMatrix};
use crate::optim::{
    lbfgs_maximize, normal_vec, restart_rng, softmax, softmax_pull_back, LbfgsConfig, StateParam,
    StateShape,
};
use crate::scalar::Real;

/// Settings for the multi-restart search.
#[derive(Clone, Copy, Debug)]
pub struct OptimizerConfig<T> {
    pub restarts: usize,
    /// Per-iteration improvement (bits) below which a run is converged.
    pub tol: T,
    pub seed: u64,
    pub max_iter: usize,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            restarts: 32,
            tol: T::tolerance(1e-9),
            seed: 0,
            max_iter: 2000,
        }
    }
}

/// Best point found by a search. `value` is recomputed from `argument` on the
/// assembled channel, so it is a certified lower bound.
#[derive(Clone, Debug)]
pub struct OptimizationResult<T> {
    pub value: T,
    pub argument: BlockDiagState<T>,
    pub restarts_used: usize,
    pub converged: bool,
    pub gradient_residual: T,
}

/// Coherent information of a GDS channel as a smooth function of
/// unconstrained parameters: block logits first, then one lower-triangular
/// factor per block of dimension above one.
pub struct CoherentObjective<'a, T> {
    g: &'a GdsChannel<T>,
    params: Vec<StateParam>,
}

struct Evaluation<T> {
    value: T,
    probs: Vec<T>,
    states: Vec<(ComplexMatrix<T>, ComplexMatrix<T>, T)>,
    grad: Option<Vec<T>>,
}

impl<'a, T: Real> CoherentObjective<'a, T> {
    pub fn new(g: &'a GdsChannel<T>) -> Self {
        let params = g
            .subchannels()
            .iter()
            .map(|s| StateParam {
                dim: s.dim_in(),
                shape: StateShape::Full,
            })
            .collect();
        Self { g, params }
    }

    /// Number of real parameters.
    pub fn dimension(&self) -> usize {
        self.g.block_count() + self.params.iter().map(|p| p.len()).sum::<usize>()
    }

    /// Parameters of the uniform mixture of maximally mixed blocks.
    pub fn center(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.g.block_count()];
        for p in &self.params {
            x.extend(p.identity_params::<T>());
        }
        x
    }

    fn evaluate_inner(&self, x: &[T], want_grad: bool) -> Evaluation<T> {
        let nb = self.g.block_count();
        let probs = softmax(&x[..nb]);
        let mut offset = nb;
        let mut states = Vec::with_capacity(nb);
        for p in &self.params {
            states.push(p.state(&x[offset..offset + p.len()]));
            offset += p.len();
        }
        let k = self.g.kraus_count();
        let mut omega_bar = ComplexMatrix::zeros(k, k);
        let mut out_entropy = Vec::with_capacity(nb);
        let mut out_logs = Vec::with_capacity(nb);
        let mut omegas = Vec::with_capacity(nb);
        for (i, sub) in self.g.subchannels().iter().enumerate() {
            let rho = &states[i].0;
            let out = sub.apply(rho).expect("block dimensions match");
            let (s, log) = entropy_and_log2(&out);
            out_entropy.push(s);
            out_logs.push(log);
            let w = sub.complement_apply(rho).expect("block dimensions match");
            omega_bar += &w.scale(probs[i]);
            omegas.push(w);
        }
        let (s_bar, log_bar) = entropy_and_log2(&omega_bar);
        let value = shannon_entropy(&probs)
            + probs.iter().zip(&out_entropy).map(|(p, s)| *p * *s).sum::<T>()
            - s_bar;
        if !want_grad {
            return Evaluation {
                value,
                probs,
                states,
                grad: None,
            };
        }

        let floor = T::min_positive_value();
        let dp: Vec<T> = (0..nb)
            .map(|i| {
                -probs[i].max(floor).log2()
                    + out_entropy[i]
                    + omegas[i].trace_of_product(&log_bar).re
            })
            .collect();
        let mut grad = softmax_pull_back(&probs, &dp);
        for (i, sub) in self.g.subchannels().iter().enumerate() {
            let (rho, l, t) = &states[i];
            if self.params[i].is_empty() {
                continue;
            }
            let mut gi = sub.complement_adjoint(&log_bar);
            gi -= &sub.apply_adjoint(&out_logs[i]);
            let gi = gi.scale(probs[i]).hermitian_part();
            self.params[i].pull_back(&gi, rho, l, *t, &mut grad);
        }
        Evaluation {
            value,
            probs,
            states,
            grad: Some(grad),
        }
    }

    pub fn value(&self, x: &[T]) -> T {
        self.evaluate_inner(x, false).value
    }

    pub fn value_and_gradient(&self, x: &[T]) -> (T, Vec<T>) {
        let e = self.evaluate_inner(x, true);
        (e.value, e.grad.expect("gradient requested"))
    }

    /// The block-diagonal state encoded by `x`.
    pub fn state(&self, x: &[T]) -> BlockDiagState<T> {
        let e = self.evaluate_inner(x, false);
        BlockDiagState {
            probs: e.probs,
            states: e.states.into_iter().map(|s| s.0).collect(),
        }
    }
}

/// Maximizes `I_c` over block-diagonal inputs with `cfg.restarts` runs.
/// Run 0 starts at the uniform mixture of maximally mixed blocks; run `r > 0`
/// starts from a Gaussian point drawn with seed `cfg.seed + r`.
pub fn maximize_coherent_information_gds<T: Real>(
    g: &GdsChannel<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<OptimizationResult<T>> {
    if cfg.restarts == 0 {
        return Err(Error::InvalidParameter("at least one restart is required".into()));
    }
    let obj = CoherentObjective::new(g);
    let lcfg = LbfgsConfig {
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        ..LbfgsConfig::default()
    };
    let runs: Vec<_> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let x0 = if r == 0 {
                obj.center()
            } else {
                normal_vec(&mut restart_rng(cfg.seed, r), obj.dimension())
            };
            lbfgs_maximize(|x| obj.value_and_gradient(x), x0, &lcfg)
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.value > runs[best].value {
            best = i;
        }
    }
    let run = &runs[best];
    let argument = obj.state(&run.x);
    let value = coherent_information(g.assembled(), &argument.assemble())?;
    Ok(OptimizationResult {
        value,
        argument,
        restarts_used: cfg.restarts,
        converged: run.converged,
        gradient_residual: run.grad_norm,
    })
}

/// Maximizes `I_c` of a plain channel (a single-block GDS channel).
pub fn maximize_coherent_information<T: Real>(
    ch: &KrausChannel<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<OptimizationResult<T>> {
    let g = build_gds(vec![ch.clone()])?;
    maximize_coherent_information_gds(&g, cfg)
}
