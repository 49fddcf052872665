//! Single-letter quantum capacity of GDS channels.
//!
//! When every subchannel is PPT (or every subchannel is antidegradable) and
//! there are pure inputs `psi_i` whose complementary outputs
//! `N_i^c(psi_i)` coincide, the capacity of the GDS channel is
//! `log2(n + 1)`, already attained by its coherent information.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::max_pairwise_trace_distance;
use crate::channel::{ChannelVerdict, KrausChannel};
use crate::error::{Error, Result};
use crate::gds::{build_gds, pad_kraus_to_common, GdsChannel};
use crate::linalg::{eigh, ComplexMatrix};
use crate::optim::{lbfgs_maximize, normal_vec, restart_rng, LbfgsConfig, StateParam, StateShape};
use crate::scalar::Real;

/// Largest pairwise trace distance accepted as a match.
pub const MATCH_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    AllAntidegradable,
    AllPpt,
    None,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingleLetterVerdict {
    pub qualifies: bool,
    pub route: Route,
    /// One pure state per block, as `[re, im]` amplitudes.
    pub matched_states: Vec<Vec<[f64; 2]>>,
    /// Largest pairwise trace distance of the complementary outputs.
    pub match_residual: f64,
    pub capacity_bits: Option<f64>,
    /// Per-block `(ppt, antidegradable)` outcomes.
    pub block_predicates: Vec<(bool, bool)>,
}

#[derive(Clone, Copy, Debug)]
pub struct MatchSearchConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for MatchSearchConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            max_iter: 1000,
        }
    }
}

fn normalize<T: Real>(v: &[Complex<T>]) -> Vec<Complex<T>> {
    let n: T = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    v.iter().map(|z| z.unscale(n)).collect()
}

fn projector<T: Real>(v: &[Complex<T>]) -> ComplexMatrix<T> {
    let col = ComplexMatrix::column(v);
    col.matmul(&col.adjoint())
}

/// Complementary outputs of pure inputs and their largest pairwise trace
/// distance.
fn match_residual<T: Real>(g: &GdsChannel<T>, states: &[Vec<Complex<T>>]) -> Result<T> {
    let outs = g
        .subchannels()
        .iter()
        .zip(states)
        .map(|(sub, v)| sub.complement_apply(&projector(&normalize(v))))
        .collect::<Result<Vec<_>>>()?;
    Ok(max_pairwise_trace_distance(&outs))
}

/// Minimizes `sum_{i<j} ||N_i^c(psi_i) - N_j^c(psi_j)||_F^2` over pure
/// inputs. Restart 0 starts every block at `|0>`.
fn search_match<T: Real>(g: &GdsChannel<T>, cfg: &MatchSearchConfig) -> Vec<Vec<Complex<T>>> {
    let params: Vec<StateParam> = g
        .subchannels()
        .iter()
        .map(|s| StateParam {
            dim: s.dim_in(),
            shape: StateShape::Pure,
        })
        .collect();
    let total: usize = params.iter().map(|p| p.len()).sum();
    let decode = |x: &[T]| {
        let mut off = 0;
        params
            .iter()
            .map(|p| {
                let st = p.state(&x[off..off + p.len()]);
                off += p.len();
                st
            })
            .collect::<Vec<_>>()
    };
    let objective = |x: &[T]| -> (T, Vec<T>) {
        let states = decode(x);
        let outs: Vec<ComplexMatrix<T>> = g
            .subchannels()
            .iter()
            .zip(&states)
            .map(|(sub, s)| sub.complement_apply(&s.0).expect("block dimensions match"))
            .collect();
        let nb = outs.len();
        let mut value = T::zero();
        let mut grads = Vec::with_capacity(nb);
        for i in 0..nb {
            let mut d = ComplexMatrix::zeros(outs[i].rows(), outs[i].cols());
            for j in 0..nb {
                if i != j {
                    let diff = &outs[i] - &outs[j];
                    if i < j {
                        value += diff.frobenius_norm().powi(2);
                    }
                    d += &diff.scale(T::lit(2.0));
                }
            }
            grads.push(d);
        }
        let mut grad = Vec::with_capacity(total);
        for (i, sub) in g.subchannels().iter().enumerate() {
            let (rho, l, t) = &states[i];
            let gi = sub.complement_adjoint(&grads[i]).hermitian_part().scale(-T::one());
            params[i].pull_back(&gi, rho, l, *t, &mut grad);
        }
        (-value, grad)
    };
    let lcfg = LbfgsConfig {
        max_iter: cfg.max_iter,
        tol: T::zero(),
        grad_tol: T::lit(1e-13),
        ..LbfgsConfig::default()
    };
    let runs: Vec<(T, Vec<T>)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let x0 = if r == 0 {
                params.iter().flat_map(|p| p.identity_params::<T>()).collect()
            } else {
                normal_vec(&mut restart_rng(cfg.seed, r), total)
            };
            let out = lbfgs_maximize(objective, x0, &lcfg);
            (out.value, out.x)
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 > runs[best].0 {
            best = i;
        }
    }
    let x = &runs[best].1;
    let mut off = 0;
    params
        .iter()
        .map(|p| {
            let l = p.factor(&x[off..off + p.len()]);
            off += p.len();
            normalize(&(0..p.dim).map(|r| l[(r, 0)]).collect::<Vec<_>>())
        })
        .collect()
}

fn route_of<T: Real>(verdicts: &[(ChannelVerdict<T>, ChannelVerdict<T>)]) -> Route {
    if verdicts.iter().all(|(ppt, _)| ppt.holds) {
        Route::AllPpt
    } else if verdicts.iter().all(|(_, anti)| anti.holds) {
        Route::AllAntidegradable
    } else {
        Route::None
    }
}

/// Checks the single-letter hypotheses. Candidate states, when given, are
/// tried first; the search runs when they are absent or do not match.
pub fn check_single_letter<T: Real>(
    g: &GdsChannel<T>,
    candidates: Option<&[Vec<Complex<T>>]>,
    cfg: &MatchSearchConfig,
) -> Result<SingleLetterVerdict> {
    let nb = g.block_count();
    let verdicts: Vec<_> = g
        .subchannels()
        .iter()
        .map(|s| (s.is_ppt(), s.is_antidegradable()))
        .collect();
    let route = route_of(&verdicts);

    let tol = T::lit(MATCH_TOLERANCE);
    let mut best: Option<(T, Vec<Vec<Complex<T>>>)> = None;
    if let Some(c) = candidates {
        if c.len() != nb {
            return Err(Error::DimensionMismatch(format!("{} candidate states for {nb} blocks", c.len())));
        }
        for (v, sub) in c.iter().zip(g.subchannels()) {
            if v.len() != sub.dim_in() || v.iter().all(|z| z.norm_sqr() == T::zero()) {
                return Err(Error::InvalidState("candidate state has the wrong dimension or is zero".into()));
            }
        }
        let states: Vec<_> = c.iter().map(|v| normalize(v)).collect();
        best = Some((match_residual(g, &states)?, states));
    }
    if best.as_ref().is_none_or(|(r, _)| *r > tol) {
        let states = search_match(g, cfg);
        let r = match_residual(g, &states)?;
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, states));
        }
    }
    let (residual, states) = best.expect("a match was evaluated");
    let qualifies = route != Route::None && residual <= tol;
    Ok(SingleLetterVerdict {
        qualifies,
        route,
        matched_states: states
            .iter()
            .map(|v| v.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect())
            .collect(),
        match_residual: residual.as_f64(),
        capacity_bits: qualifies.then(|| (nb as f64).log2()),
        block_predicates: verdicts.iter().map(|(p, a)| (p.holds, a.holds)).collect(),
    })
}

/// `Q = log2(n + 1)` for a qualifying verdict.
pub fn single_letter_capacity(verdict: &SingleLetterVerdict) -> Result<f64> {
    match (verdict.qualifies, verdict.capacity_bits) {
        (true, Some(c)) => Ok(c),
        _ => Err(Error::NotQualifying),
    }
}

/// Entanglement-breaking channel `rho -> sum_a <a|rho|a> |v_a><v_a|` whose
/// complement is the Hadamard channel `rho -> M (.) rho`, where
/// `<v_a'|v_a> = M[a, a']`. `M` must be PSD with unit diagonal.
pub fn hadamard_complement_channel<T: Real>(m: &ComplexMatrix<T>) -> Result<KrausChannel<T>> {
    if !m.is_square() || !m.is_hermitian() {
        return Err(Error::InvalidParameter("correlation matrix must be square and Hermitian".into()));
    }
    let d = m.rows();
    for a in 0..d {
        if (m[(a, a)].re - T::one()).abs() > T::tolerance(1e-12) || m[(a, a)].im.abs() > T::tolerance(1e-12) {
            return Err(Error::InvalidParameter("correlation matrix needs a unit diagonal".into()));
        }
    }
    let eig = eigh(m);
    if eig.values.first().is_some_and(|&v| v < -T::tolerance(1e-10)) {
        return Err(Error::InvalidParameter("correlation matrix is not positive semidefinite".into()));
    }
    // M = C C^dag with C = V sqrt(Lambda); v_a is row a of C.
    let c = ComplexMatrix::from_fn(d, d, |r, k| eig.vectors[(r, k)].scale(eig.values[k].max(T::zero()).sqrt()));
    let kraus = (0..d)
        .map(|a| ComplexMatrix::from_fn(d, d, |x, col| if col == a { c[(a, x)] } else { Complex::new(T::zero(), T::zero()) }))
        .collect();
    KrausChannel::new(format!("eb_hadamard({d})"), kraus)
}

/// GDS channel of the entanglement-breaking channels above, one block per
/// correlation matrix (zero-padded to a common Kraus count).
pub fn hadamard_complement_example<T: Real>(ms: &[ComplexMatrix<T>]) -> Result<GdsChannel<T>> {
    let subs = ms
        .iter()
        .map(hadamard_complement_channel)
        .collect::<Result<Vec<_>>>()?;
    build_gds(pad_kraus_to_common(&subs))
}
