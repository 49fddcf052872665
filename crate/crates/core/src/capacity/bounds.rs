//! Analytic one-shot bounds for GDS channels.

use serde::{Deserialize, Serialize};

use super::{holevo_chi, max_pairwise_trace_distance, private_information, shannon_entropy, Ensemble};
use crate::error::{Error, Result};
use crate::gds::GdsChannel;
use crate::linalg::{entropy_and_log2, entropy_unchecked, trace_norm, ComplexMatrix};
use crate::optim::{lbfgs_maximize, softmax, softmax_pull_back, LbfgsConfig};
use crate::scalar::Real;

/// Default prefactor `c` in the lower bound `chi >= c sum_i p_i ||w_i - w||_1^2`.
pub const DEFAULT_CONCAVITY_PREFACTOR: f64 = 0.5;

/// Two-sided bounds on the Holevo quantity of an ensemble.
#[derive(Clone, Copy, Debug)]
pub struct ConcavityBounds<T> {
    /// `c * sum_i p_i ||w_i - w_bar||_1^2`. Experimental: the prefactor is
    /// configurable and the default is only known to be valid in bits via
    /// Pinsker's inequality.
    pub lower: T,
    /// `H(p)/2 * max_{i,j} ||w_i - w_j||_1`.
    pub upper: T,
    pub lower_prefactor: T,
    pub lower_experimental: bool,
}

/// Concavity bounds of the von Neumann entropy for an ensemble.
pub fn concavity_bounds<T: Real>(ens: &Ensemble<T>, prefactor: T) -> ConcavityBounds<T> {
    let avg = ens.average();
    let spread: T = ens
        .probs()
        .iter()
        .zip(ens.states())
        .map(|(p, s)| {
            let d = trace_norm(&(s - &avg));
            *p * d * d
        })
        .sum();
    let upper = shannon_entropy(ens.probs()) / (T::one() + T::one())
        * max_pairwise_trace_distance(ens.states());
    ConcavityBounds {
        lower: prefactor * spread,
        upper,
        lower_prefactor: prefactor,
        lower_experimental: true,
    }
}

fn log2_sum_exp2<T: Real>(values: &[T]) -> T {
    let m = values.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let s: T = values.iter().map(|&v| (v - m).exp2()).sum();
    m + s.log2()
}

/// Lower bound on `Q^(1)` of a GDS channel from per-block optima.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Q1LowerBound<T> {
    /// `log2 sum_i 2^{Q_i} - log2(n+1)/2 * max_{i,j} ||w_i - w_j||_1`.
    pub analytic: T,
    /// `max_i Q_i`.
    pub trivial: T,
    /// `max(analytic, trivial, 0)`.
    pub value: T,
}

/// Evaluates the analytic lower bound from per-block states `rho_i` and
/// their coherent information values.
pub fn q1_lower_bound_gds<T: Real>(
    g: &GdsChannel<T>,
    per_block_optima: &[(ComplexMatrix<T>, T)],
) -> Result<Q1LowerBound<T>> {
    if per_block_optima.len() != g.block_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} block optima for {} blocks",
            per_block_optima.len(),
            g.block_count()
        )));
    }
    let omegas = per_block_optima
        .iter()
        .zip(g.subchannels())
        .map(|((rho, _), sub)| sub.complement_apply(rho))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<T> = per_block_optima.iter().map(|(_, v)| *v).collect();
    let n1 = T::from_count(g.block_count());
    let analytic =
        log2_sum_exp2(&values) - n1.log2() / (T::one() + T::one()) * max_pairwise_trace_distance(&omegas);
    let trivial = values.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    Ok(Q1LowerBound {
        analytic,
        trivial,
        value: analytic.max(trivial).max(T::zero()),
    })
}

/// Upper bound on `Q^(1)` when all blocks share the value `shared_q1`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Q1UpperBound<T> {
    /// `Q_0 + log2 sum_i 2^{-||w_i - w_bar||_1^2 / 2}`.
    pub refined: T,
    /// `log2 sum_i 2^{Q_i} = log2(n+1) + Q_0`.
    pub trivial: T,
}

/// Refined upper bound from complementary outputs of optimal block states.
/// `w_bar` is the uniform average of the supplied outputs.
pub fn q1_upper_bound_equal<T: Real>(
    g: &GdsChannel<T>,
    shared_q1: T,
    complement_outputs: &[ComplexMatrix<T>],
) -> Result<Q1UpperBound<T>> {
    let n = g.block_count();
    if complement_outputs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} complement outputs for {n} blocks",
            complement_outputs.len()
        )));
    }
    let k = g.kraus_count();
    let mut avg = ComplexMatrix::zeros(k, k);
    for w in complement_outputs {
        if w.shape() != (k, k) {
            return Err(Error::DimensionMismatch("complement output has wrong size".into()));
        }
        avg += &w.scale(T::one() / T::from_count(n));
    }
    let exps: Vec<T> = complement_outputs
        .iter()
        .map(|w| {
            let d = trace_norm(&(w - &avg));
            -d * d / (T::one() + T::one())
        })
        .collect();
    Ok(Q1UpperBound {
        refined: shared_q1 + log2_sum_exp2(&exps),
        trivial: shared_q1 + T::from_count(n).log2(),
    })
}

/// Lower bound on `P^(1)`: the private information of the ensemble
/// `{p_i q_ij, rho_ij (+) 0}` assembled from per-block ensembles, which equals
/// `H(p) + sum_i p_i I_p(E_i, N_i) - chi({p_i, N_i^c(avg_i)})`, maximized
/// over `p`.
pub fn p1_lower_bound_gds<T: Real>(g: &GdsChannel<T>, per_block: &[Ensemble<T>]) -> Result<T> {
    let nb = g.block_count();
    if per_block.len() != nb {
        return Err(Error::DimensionMismatch(format!(
            "{} ensembles for {nb} blocks",
            per_block.len()
        )));
    }
    let mut ip = Vec::with_capacity(nb);
    let mut omegas = Vec::with_capacity(nb);
    let mut s_omega = Vec::with_capacity(nb);
    for (ens, sub) in per_block.iter().zip(g.subchannels()) {
        if ens.dim() != sub.dim_in() {
            return Err(Error::DimensionMismatch("ensemble dimension differs from block".into()));
        }
        ip.push(private_information(ens, sub)?);
        let w = sub.complement_apply(&ens.average())?;
        s_omega.push(entropy_unchecked(&w));
        omegas.push(w);
    }
    let k = g.kraus_count();
    let objective = |x: &[T]| -> (T, Vec<T>) {
        let p = softmax(x);
        let mut bar = ComplexMatrix::zeros(k, k);
        for (pi, w) in p.iter().zip(&omegas) {
            bar += &w.scale(*pi);
        }
        let (s_bar, log_bar) = entropy_and_log2(&bar);
        let chi = s_bar - p.iter().zip(&s_omega).map(|(a, b)| *a * *b).sum::<T>();
        let value = shannon_entropy(&p) + p.iter().zip(&ip).map(|(a, b)| *a * *b).sum::<T>() - chi;
        let floor = T::min_positive_value();
        let dp: Vec<T> = (0..nb)
            .map(|i| {
                -p[i].max(floor).log2() + ip[i] + s_omega[i] + omegas[i].trace_of_product(&log_bar).re
            })
            .collect();
        (value, softmax_pull_back(&p, &dp))
    };
    let cfg = LbfgsConfig {
        tol: T::tolerance(1e-12),
        ..LbfgsConfig::default()
    };
    let starts = [vec![T::zero(); nb], ip.iter().map(|&v| v * T::LN_2()).collect()];
    let mut best = ip.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    for x0 in starts {
        best = best.max(lbfgs_maximize(objective, x0, &cfg).value);
    }
    Ok(best)
}

/// Lower bound on `C^(1)`: `log2 sum_i 2^{chi(E_i, N_i)}`.
pub fn c1_lower_bound_gds<T: Real>(g: &GdsChannel<T>, per_block: &[Ensemble<T>]) -> Result<T> {
    if per_block.len() != g.block_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} ensembles for {} blocks",
            per_block.len(),
            g.block_count()
        )));
    }
    let chis = per_block
        .iter()
        .zip(g.subchannels())
        .map(|(ens, sub)| holevo_chi(ens, Some(sub)))
        .collect::<Result<Vec<_>>>()?;
    Ok(log2_sum_exp2(&chis))
}

/// Which one-shot capacity a value list refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapacityKind {
    Q1,
    P1,
    C1,
}

/// One-shot capacities of a plain direct sum from its summands: the maximum
/// for `Q1`/`P1`, `log2 sum_i 2^{v_i}` for `C1`.
pub fn direct_sum_capacities<T: Real>(values: &[T], kind: CapacityKind) -> Result<T> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("no summand values".into()));
    }
    Ok(match kind {
        CapacityKind::Q1 | CapacityKind::P1 => values.iter().fold(T::neg_infinity(), |a, &b| a.max(b)),
        CapacityKind::C1 => log2_sum_exp2(values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_sum_examples() {
        assert_eq!(direct_sum_capacities(&[0.5, 0.9], CapacityKind::Q1).unwrap(), 0.9);
        assert!((direct_sum_capacities(&[1.0f64, 1.0], CapacityKind::C1).unwrap() - 2.0).abs() < 1e-15);
        let l3 = 3f64.log2();
        assert_eq!(direct_sum_capacities(&[0.0, l3], CapacityKind::P1).unwrap(), l3);
    }

    #[test]
    fn concavity_examples() {
        let e0 = ComplexMatrix::<f64>::ket_bra(2, 0, 2, 0);
        let e1 = ComplexMatrix::<f64>::ket_bra(2, 1, 2, 1);
        let ens = Ensemble::new(vec![0.5, 0.5], vec![e0.clone(), e1]).unwrap();
        let b = concavity_bounds(&ens, 0.5);
        assert!((b.upper - 1.0).abs() < 1e-12);
        let mixed = ComplexMatrix::identity(2).scale(0.5);
        let ens = Ensemble::new(vec![0.5, 0.5], vec![e0, mixed]).unwrap();
        let b = concavity_bounds(&ens, 0.5);
        let chi = holevo_chi(&ens, None).unwrap();
        assert!((b.upper - 0.5).abs() < 1e-12);
        assert!(b.lower <= chi && chi <= b.upper);
    }
}
