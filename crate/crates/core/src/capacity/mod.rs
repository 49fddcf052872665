//! Entropic quantities, the coherent-information optimizer for GDS channels
//! and the analytic one-shot bounds built on top of them.
//!
//! All logarithms are base 2.

mod bounds;
mod optimize;

pub use bounds::{
    concavity_bounds, c1_lower_bound_gds, direct_sum_capacities, p1_lower_bound_gds,
    q1_lower_bound_gds, q1_upper_bound_equal, CapacityKind, ConcavityBounds, Q1LowerBound,
    Q1UpperBound, DEFAULT_CONCAVITY_PREFACTOR,
};
pub use optimize::{
    maximize_coherent_information, maximize_coherent_information_gds, CoherentObjective,
    OptimizationResult, OptimizerConfig,
};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{direct_sum, entropy_unchecked, trace_norm, validate_density, ComplexMatrix};
use crate::scalar::{xlog2x, Real};

/// Binary entropy `H_b(p)` in bits.
pub fn binary_entropy<T: Real>(p: T) -> T {
    -(xlog2x(p) + xlog2x(T::one() - p))
}

/// Shannon entropy in bits of a probability vector.
pub fn shannon_entropy<T: Real>(p: &[T]) -> T {
    -p.iter().map(|&x| xlog2x(x)).sum::<T>()
}

fn validate_probabilities<T: Real>(probs: &[T]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidState("empty probability vector".into()));
    }
    if probs.iter().any(|&p| !(p >= T::zero())) {
        return Err(Error::InvalidState("negative probability".into()));
    }
    let total: T = probs.iter().copied().sum();
    if (total - T::one()).abs() > T::tolerance(1e-9) {
        return Err(Error::InvalidState(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// Finite ensemble `{p_i, rho_i}` of density matrices of one dimension.
#[derive(Clone, Debug)]
pub struct Ensemble<T> {
    probs: Vec<T>,
    states: Vec<ComplexMatrix<T>>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(probs: Vec<T>, states: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if probs.len() != states.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        validate_probabilities(&probs)?;
        let d = states[0].rows();
        for s in &states {
            if s.shape() != (d, d) {
                return Err(Error::DimensionMismatch("ensemble states differ in dimension".into()));
            }
            validate_density(s)?;
        }
        Ok(Self { probs, states })
    }

    /// Single-state ensemble.
    pub fn point(state: ComplexMatrix<T>) -> Result<Self> {
        Self::new(vec![T::one()], vec![state])
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn states(&self) -> &[ComplexMatrix<T>] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].rows()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `sum_i p_i rho_i`.
    pub fn average(&self) -> ComplexMatrix<T> {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (p, s) in self.probs.iter().zip(&self.states) {
            out += &s.scale(*p);
        }
        out
    }

    /// Pushes every state through `ch`.
    pub fn through(&self, ch: &KrausChannel<T>) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|s| ch.apply(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            probs: self.probs.clone(),
            states,
        })
    }
}

/// Block-diagonal input `(+)_i p_i rho_i`.
#[derive(Clone, Debug)]
pub struct BlockDiagState<T> {
    pub probs: Vec<T>,
    pub states: Vec<ComplexMatrix<T>>,
}

impl<T: Real> BlockDiagState<T> {
    pub fn new(probs: Vec<T>, states: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if probs.len() != states.len() {
            return Err(Error::DimensionMismatch("one probability per block expected".into()));
        }
        validate_probabilities(&probs)?;
        for s in &states {
            validate_density(s)?;
        }
        Ok(Self { probs, states })
    }

    /// The assembled density matrix.
    pub fn assemble(&self) -> ComplexMatrix<T> {
        let blocks: Vec<ComplexMatrix<T>> = self
            .probs
            .iter()
            .zip(&self.states)
            .map(|(p, s)| s.scale(*p))
            .collect();
        direct_sum(&blocks)
    }
}

/// `I_c(rho, N) = S(N(rho)) - S(N^c(rho))`.
pub fn coherent_information<T: Real>(ch: &KrausChannel<T>, rho: &ComplexMatrix<T>) -> Result<T> {
    validate_density(rho)?;
    let out = ch.apply(rho)?;
    let env = ch.complement_apply(rho)?;
    Ok(entropy_unchecked(&out) - entropy_unchecked(&env))
}

/// Holevo quantity `S(sum p_i rho_i) - sum p_i S(rho_i)`, after pushing the
/// states through `ch` when given.
pub fn holevo_chi<T: Real>(ens: &Ensemble<T>, ch: Option<&KrausChannel<T>>) -> Result<T> {
    let image;
    let ens = match ch {
        Some(ch) => {
            image = ens.through(ch)?;
            &image
        }
        None => ens,
    };
    let mix = entropy_unchecked(&ens.average());
    let parts: T = ens
        .probs
        .iter()
        .zip(&ens.states)
        .map(|(p, s)| *p * entropy_unchecked(s))
        .sum();
    Ok((mix - parts).max(T::zero()))
}

/// `I_p = I_c(sum p_i rho_i) - sum p_i I_c(rho_i)`.
pub fn private_information<T: Real>(ens: &Ensemble<T>, ch: &KrausChannel<T>) -> Result<T> {
    let mut value = coherent_information(ch, &ens.average())?;
    for (p, s) in ens.probs.iter().zip(&ens.states) {
        value -= *p * coherent_information(ch, s)?;
    }
    Ok(value)
}

/// Largest pairwise trace distance `max ||a - b||_1`.
pub(crate) fn max_pairwise_trace_distance<T: Real>(states: &[ComplexMatrix<T>]) -> T {
    let mut best = T::zero();
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            best = best.max(trace_norm(&(&states[i] - &states[j])));
        }
    }
    best
}
