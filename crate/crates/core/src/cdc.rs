//! GDS channels built from completely depolarizing subchannels.
//!
//! Block `i` maps `A_i` (`d_Ai = p^i`) to the maximally mixed state on `B_i`
//! (`d_Bi = p^(alpha - i)`), so every block has `d = p^alpha` Kraus
//! operators `E_k = |k mod d_Bi><floor(k / d_Bi)| / sqrt(d_Bi)`. The
//! subchannels carry no capacity on their own while the assembled channel
//! has `P = C = log2(n + 1)` and `Q <= log2(1 + n / sqrt(p))`.

use serde::{Deserialize, Serialize};

use crate::capacity::coherent_information;
use crate::channel::families::{diagonal_preparation, trace_out};
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::gds::{build_gds, GdsChannel};
use crate::linalg::{entropy_unchecked, ComplexMatrix, Subsystem};
use crate::scalar::{format_significant, Real};
use crate::witness::{
    absolute_value_witness, build_cdc_classical_witness, build_gds_transposition_witness,
    check_classical_witness, check_transposition_witness, offdiag_abs_infnorm, BoundCertificate,
};

/// Largest `d * d_A * d_B` (entries of the assembled Kraus list) built
/// densely.
pub const MAX_ASSEMBLED_ENTRIES: usize = 1 << 22;

/// Largest `d_A (d_A + 1)` for the joint evaluation with an erasure channel.
pub const MAX_JOINT_DIMENSION: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdcParams {
    pub p: usize,
    pub n: usize,
    pub alpha: usize,
}

impl CdcParams {
    /// Parameters with `alpha = n`.
    pub fn new(p: usize, n: usize) -> Result<Self> {
        Self::with_alpha(p, n, n)
    }

    pub fn with_alpha(p: usize, n: usize, alpha: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        if n < 1 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if alpha < n {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} is below n = {n}")));
        }
        Ok(Self { p, n, alpha })
    }

    pub fn block_count(&self) -> usize {
        self.n + 1
    }

    fn pow(&self, e: usize) -> Result<usize> {
        u32::try_from(e)
            .ok()
            .and_then(|e| self.p.checked_pow(e))
            .ok_or_else(|| Error::GuardExceeded(format!("{}^{e} overflows", self.p)))
    }

    /// `d_Ai = p^i`.
    pub fn d_a(&self, i: usize) -> Result<usize> {
        self.pow(i)
    }

    /// `d_Bi = p^(alpha - i)`.
    pub fn d_b(&self, i: usize) -> Result<usize> {
        self.pow(self.alpha - i)
    }

    /// Shared Kraus count `p^alpha`.
    pub fn kraus_count(&self) -> Result<usize> {
        self.pow(self.alpha)
    }

    pub fn dim_in(&self) -> Result<usize> {
        (0..=self.n).map(|i| self.d_a(i)).sum()
    }

    pub fn dim_out(&self) -> Result<usize> {
        (0..=self.n).map(|i| self.d_b(i)).sum()
    }

    /// Whether the assembled channel is small enough to build densely.
    pub fn fits_in_memory(&self) -> bool {
        match (self.kraus_count(), self.dim_in(), self.dim_out()) {
            (Ok(d), Ok(a), Ok(b)) => d
                .checked_mul(a)
                .and_then(|x| x.checked_mul(b))
                .is_some_and(|x| x <= MAX_ASSEMBLED_ENTRIES),
            _ => false,
        }
    }
}

/// Completely depolarizing channel `C^{d_a} -> C^{d_b}` with the `d_a d_b`
/// Kraus operators `|k mod d_b><floor(k / d_b)| / sqrt(d_b)`.
fn depolarizing_block<T: Real>(d_a: usize, d_b: usize, index: usize) -> Result<KrausChannel<T>> {
    let scale = T::one() / T::from_count(d_b).sqrt();
    let kraus = (0..d_a * d_b)
        .map(|k| ComplexMatrix::ket_bra(d_b, k % d_b, d_a, k / d_b).scale(scale))
        .collect();
    KrausChannel::new(format!("cdc_{index}"), kraus)
}

/// Builds the GDS channel of the family.
pub fn build_cdc<T: Real>(params: &CdcParams) -> Result<GdsChannel<T>> {
    if !params.fits_in_memory() {
        return Err(Error::GuardExceeded(format!(
            "p = {}, n = {}, alpha = {} is too large to assemble",
            params.p, params.n, params.alpha
        )));
    }
    let subs = (0..=params.n)
        .map(|i| depolarizing_block(params.d_a(i)?, params.d_b(i)?, i))
        .collect::<Result<Vec<_>>>()?;
    build_gds(subs)
}

/// The generalized platypus channel: block 0 prepares `diag(mu)` from a
/// one-dimensional input, block 1 discards a `d`-dimensional input and
/// outputs the one-dimensional state.
pub fn platypus<T: Real>(mu: &[T]) -> Result<GdsChannel<T>> {
    let prep = diagonal_preparation(mu)
        .ok_or_else(|| Error::InvalidParameter("mu must be a probability vector".into()))?;
    build_gds(vec![prep, trace_out(mu.len())])
}

/// Checks that `g` has the family's Kraus layout and returns
/// `(d_A, d_B)` per block.
fn family_dims<T: Real>(g: &GdsChannel<T>) -> Result<Vec<(usize, usize)>> {
    let d = g.kraus_count();
    let mut dims = Vec::with_capacity(g.block_count());
    for sub in g.subchannels() {
        let (da, db) = (sub.dim_in(), sub.dim_out());
        let scale = T::one() / T::from_count(db).sqrt();
        let ok = da * db == d
            && sub.kraus().iter().enumerate().all(|(k, e)| {
                let target = ComplexMatrix::ket_bra(db, k % db, da, k / db).scale(scale);
                (e - &target).max_abs() <= T::tolerance(1e-14)
            });
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "block {} is not a completely depolarizing block of the family",
                sub.name()
            )));
        }
        dims.push((da, db));
    }
    Ok(dims)
}

/// The sets `S_q^(r)`, `q = 0..d_ai`, partitioning `A_j` for a fixed
/// remainder `r < d_bj` when `d_bi > d_bj`:
/// `a_q = floor(((q + 1) d_bi - 1 - r) / d_bj)`, `S_0 = {0..=a_0}`,
/// `S_{q+1} = {a_q + 1..=a_{q+1}}`.
pub fn s_sets(d_bi: usize, d_bj: usize, d_ai: usize, r: usize) -> Vec<std::ops::RangeInclusive<usize>> {
    let a = |q: usize| ((q + 1) * d_bi - 1 - r) / d_bj;
    (0..d_ai)
        .map(|q| {
            let start = if q == 0 { 0 } else { a(q - 1) + 1 };
            start..=a(q)
        })
        .collect()
}

/// `||Tr_B |C_ij^{T_B}| ||_inf` from the index combinatorics of the Kraus
/// layout. `d` is the shared Kraus count.
pub fn combinatorial_infnorm(d_bi: usize, d_bj: usize, d: usize) -> f64 {
    let d_aj = d / d_bj;
    let norm = (d_bi * d_bj) as f64;
    let mut diag = vec![0.0f64; d_aj];
    if d_bi <= d_bj {
        // |C|^2 is diagonal: entry (m, b) counts k in block m of size d_bj
        // with k mod d_bi = b.
        for (m, slot) in diag.iter_mut().enumerate() {
            let mut counts = vec![0usize; d_bi];
            for k in m * d_bj..(m + 1) * d_bj {
                counts[k % d_bi] += 1;
            }
            *slot = counts.iter().map(|&c| (c as f64 / norm).sqrt()).sum();
        }
    } else {
        let d_ai = d / d_bi;
        for r in 0..d_bj {
            for set in s_sets(d_bi, d_bj, d_ai, r) {
                let size = set.clone().count();
                if size == 0 {
                    continue;
                }
                let w = 1.0 / (norm * size as f64).sqrt();
                for m in set {
                    diag[m] += w;
                }
            }
        }
    }
    diag.into_iter().fold(0.0, f64::max)
}

/// `||Tr_B |C_ij^{T_B}| ||_inf` computed numerically and combinatorially.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct InfnormPair {
    pub numeric: f64,
    pub combinatorial: f64,
}

pub fn cdc_offdiag_infnorm<T: Real>(g: &GdsChannel<T>, i: usize, j: usize) -> Result<InfnormPair> {
    let dims = family_dims(g)?;
    let numeric = offdiag_abs_infnorm(g, i, j)?.as_f64();
    let combinatorial = combinatorial_infnorm(dims[i].1, dims[j].1, g.kraus_count());
    Ok(InfnormPair { numeric, combinatorial })
}

/// Closed-form capacity bounds of the family, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdcBounds {
    pub p: usize,
    pub n: usize,
    pub alpha: usize,
    /// `log2(n + 1) / p^alpha`.
    pub q1_lower: f64,
    /// `log2(1 + n / sqrt(p))`.
    pub q_upper: f64,
    /// `P = C = log2(n + 1)`.
    pub pc_exact: f64,
}

pub fn cdc_bounds(params: &CdcParams) -> CdcBounds {
    let (p, n) = (params.p as f64, params.n as f64);
    let pc = (n + 1.0).log2();
    CdcBounds {
        p: params.p,
        n: params.n,
        alpha: params.alpha,
        q1_lower: pc / p.powf(params.alpha as f64),
        q_upper: (1.0 + n / p.sqrt()).log2(),
        pc_exact: pc,
    }
}

/// Closed-form bounds together with the certificates that back them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertifiedCdcBounds {
    pub bounds: CdcBounds,
    /// Certifies `Q <= log2 y` with the block-construction `y`, which never
    /// exceeds `1 + n / sqrt(p)`.
    pub q_certificate: BoundCertificate,
    /// Certifies `C <= log2(n + 1)`.
    pub c_certificate: BoundCertificate,
}

/// Builds the channel and checks both witnesses.
pub fn certified_cdc_bounds<T: Real>(params: &CdcParams) -> Result<CertifiedCdcBounds> {
    let g = build_cdc::<T>(params)?;
    let subs: Vec<_> = g.subchannels().iter().map(absolute_value_witness).collect();
    let qw = build_gds_transposition_witness(&g, &subs)?;
    let q_certificate = check_transposition_witness(g.assembled(), &qw)?;
    let cw = build_cdc_classical_witness(&g)?;
    let c_certificate = check_classical_witness(g.assembled(), &cw)?;
    Ok(CertifiedCdcBounds {
        bounds: cdc_bounds(params),
        q_certificate,
        c_certificate,
    })
}

/// Erasure channel `rho -> (1 - lambda) rho + lambda Tr(rho) |e><e|` on
/// `C^dim`, with the flag `|e> = |dim>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureParams {
    pub lambda: f64,
    pub dim: usize,
}

pub fn build_erasure<T: Real>(params: &ErasureParams) -> Result<KrausChannel<T>> {
    let ErasureParams { lambda, dim } = *params;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("erasure probability {lambda} outside [0, 1]")));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("erasure dimension must be positive".into()));
    }
    let keep = T::lit(1.0 - lambda).sqrt();
    let flag = T::lit(lambda).sqrt();
    let mut embed = ComplexMatrix::zeros(dim + 1, dim);
    for i in 0..dim {
        embed[(i, i)] = num_complex::Complex::new(keep, T::zero());
    }
    let mut kraus = vec![embed];
    kraus.extend((0..dim).map(|i| ComplexMatrix::ket_bra(dim + 1, dim, dim, i).scale(flag)));
    KrausChannel::new(format!("erasure({lambda})"), kraus)
}

/// `Q(E_lambda) = max((1 - 2 lambda) log2 d, 0)`.
pub fn erasure_quantum_capacity(lambda: f64, dim: usize) -> f64 {
    ((1.0 - 2.0 * lambda) * (dim as f64).log2()).max(0.0)
}

/// The state `(1/(n+1)) sum_i |Phi_i><Phi_i|` on `A (x) A'`, where `Phi_i`
/// is maximally entangled between `A_i` and its mirror `A'_i`.
pub fn block_entangled_state<T: Real>(g: &GdsChannel<T>) -> ComplexMatrix<T> {
    let blocks = g.in_blocks();
    let da = blocks.total();
    let mut omega = ComplexMatrix::zeros(da * da, da * da);
    let w = T::one() / T::from_count(blocks.len());
    for i in 0..blocks.len() {
        let amp = w / T::from_count(blocks.size(i));
        for s in blocks.range(i) {
            for t in blocks.range(i) {
                omega[(s * da + s, t * da + t)] = num_complex::Complex::new(amp, T::zero());
            }
        }
    }
    omega
}

/// `I_c(omega, N (x) E_lambda)` for the block-entangled state, with the
/// erasure channel acting on all of `A'`.
pub fn joint_coherent_information<T: Real>(params: &CdcParams, lambda: f64) -> Result<T> {
    let da = params.dim_in()?;
    if da.saturating_mul(da + 1) > MAX_JOINT_DIMENSION {
        return Err(Error::GuardExceeded(format!(
            "joint evaluation needs d_A (d_A + 1) = {} > {MAX_JOINT_DIMENSION}",
            da.saturating_mul(da + 1)
        )));
    }
    let g = build_cdc::<T>(params)?;
    joint_coherent_information_for(&g, lambda)
}

/// As [`joint_coherent_information`] for any GDS channel.
pub fn joint_coherent_information_for<T: Real>(g: &GdsChannel<T>, lambda: f64) -> Result<T> {
    let da = g.dim_in();
    let erasure = build_erasure::<T>(&ErasureParams { lambda, dim: da })?;
    let omega = block_entangled_state(g);
    let n = g.assembled();
    let out = n.apply_on(&omega, (da, da), Subsystem::First)?;
    let out = erasure.apply_on(&out, (n.dim_out(), da), Subsystem::Second)?;
    let nc = n.complement();
    let env = nc.apply_on(&omega, (da, da), Subsystem::First)?;
    let env = erasure.complement().apply_on(&env, (nc.dim_out(), da), Subsystem::Second)?;
    Ok(entropy_unchecked(&out) - entropy_unchecked(&env))
}

/// Supremum of `lambda >= 1/2` with `(1 - lambda) log2(n + 1) > q_upper`:
/// `1 - log2(1 + n/sqrt(p)) / log2(n + 1)`.
pub fn superadditivity_max_lambda(params: &CdcParams) -> Result<f64> {
    let b = cdc_bounds(params);
    lambda_max_from(b.q_upper, b.pc_exact)
}

fn lambda_max_from(q_upper: f64, pc: f64) -> Result<f64> {
    let lambda = 1.0 - q_upper / pc;
    if lambda > 0.5 {
        Ok(lambda.min(1.0))
    } else {
        Err(Error::NoSuperadditivityWindow { q_upper })
    }
}

/// Superadditivity check of `N (x) E_lambda` against the certified bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuperadditivityReport {
    pub p: usize,
    pub n: usize,
    pub lambda: f64,
    /// `(1 - lambda) log2(n + 1)`.
    pub joint_closed_form: f64,
    /// Numerical `I_c` of the joint channel, absent when the size guard
    /// prevents the evaluation.
    pub joint_numeric: Option<f64>,
    pub q_upper: f64,
    pub erasure_capacity: f64,
    /// `q_upper + Q(E_lambda)`.
    pub bound_sum: f64,
    /// `joint - bound_sum`, using the numerical value when present.
    pub margin: f64,
    pub certified: bool,
    pub closed_form_only: bool,
}

pub fn superadditivity_report(params: &CdcParams, lambda: f64) -> Result<SuperadditivityReport> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("erasure probability {lambda} outside [0, 1]")));
    }
    let b = cdc_bounds(params);
    let joint_numeric = match joint_coherent_information::<f64>(params, lambda) {
        Ok(v) => Some(v),
        Err(Error::GuardExceeded(_)) => None,
        Err(e) => return Err(e),
    };
    let joint_closed_form = (1.0 - lambda) * b.pc_exact;
    let da = params.dim_in().unwrap_or(usize::MAX);
    let erasure_capacity = erasure_quantum_capacity(lambda, da);
    let bound_sum = b.q_upper + erasure_capacity;
    let joint = joint_numeric.unwrap_or(joint_closed_form);
    let margin = joint - bound_sum;
    Ok(SuperadditivityReport {
        p: params.p,
        n: params.n,
        lambda,
        joint_closed_form,
        joint_numeric,
        q_upper: b.q_upper,
        erasure_capacity,
        bound_sum,
        margin,
        certified: margin > 0.0,
        closed_form_only: joint_numeric.is_none(),
    })
}

/// One row of the bound-versus-`n` table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub n: usize,
    pub p: usize,
    pub q_upper_bits: f64,
    pub private_bits: f64,
    /// `private_bits - q_upper_bits`.
    pub gap_bits: f64,
    /// Absent when no `lambda >= 1/2` window is certified.
    pub lambda_max: Option<f64>,
}

/// Rows for `n` in `n_range` with `p = p_rule(n)`. A rule value of 1 gives
/// the degenerate row `q_upper = log2(1 + n)` with no window.
pub fn fig1_data<F>(p_rule: F, n_range: std::ops::RangeInclusive<usize>) -> Result<Vec<Fig1Row>>
where
    F: Fn(usize) -> Result<usize>,
{
    let mut rows = Vec::new();
    for n in n_range {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let p = p_rule(n)?;
        if p == 0 {
            return Err(Error::InvalidParameter(format!("rule gives p = 0 at n = {n}")));
        }
        let q_upper = (1.0 + n as f64 / (p as f64).sqrt()).log2();
        let private = ((n + 1) as f64).log2();
        rows.push(Fig1Row {
            n,
            p,
            q_upper_bits: q_upper,
            private_bits: private,
            gap_bits: private - q_upper,
            lambda_max: lambda_max_from(q_upper, private).ok(),
        });
    }
    Ok(rows)
}

fn csv_table(header: &str, rows: &[Fig1Row], fields: impl Fn(&Fig1Row) -> Vec<Option<f64>>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        let cells: Vec<String> = fields(r)
            .into_iter()
            .map(|v| v.map(|x| format_significant(x, 12)).unwrap_or_default())
            .collect();
        out.push_str(&format!("{},{},{}\n", r.n, r.p, cells.join(",")));
    }
    out
}

/// CSV with header `n,p,q_upper_bits,private_bits,gap_bits,lambda_max`, 12
/// significant digits, LF line endings; an empty `lambda_max` field marks a
/// row without a window.
pub fn fig1_csv(rows: &[Fig1Row]) -> String {
    csv_table("n,p,q_upper_bits,private_bits,gap_bits,lambda_max", rows, |r| {
        vec![Some(r.q_upper_bits), Some(r.private_bits), Some(r.gap_bits), r.lambda_max]
    })
}

/// The capacity columns only: `n,p,q_upper_bits,private_bits,gap_bits`.
pub fn fig1_left_csv(rows: &[Fig1Row]) -> String {
    csv_table("n,p,q_upper_bits,private_bits,gap_bits", rows, |r| {
        vec![Some(r.q_upper_bits), Some(r.private_bits), Some(r.gap_bits)]
    })
}

/// The erasure window only: `n,p,lambda_max`.
pub fn fig1_right_csv(rows: &[Fig1Row]) -> String {
    csv_table("n,p,lambda_max", rows, |r| vec![r.lambda_max])
}

/// Coherent information of the block-uniform mixture of maximally mixed
/// blocks.
pub fn uniform_block_coherent_information<T: Real>(g: &GdsChannel<T>) -> Result<T> {
    let nb = g.block_count();
    let blocks: Vec<ComplexMatrix<T>> = g
        .subchannels()
        .iter()
        .map(|s| ComplexMatrix::identity(s.dim_in()).scale(T::one() / T::from_count(s.dim_in() * nb)))
        .collect();
    coherent_information(g.assembled(), &crate::linalg::direct_sum(&blocks))
}
