//! Transposition-bound certificates.
//!
//! Upper bounds are only ever established by explicit feasible points of the
//! two semidefinite programs below, checked by eigenvalues:
//!
//! * `Q <= log2 y` when `Y +- J^{T_B} >= 0` and `Tr_B Y <= y I`,
//! * `C <= log2 Tr S` when `Y +- J^{T_B} >= 0` and `I (x) S +- Y^{T_B} >= 0`,
//!
//! where `J` is the Choi matrix of the channel on `A (x) B`.

mod oracle;

pub use oracle::{diamond_norm_oracle, OracleConfig, DEFAULT_ORACLE_RESTARTS};

use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::gds::{off_diagonal_transposed_sparse, GdsChannel};
use crate::linalg::{matrix_abs, max_eigenvalue, min_eigenvalue, psd_feasible, ComplexMatrix, SparseMatrix};
use crate::scalar::Real;

/// Which construction produced a witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSource {
    /// Supplied by the caller.
    Explicit,
    /// `Y = |J^{T_B}|`.
    AbsoluteValue,
    /// Block construction with the balanced `a_ij`, `b_ij` coefficients.
    BlockConstruction,
    /// Block construction bounded through trace norms of the off-diagonal
    /// terms.
    TraceNormRelaxation,
    /// The completely depolarizing family's classical witness.
    DepolarizingFamily,
}

/// Feasible point candidate `(y, Y)` for the transposition bound.
#[derive(Clone, Debug)]
pub struct TranspositionWitness<T> {
    pub y: T,
    pub matrix: SparseMatrix<T>,
    /// `(d_A, d_B)`.
    pub dims: (usize, usize),
    pub source: WitnessSource,
}

impl<T: Real> TranspositionWitness<T> {
    pub fn new(y: T, matrix: &ComplexMatrix<T>, dims: (usize, usize)) -> Self {
        Self {
            y,
            matrix: SparseMatrix::from_dense(matrix),
            dims,
            source: WitnessSource::Explicit,
        }
    }
}

/// Feasible point candidate `(Y, S)` for the classical bound.
#[derive(Clone, Debug)]
pub struct ClassicalWitness<T> {
    pub matrix: SparseMatrix<T>,
    pub s: ComplexMatrix<T>,
    pub dims: (usize, usize),
    pub source: WitnessSource,
}

impl<T: Real> ClassicalWitness<T> {
    pub fn new(matrix: &ComplexMatrix<T>, s: ComplexMatrix<T>, dims: (usize, usize)) -> Self {
        Self {
            matrix: SparseMatrix::from_dense(matrix),
            s,
            dims,
            source: WitnessSource::Explicit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "Q_transposition")]
    QTransposition,
    #[serde(rename = "C_beta")]
    CBeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WitnessSummary {
    Transposition {
        y: f64,
    },
    Classical {
        #[serde(rename = "trace_S")]
        trace_s: f64,
    },
}

/// A bound value in bits together with the eigenvalue slacks that prove it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    pub value_bits: f64,
    pub feasible: bool,
    /// Minimum-eigenvalue slack of every constraint, in checking order.
    pub residuals: Vec<f64>,
    /// `1 +` the spectral scale of each constraint, the unit in which the
    /// `1e-9` feasibility tolerance is measured.
    pub scales: Vec<f64>,
    pub witness_summary: WitnessSummary,
    pub source: WitnessSource,
}

impl BoundCertificate {
    /// Worst residual relative to its scale.
    pub fn worst_relative_residual(&self) -> f64 {
        self.residuals
            .iter()
            .zip(&self.scales)
            .map(|(r, s)| r / s)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Smallest eigenvalue and spectral radius of a Hermitian sparse operator.
fn psd_slack<T: Real>(m: &SparseMatrix<T>) -> Result<(T, T)> {
    let dev = m.hermitian_deviation();
    if dev > T::tolerance(1e-10) * (T::one() + m.max_abs()) {
        return Err(Error::NonHermitian {
            deviation: dev.as_f64(),
        });
    }
    let vals = m.hermitian_eigenvalues();
    let lo = vals.first().copied().unwrap_or(T::zero());
    let hi = vals.last().copied().unwrap_or(T::zero());
    Ok((lo, lo.abs().max(hi.abs())))
}

fn check_dims<T: Real>(ch: &KrausChannel<T>, dims: (usize, usize), rows: usize) -> Result<()> {
    let expect = (ch.dim_in(), ch.dim_out());
    if dims != expect || rows != expect.0 * expect.1 {
        return Err(Error::DimensionMismatch(format!(
            "witness on {}x{} (matrix {rows}) for a channel {}->{}",
            dims.0, dims.1, expect.0, expect.1
        )));
    }
    Ok(())
}

/// Partial transpose on `B` of the Choi matrix, sparse.
pub fn transposed_choi_sparse<T: Real>(ch: &KrausChannel<T>) -> SparseMatrix<T> {
    ch.choi_sparse()
        .partial_transpose((ch.dim_in(), ch.dim_out()))
        .expect("bipartite Choi matrix")
}

/// Verifies a transposition witness. On success `Q(ch) <= log2 y`.
pub fn check_transposition_witness<T: Real>(
    ch: &KrausChannel<T>,
    w: &TranspositionWitness<T>,
) -> Result<BoundCertificate> {
    check_dims(ch, w.dims, w.matrix.rows())?;
    let jt = transposed_choi_sparse(ch);
    let (lo_minus, s_minus) = psd_slack(&w.matrix.sub(&jt))?;
    let (lo_plus, s_plus) = psd_slack(&w.matrix.add(&jt))?;
    let reduced = w.matrix.partial_trace_second(w.dims)?.hermitian_part();
    let cap = w.y - max_eigenvalue(&reduced)?;
    let cap_scale = w.y.abs();
    let feasible = psd_feasible(lo_minus, s_minus)
        && psd_feasible(lo_plus, s_plus)
        && psd_feasible(cap, cap_scale)
        && w.y > T::zero();
    Ok(BoundCertificate {
        kind: BoundKind::QTransposition,
        value_bits: w.y.log2().as_f64(),
        feasible,
        residuals: vec![lo_minus.as_f64(), lo_plus.as_f64(), cap.as_f64()],
        scales: vec![
            1.0 + s_minus.as_f64(),
            1.0 + s_plus.as_f64(),
            1.0 + cap_scale.as_f64(),
        ],
        witness_summary: WitnessSummary::Transposition { y: w.y.as_f64() },
        source: w.source,
    })
}

/// The witness `Y = |J^{T_B}|`, `y = lambda_max(Tr_B Y)`, always feasible.
pub fn absolute_value_witness<T: Real>(ch: &KrausChannel<T>) -> TranspositionWitness<T> {
    let dims = (ch.dim_in(), ch.dim_out());
    let matrix = transposed_choi_sparse(ch).abs();
    let reduced = matrix
        .partial_trace_second(dims)
        .expect("bipartite witness")
        .hermitian_part();
    let y = max_eigenvalue(&reduced).expect("Hermitian reduced witness");
    TranspositionWitness {
        y,
        matrix,
        dims,
        source: WitnessSource::AbsoluteValue,
    }
}

/// Where a local operator on `A_x (x) B_y` sits inside `A (x) B`.
#[derive(Clone, Copy)]
struct Placement {
    a_offset: usize,
    b_offset: usize,
    b_local: usize,
}

fn place<T: Real>(g: &GdsChannel<T>, a_block: usize, b_block: usize) -> Placement {
    Placement {
        a_offset: g.in_blocks().offset(a_block),
        b_offset: g.out_blocks().offset(b_block),
        b_local: g.out_blocks().size(b_block),
    }
}

/// Adds `scale * m` (a square operator on one local `A_x (x) B_y`) into `out`.
fn embed_square<T: Real>(out: &mut SparseMatrix<T>, m: &SparseMatrix<T>, at: Placement, db: usize, scale: T) {
    let global = |idx: usize| (at.a_offset + idx / at.b_local) * db + at.b_offset + idx % at.b_local;
    for (r, c, z) in m.iter() {
        out.add_at(global(r), global(c), z.scale(scale));
    }
}

/// `||Tr_B |X| ||_inf` for a sparse operator `X` whose columns live on a
/// bipartite space with the given dims, together with `|X|`.
fn abs_reduced_norm<T: Real>(x: &SparseMatrix<T>, col_dims: (usize, usize)) -> Result<(SparseMatrix<T>, T)> {
    let abs = x.abs();
    let reduced = abs.partial_trace_second(col_dims)?.hermitian_part();
    let norm = max_eigenvalue(&reduced)?;
    Ok((abs, norm.max(T::zero())))
}

/// `||Tr_B |C_ij^{T_B}| ||_inf`, with `|X| = sqrt(X^dag X)`; the operator
/// lives on `A_j (x) B_i`.
pub fn offdiag_abs_infnorm<T: Real>(g: &GdsChannel<T>, i: usize, j: usize) -> Result<T> {
    crate::gds::off_diagonal_choi(g, i, j)?;
    let m = off_diagonal_transposed_sparse(g, i, j);
    let dims = (g.subchannel(j).dim_in(), g.subchannel(i).dim_out());
    Ok(abs_reduced_norm(&m, dims)?.1)
}

/// Coefficients used for one block pair `i < j`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PairTerm<T> {
    pub i: usize,
    pub j: usize,
    /// `||Tr_B |C_ij^{T_B}| ||_inf`.
    pub norm_ij: T,
    /// `||Tr_B |C_ji^{T_B}| ||_inf`.
    pub norm_ji: T,
    /// `||C_ij^{T_B}||_1`.
    pub trace_norm: T,
}

/// Witness for a GDS channel assembled from witnesses of its subchannels:
/// `Y = sum_i Y_i + sum_{i<j} (b/a)|C_ij^{T_B}| + (a/b)|C_ji^{T_B}|` with
/// `a^2 = ||Tr_B|C_ij^{T_B}|||`, `b^2 = ||Tr_B|C_ji^{T_B}|||`, and
/// `y = max_i [y_i + sum_{j != i} a_ij b_ij]`.
///
/// When one of `a`, `b` vanishes while the other does not, every pair is
/// weighted equally instead and `y` uses the trace norms
/// `||C_ij^{T_B}||_1`.
pub fn build_gds_transposition_witness<T: Real>(
    g: &GdsChannel<T>,
    sub_witnesses: &[TranspositionWitness<T>],
) -> Result<TranspositionWitness<T>> {
    Ok(build_gds_transposition_witness_with_terms(g, sub_witnesses)?.0)
}

/// As [`build_gds_transposition_witness`], also returning the pair terms.
pub fn build_gds_transposition_witness_with_terms<T: Real>(
    g: &GdsChannel<T>,
    sub_witnesses: &[TranspositionWitness<T>],
) -> Result<(TranspositionWitness<T>, Vec<PairTerm<T>>)> {
    let nb = g.block_count();
    if sub_witnesses.len() != nb {
        return Err(Error::DimensionMismatch(format!(
            "{} sub-witnesses for {nb} blocks",
            sub_witnesses.len()
        )));
    }
    for (i, w) in sub_witnesses.iter().enumerate() {
        let sub = g.subchannel(i);
        check_dims(sub, w.dims, w.matrix.rows())?;
    }
    if nb == 1 {
        return Ok((sub_witnesses[0].clone(), Vec::new()));
    }

    let (da, db) = (g.dim_in(), g.dim_out());
    let mut y_mat = SparseMatrix::zeros(da * db, da * db);
    for (i, w) in sub_witnesses.iter().enumerate() {
        embed_square(&mut y_mat, &w.matrix, place(g, i, i), db, T::one());
    }

    struct Pair<T> {
        term: PairTerm<T>,
        abs_cols: SparseMatrix<T>,
        abs_rows: SparseMatrix<T>,
    }
    let mut pairs = Vec::new();
    for i in 0..nb {
        for j in (i + 1)..nb {
            let m = off_diagonal_transposed_sparse(g, i, j);
            let (dai, dbi) = (g.subchannel(i).dim_in(), g.subchannel(i).dim_out());
            let (daj, dbj) = (g.subchannel(j).dim_in(), g.subchannel(j).dim_out());
            // |C_ij^{T_B}| on A_j (x) B_i, |C_ji^{T_B}| = |(C_ij^{T_B})^dag| on A_i (x) B_j.
            let (abs_cols, norm_ij) = abs_reduced_norm(&m, (daj, dbi))?;
            let (abs_rows, norm_ji) = abs_reduced_norm(&m.adjoint(), (dai, dbj))?;
            pairs.push(Pair {
                term: PairTerm {
                    i,
                    j,
                    norm_ij,
                    norm_ji,
                    trace_norm: m.trace_norm(),
                },
                abs_cols,
                abs_rows,
            });
        }
    }

    let tiny = T::tolerance(1e-13);
    let degenerate = pairs
        .iter()
        .any(|p| (p.term.norm_ij <= tiny) != (p.term.norm_ji <= tiny));
    let mut extra = vec![T::zero(); nb];
    for p in &pairs {
        let PairTerm { i, j, norm_ij, norm_ji, trace_norm } = p.term;
        let (w_cols, w_rows, share) = if degenerate {
            (T::one(), T::one(), (trace_norm, trace_norm))
        } else if norm_ij <= tiny && norm_ji <= tiny {
            continue;
        } else {
            let (a, b) = (norm_ij.sqrt(), norm_ji.sqrt());
            (b / a, a / b, (a * b, a * b))
        };
        embed_square(&mut y_mat, &p.abs_cols, place(g, j, i), db, w_cols);
        embed_square(&mut y_mat, &p.abs_rows, place(g, i, j), db, w_rows);
        extra[i] += share.0;
        extra[j] += share.1;
    }
    let y = sub_witnesses
        .iter()
        .zip(&extra)
        .map(|(w, e)| w.y + *e)
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let source = if degenerate {
        WitnessSource::TraceNormRelaxation
    } else {
        WitnessSource::BlockConstruction
    };
    let terms = pairs.into_iter().map(|p| p.term).collect();
    Ok((
        TranspositionWitness {
            y,
            matrix: y_mat,
            dims: (da, db),
            source,
        },
        terms,
    ))
}

/// Witnesses `|J_i^{T_B}|` for every subchannel followed by the block
/// construction.
pub fn default_gds_transposition_witness<T: Real>(g: &GdsChannel<T>) -> Result<TranspositionWitness<T>> {
    let subs: Vec<_> = g.subchannels().iter().map(absolute_value_witness).collect();
    build_gds_transposition_witness(g, &subs)
}

/// Smallest eigenvalue of `(b/a)|M| + (a/b)|M^dag| -+ (M + M^dag)` over
/// both signs. Square `M` acts on one space; rectangular `M` is placed
/// off-diagonally in `rows (+) cols`.
pub fn abs_splitting_check<T: Real>(m: &ComplexMatrix<T>, a: T, b: T) -> Result<T> {
    if !(a > T::zero() && b > T::zero()) {
        return Err(Error::InvalidParameter("a and b must be positive".into()));
    }
    let abs_m = matrix_abs(m);
    let abs_md = matrix_abs(&m.adjoint());
    let (bound, sym) = if m.is_square() {
        let bound = &abs_m.scale(b / a) + &abs_md.scale(a / b);
        (bound, m + &m.adjoint())
    } else {
        let (r, c) = m.shape();
        let mut bound = ComplexMatrix::zeros(r + c, r + c);
        bound.set_block(0, 0, &abs_md.scale(a / b));
        bound.set_block(r, r, &abs_m.scale(b / a));
        let mut sym = ComplexMatrix::zeros(r + c, r + c);
        sym.set_block(0, r, m);
        sym.set_block(r, 0, &m.adjoint());
        (bound, sym)
    };
    let lo = min_eigenvalue(&(&bound - &sym).hermitian_part())?;
    let hi = min_eigenvalue(&(&bound + &sym).hermitian_part())?;
    Ok(lo.min(hi))
}

/// Verifies a classical witness. On success `C(ch) <= log2 Tr S`.
pub fn check_classical_witness<T: Real>(
    ch: &KrausChannel<T>,
    w: &ClassicalWitness<T>,
) -> Result<BoundCertificate> {
    check_dims(ch, w.dims, w.matrix.rows())?;
    let (da, db) = w.dims;
    if w.s.shape() != (db, db) {
        return Err(Error::DimensionMismatch(format!(
            "S must be {db}x{db}, got {}x{}",
            w.s.rows(),
            w.s.cols()
        )));
    }
    let jt = transposed_choi_sparse(ch);
    let (r1, s1) = psd_slack(&w.matrix.sub(&jt))?;
    let (r2, s2) = psd_slack(&w.matrix.add(&jt))?;
    let yt = w.matrix.partial_transpose(w.dims)?;
    let mut is = SparseMatrix::zeros(da * db, da * db);
    let s_sparse = SparseMatrix::from_dense(&w.s);
    for a in 0..da {
        for (b, b2, z) in s_sparse.iter() {
            is.add_at(a * db + b, a * db + b2, z);
        }
    }
    let (r3, s3) = psd_slack(&is.sub(&yt))?;
    let (r4, s4) = psd_slack(&is.add(&yt))?;
    let trace = w.s.real_trace();
    let feasible = [(r1, s1), (r2, s2), (r3, s3), (r4, s4)]
        .iter()
        .all(|&(r, s)| psd_feasible(r, s))
        && trace > T::zero();
    Ok(BoundCertificate {
        kind: BoundKind::CBeta,
        value_bits: trace.log2().as_f64(),
        feasible,
        residuals: [r1, r2, r3, r4].iter().map(|r| r.as_f64()).collect(),
        scales: [s1, s2, s3, s4].iter().map(|s| 1.0 + s.as_f64()).collect(),
        witness_summary: WitnessSummary::Classical {
            trace_s: trace.as_f64(),
        },
        source: w.source,
    })
}

/// True when every subchannel sends all inputs to its maximally mixed
/// output, i.e. its Choi matrix is `I (x) I / d_B`.
pub fn is_completely_depolarizing_family<T: Real>(g: &GdsChannel<T>) -> bool {
    g.subchannels().iter().all(|sub| {
        let n = sub.dim_in() * sub.dim_out();
        let target = ComplexMatrix::identity(n).scale(T::one() / T::from_count(sub.dim_out()));
        (&sub.choi() - &target).max_abs() <= T::tolerance(1e-12)
    })
}

/// Classical witness for a GDS channel of completely depolarizing
/// subchannels: `Y = sum_i I/d_Bi + sum_{i<j} |C_ij^{T_B}| + |C_ji^{T_B}|`
/// and `S = (+)_i I_Bi / d_Bi`, so `Tr S = n + 1`.
pub fn build_cdc_classical_witness<T: Real>(g: &GdsChannel<T>) -> Result<ClassicalWitness<T>> {
    if !is_completely_depolarizing_family(g) {
        return Err(Error::InvalidParameter(
            "classical witness needs completely depolarizing subchannels".into(),
        ));
    }
    let nb = g.block_count();
    let (da, db) = (g.dim_in(), g.dim_out());
    let mut y = SparseMatrix::zeros(da * db, da * db);
    for i in 0..nb {
        let sub = g.subchannel(i);
        let n = sub.dim_in() * sub.dim_out();
        let diag = vec![T::one() / T::from_count(sub.dim_out()); n];
        embed_square(&mut y, &SparseMatrix::from_diagonal(&diag), place(g, i, i), db, T::one());
    }
    for i in 0..nb {
        for j in (i + 1)..nb {
            let m = off_diagonal_transposed_sparse(g, i, j);
            embed_square(&mut y, &m.abs(), place(g, j, i), db, T::one());
            embed_square(&mut y, &m.adjoint().abs(), place(g, i, j), db, T::one());
        }
    }
    let s_diag: Vec<T> = g
        .subchannels()
        .iter()
        .flat_map(|sub| {
            let d = sub.dim_out();
            std::iter::repeat_n(T::one() / T::from_count(d), d)
        })
        .collect();
    Ok(ClassicalWitness {
        matrix: y,
        s: ComplexMatrix::from_diagonal(&s_diag),
        dims: (da, db),
        source: WitnessSource::DepolarizingFamily,
    })
}
