//! Generalized direct sum (GDS) channels.
//!
//! Subchannels `N_i : A_i -> B_i` sharing a Kraus index combine into one
//! channel on `A = (+)_i A_i` with Kraus operators `E_k = (+)_i E_k^{(i)}`.
//! The output keeps the off-diagonal maps
//! `M_ij(X) = sum_k E_k^{(i)} X E_k^{(j) dag}`, and the complement only sees
//! the diagonal input blocks: `N^c(O) = sum_i N_i^c(O_ii)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSpec, ChannelVerdict, KrausChannel, Predicate};
use crate::error::{Error, Result};
use crate::linalg::{direct_sum, BlockStructure, ComplexMatrix, SparseMatrix};
use crate::scalar::Real;

/// A GDS channel together with its subchannels and block structures.
#[derive(Clone, Debug)]
pub struct GdsChannel<T> {
    subchannels: Vec<KrausChannel<T>>,
    in_blocks: BlockStructure,
    out_blocks: BlockStructure,
    assembled: KrausChannel<T>,
}

/// Choi matrix of an off-diagonal map `M_ij`, an operator from
/// `A_j (x) B_j` to `A_i (x) B_i`:
/// `C_ij[(s, b), (t, b')] = sum_k E^{(i)}_k[b, s] conj(E^{(j)}_k[b', t])`.
#[derive(Clone, Debug)]
pub struct OffDiagonalMap<T> {
    pub i: usize,
    pub j: usize,
    pub choi: ComplexMatrix<T>,
    /// `(d_Ai, d_Bi, d_Aj, d_Bj)`.
    pub dims: (usize, usize, usize, usize),
}

impl<T: Real> OffDiagonalMap<T> {
    /// Partial transpose on the output factors, an operator from
    /// `A_j (x) B_i` to `A_i (x) B_j`.
    pub fn partial_transpose(&self) -> ComplexMatrix<T> {
        let (dai, dbi, daj, dbj) = self.dims;
        ComplexMatrix::from_fn(dai * dbj, daj * dbi, |r, c| {
            let (s, b2) = (r / dbj, r % dbj);
            let (t, b) = (c / dbi, c % dbi);
            self.choi[(s * dbi + b, t * dbj + b2)]
        })
    }

    /// Applies `M_ij` to an operator `X : A_j -> A_i`.
    pub fn apply(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let (dai, dbi, daj, dbj) = self.dims;
        if x.shape() != (dai, daj) {
            return Err(Error::DimensionMismatch(format!(
                "off-diagonal map {}{} expects a {dai}x{daj} input",
                self.i, self.j
            )));
        }
        // M(X)[b, b'] = sum_{s,t} X[s, t] C[(s,b),(t,b')].
        Ok(ComplexMatrix::from_fn(dbi, dbj, |b, b2| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for s in 0..dai {
                for t in 0..daj {
                    acc += x[(s, t)] * self.choi[(s * dbi + b, t * dbj + b2)];
                }
            }
            acc
        }))
    }
}

/// Result of checking whether a channel has GDS block structure.
#[derive(Clone, Debug)]
pub struct BlockValidation<T> {
    pub valid: bool,
    /// Extracted subchannels, present when `valid`.
    pub subchannels: Option<Vec<KrausChannel<T>>>,
    /// First offending `(kraus, input_block, output_block)`.
    pub offending: Option<(usize, usize, usize)>,
}

impl<T: Real> GdsChannel<T> {
    pub fn subchannels(&self) -> &[KrausChannel<T>] {
        &self.subchannels
    }

    pub fn subchannel(&self, i: usize) -> &KrausChannel<T> {
        &self.subchannels[i]
    }

    pub fn in_blocks(&self) -> &BlockStructure {
        &self.in_blocks
    }

    pub fn out_blocks(&self) -> &BlockStructure {
        &self.out_blocks
    }

    pub fn assembled(&self) -> &KrausChannel<T> {
        &self.assembled
    }

    /// Number of blocks `n + 1`.
    pub fn block_count(&self) -> usize {
        self.subchannels.len()
    }

    /// Shared Kraus count, also the environment dimension.
    pub fn kraus_count(&self) -> usize {
        self.assembled.kraus_count()
    }

    pub fn dim_in(&self) -> usize {
        self.in_blocks.total()
    }

    pub fn dim_out(&self) -> usize {
        self.out_blocks.total()
    }

    /// Diagonal block `i` of an operator on the input space.
    pub fn input_block(&self, rho: &ComplexMatrix<T>, i: usize) -> ComplexMatrix<T> {
        let r = self.in_blocks.range(i);
        rho.submatrix(r.start, r.start, r.len(), r.len())
    }

    pub fn to_spec(&self) -> GdsSpec {
        GdsSpec {
            subchannels: self.subchannels.iter().map(ChannelSpec::from_channel).collect(),
        }
    }
}

/// Assembles a GDS channel. All subchannels must have the same number of
/// Kraus operators; pad explicitly with [`pad_kraus_to`] otherwise.
pub fn build_gds<T: Real>(subchannels: Vec<KrausChannel<T>>) -> Result<GdsChannel<T>> {
    if subchannels.is_empty() {
        return Err(Error::InvalidParameter("no subchannels".into()));
    }
    let counts: Vec<usize> = subchannels.iter().map(|c| c.kraus_count()).collect();
    if counts.iter().any(|&c| c != counts[0]) {
        return Err(Error::UnequalKrausCounts { counts });
    }
    let in_blocks = BlockStructure::new(subchannels.iter().map(|c| c.dim_in()).collect())?;
    let out_blocks = BlockStructure::new(subchannels.iter().map(|c| c.dim_out()).collect())?;
    let kraus = (0..counts[0])
        .map(|k| {
            let blocks: Vec<ComplexMatrix<T>> =
                subchannels.iter().map(|c| c.kraus()[k].clone()).collect();
            direct_sum(&blocks)
        })
        .collect();
    let name = format!(
        "gds({})",
        subchannels
            .iter()
            .map(|c| c.name())
            .collect::<Vec<_>>()
            .join(", ")
    );
    let assembled = KrausChannel::new(name, kraus)?;
    Ok(GdsChannel {
        subchannels,
        in_blocks,
        out_blocks,
        assembled,
    })
}

/// Zero-pads every subchannel to the largest Kraus count.
pub fn pad_kraus_to_common<T: Real>(subchannels: &[KrausChannel<T>]) -> Vec<KrausChannel<T>> {
    let count = subchannels.iter().map(|c| c.kraus_count()).max().unwrap_or(0);
    subchannels
        .iter()
        .map(|c| c.pad_kraus_to(count).expect("count is the maximum"))
        .collect()
}

/// Zero-pads one channel's Kraus list to `count` operators.
pub fn pad_kraus_to<T: Real>(ch: &KrausChannel<T>, count: usize) -> Result<KrausChannel<T>> {
    ch.pad_kraus_to(count)
}

/// Checks whether every Kraus operator of `ch` is block diagonal with respect
/// to the given input and output structures.
pub fn validate_block_structure<T: Real>(
    ch: &KrausChannel<T>,
    in_blocks: &BlockStructure,
    out_blocks: &BlockStructure,
) -> Result<BlockValidation<T>> {
    if in_blocks.total() != ch.dim_in() || out_blocks.total() != ch.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "block structures cover {}->{} but the channel maps {}->{}",
            in_blocks.total(),
            out_blocks.total(),
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    if in_blocks.len() != out_blocks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} input blocks but {} output blocks",
            in_blocks.len(),
            out_blocks.len()
        )));
    }
    for (k, e) in ch.kraus().iter().enumerate() {
        for (r, c, _) in crate::channel::nonzeros(e) {
            let out = out_blocks.block_of(r).expect("row in range");
            let inp = in_blocks.block_of(c).expect("column in range");
            if out != inp {
                return Ok(BlockValidation {
                    valid: false,
                    subchannels: None,
                    offending: Some((k, inp, out)),
                });
            }
        }
    }
    let subs = (0..in_blocks.len())
        .map(|i| {
            let (ri, ci) = (out_blocks.range(i), in_blocks.range(i));
            let kraus = ch
                .kraus()
                .iter()
                .map(|e| e.submatrix(ri.start, ci.start, ri.len(), ci.len()))
                .collect();
            KrausChannel::new(format!("{}[{i}]", ch.name()), kraus)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockValidation {
        valid: true,
        subchannels: Some(subs),
        offending: None,
    })
}

/// Complementary output `sum_i N_i^c(rho_ii)`.
pub fn gds_complement_apply<T: Real>(
    g: &GdsChannel<T>,
    rho: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    if rho.shape() != (g.dim_in(), g.dim_in()) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} input to a GDS channel on dimension {}",
            rho.rows(),
            rho.cols(),
            g.dim_in()
        )));
    }
    let k = g.kraus_count();
    let mut out = ComplexMatrix::zeros(k, k);
    for (i, sub) in g.subchannels.iter().enumerate() {
        out += &sub.complement_apply(&g.input_block(rho, i))?;
    }
    Ok(out)
}

/// Choi matrix of the off-diagonal map `M_ij`, `i != j`.
pub fn off_diagonal_choi<T: Real>(g: &GdsChannel<T>, i: usize, j: usize) -> Result<OffDiagonalMap<T>> {
    let n = g.block_count();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidParameter(format!(
            "off-diagonal map needs distinct block indices below {n}, got ({i}, {j})"
        )));
    }
    let (ni, nj) = (&g.subchannels[i], &g.subchannels[j]);
    let (dai, dbi, daj, dbj) = (ni.dim_in(), ni.dim_out(), nj.dim_in(), nj.dim_out());
    let mut choi = ComplexMatrix::zeros(dai * dbi, daj * dbj);
    for (ei, ej) in ni.kraus().iter().zip(nj.kraus()) {
        let nzi = crate::channel::nonzeros(ei);
        let nzj = crate::channel::nonzeros(ej);
        for &(b, s, x) in &nzi {
            for &(b2, t, y) in &nzj {
                choi[(s * dbi + b, t * dbj + b2)] += x * y.conj();
            }
        }
    }
    Ok(OffDiagonalMap {
        i,
        j,
        choi,
        dims: (dai, dbi, daj, dbj),
    })
}

/// Partial transpose of `C_ij` as a sparse operator from `A_j (x) B_i` to
/// `A_i (x) B_j`, built from the nonzero Kraus entries.
pub(crate) fn off_diagonal_transposed_sparse<T: Real>(
    g: &GdsChannel<T>,
    i: usize,
    j: usize,
) -> SparseMatrix<T> {
    let (ni, nj) = (&g.subchannels[i], &g.subchannels[j]);
    let (dai, dbi, daj, dbj) = (ni.dim_in(), ni.dim_out(), nj.dim_in(), nj.dim_out());
    let mut out = SparseMatrix::zeros(dai * dbj, daj * dbi);
    for (ei, ej) in ni.kraus().iter().zip(nj.kraus()) {
        let nzi = crate::channel::nonzeros(ei);
        let nzj = crate::channel::nonzeros(ej);
        for &(b, s, x) in &nzi {
            for &(b2, t, y) in &nzj {
                out.add_at(s * dbj + b2, t * dbi + b, x * y.conj());
            }
        }
    }
    out
}

/// Degradability of a GDS channel: it holds exactly when every subchannel is
/// degradable, and the degrading map is `W(R) = sum_i W_i(R_ii)`.
pub fn gds_is_degradable<T: Real>(g: &GdsChannel<T>) -> ChannelVerdict<T> {
    let verdicts: Vec<ChannelVerdict<T>> = g.subchannels.iter().map(|s| s.is_degradable()).collect();
    let holds = verdicts.iter().all(|v| v.holds);
    let residual = verdicts
        .iter()
        .fold(T::zero(), |m, v| m.max(v.residual));
    let witness = holds.then(|| {
        let (db, de) = (g.dim_out(), g.kraus_count());
        let mut w = ComplexMatrix::zeros(db * de, db * de);
        for (i, v) in verdicts.iter().enumerate() {
            let wi = v.witness.as_ref().expect("holding verdict has a witness");
            let (off, dbi) = (g.out_blocks.offset(i), g.out_blocks.size(i));
            for r in 0..dbi * de {
                for c in 0..dbi * de {
                    let (b, e) = (r / de, r % de);
                    let (b2, e2) = (c / de, c % de);
                    w[((off + b) * de + e, (off + b2) * de + e2)] = wi[(r, c)];
                }
            }
        }
        w
    });
    ChannelVerdict {
        predicate: Predicate::Degradable,
        holds,
        residual,
        witness,
    }
}

/// JSON form of a GDS channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdsSpec {
    pub subchannels: Vec<ChannelSpec>,
}

impl GdsSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Builds the channel. Unequal Kraus counts are an error unless `pad` is
    /// set, in which case every subchannel is zero-padded to the maximum.
    pub fn to_gds<T: Real>(&self, pad: bool) -> Result<GdsChannel<T>> {
        let subs = self
            .subchannels
            .iter()
            .map(|s| s.to_channel())
            .collect::<Result<Vec<KrausChannel<T>>>>()?;
        let subs = if pad { pad_kraus_to_common(&subs) } else { subs };
        build_gds(subs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::families::*;

    #[test]
    fn unequal_kraus_counts_rejected() {
        let subs = vec![identity::<f64>(2), amplitude_damping(0.3)];
        assert!(matches!(
            build_gds(subs.clone()),
            Err(Error::UnequalKrausCounts { .. })
        ));
        assert!(build_gds(pad_kraus_to_common(&subs)).is_ok());
    }

    #[test]
    fn validate_recovers_subchannels() {
        let g = build_gds(vec![amplitude_damping::<f64>(0.3), phase_flip(0.1)]).unwrap();
        let v = validate_block_structure(g.assembled(), g.in_blocks(), g.out_blocks()).unwrap();
        assert!(v.valid);
        assert_eq!(v.subchannels.unwrap()[0].kraus(), g.subchannel(0).kraus());
    }

    #[test]
    fn validate_reports_offending_entry() {
        let ch = identity::<f64>(2);
        let mut k = ch.kraus()[0].clone();
        k[(0, 0)] = Complex::new(0.0, 0.0);
        k[(1, 1)] = Complex::new(0.0, 0.0);
        k[(1, 0)] = Complex::new(1.0, 0.0);
        k[(0, 1)] = Complex::new(1.0, 0.0);
        let swap = KrausChannel::new("swap", vec![k]).unwrap();
        let blocks = BlockStructure::new(vec![1, 1]).unwrap();
        let v = validate_block_structure(&swap, &blocks, &blocks).unwrap();
        assert!(!v.valid);
        assert_eq!(v.offending, Some((0, 1, 0)));
    }

    #[test]
    fn off_diagonal_rejects_equal_indices() {
        let g = build_gds(vec![amplitude_damping::<f64>(0.3), amplitude_damping(0.6)]).unwrap();
        assert!(off_diagonal_choi(&g, 1, 1).is_err());
        let m = off_diagonal_choi(&g, 0, 1).unwrap();
        let m_rev = off_diagonal_choi(&g, 1, 0).unwrap();
        assert!((&m.choi.adjoint() - &m_rev.choi).max_abs() < 1e-15);
    }

    #[test]
    fn off_diagonal_map_matches_assembled_output() {
        let g = build_gds(vec![amplitude_damping::<f64>(0.3), phase_flip(0.2)]).unwrap();
        let rho = ComplexMatrix::from_fn(4, 4, |r, c| Complex::new(0.1 * (r + 1) as f64, 0.05 * c as f64));
        let out = g.assembled().apply(&rho).unwrap();
        let x = rho.submatrix(0, 2, 2, 2);
        let m = off_diagonal_choi(&g, 0, 1).unwrap();
        let y = m.apply(&x).unwrap();
        assert!((&y - &out.submatrix(0, 2, 2, 2)).max_abs() < 1e-14);
    }

    #[test]
    fn sparse_transposed_matches_dense() {
        let g = build_gds(vec![amplitude_damping::<f64>(0.3), completely_depolarizing(1, 2)]).unwrap();
        let dense = off_diagonal_choi(&g, 0, 1).unwrap().partial_transpose();
        let sparse = off_diagonal_transposed_sparse(&g, 0, 1).to_dense();
        assert!((&dense - &sparse).max_abs() < 1e-15);
    }

    #[test]
    fn complement_depends_on_diagonal_blocks_only() {
        let g = build_gds(vec![amplitude_damping::<f64>(0.3), phase_flip(0.2)]).unwrap();
        let rho = ComplexMatrix::from_fn(4, 4, |r, c| {
            Complex::new(if r == c { 0.25 } else { 0.03 }, 0.0)
        });
        let a = gds_complement_apply(&g, &rho).unwrap();
        let b = g.assembled().complement_apply(&rho).unwrap();
        assert!((&a - &b).max_abs() < 1e-14);
    }
}
