#![allow(dead_code)]

use gds_core::channel::KrausChannel;
use gds_core::gds::{build_gds, GdsChannel};
use gds_core::linalg::{direct_sum, eigh, ComplexMatrix};
use gds_core::optim::{normal_vec, restart_rng};
use num_complex::Complex;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix<f64> {
    let raw: Vec<f64> = normal_vec(rng, 2 * rows * cols);
    let data = raw.chunks(2).map(|c| Complex::new(c[0], c[1])).collect();
    ComplexMatrix::from_vec(rows, cols, data).unwrap()
}

/// Channel from a Haar-like isometry `C^d_in -> C^kraus (x) C^d_out`.
pub fn random_channel(rng: &mut ChaCha8Rng, d_in: usize, d_out: usize, kraus: usize) -> KrausChannel<f64> {
    let g = gaussian(rng, kraus * d_out, d_in);
    let inv_sqrt = eigh(&g.adjoint().matmul(&g)).map(|v| 1.0 / v.sqrt());
    let v = g.matmul(&inv_sqrt);
    let ops = (0..kraus).map(|k| v.submatrix(k * d_out, 0, d_out, d_in)).collect();
    KrausChannel::new("random", ops).unwrap()
}

/// Full-rank density matrix `G G^dag / Tr`.
pub fn random_state(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix<f64> {
    let g = gaussian(rng, d, d);
    let m = g.matmul(&g.adjoint());
    let t = m.real_trace();
    m.scale(1.0 / t)
}

pub fn random_pure(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex<f64>> {
    let g = gaussian(rng, d, 1);
    let n = g.frobenius_norm();
    g.scale(1.0 / n).into_vec()
}

/// GDS channel with 2 or 3 blocks of dimension at most 3 and a shared
/// Kraus count.
pub fn random_gds(rng: &mut ChaCha8Rng) -> GdsChannel<f64> {
    let blocks = rng.random_range(2..=3);
    let kraus: usize = rng.random_range(1..=3);
    let subs = (0..blocks)
        .map(|_| {
            let a: usize = rng.random_range(1..=3);
            // An isometry needs kraus * b >= a.
            let b = rng.random_range(1..=3).max(a.div_ceil(kraus));
            random_channel(rng, a, b, kraus)
        })
        .collect();
    build_gds(subs).unwrap()
}

/// Keeps only the diagonal blocks of `rho`.
pub fn block_truncate(g: &GdsChannel<f64>, rho: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
    let blocks: Vec<_> = (0..g.block_count()).map(|i| g.input_block(rho, i)).collect();
    direct_sum(&blocks)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    restart_rng(seed, 0)
}
