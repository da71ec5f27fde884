//! Seeded random streams and random-matrix generators.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, stream)`: the seed
//! selects the key and the stream id selects an independent counter
//! sequence, so member `k` of an ensemble always sees the same numbers no
//! matter which order members are processed in.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::ComplexMatrix;
use crate::operator::HermitianOperator;

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// dim × cols matrix of independent complex normals, column-major columns.
pub fn ginibre_columns<R: Rng>(rng: &mut R, dim: usize, cols: usize) -> Vec<Vec<C64>> {
    (0..cols).map(|_| (0..dim).map(|_| complex_normal(rng)).collect()).collect()
}

/// Haar-distributed unitary from Gram–Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut cols = ginibre_columns(rng, dim, dim);
    for k in 0..dim {
        for j in 0..k {
            let (done, rest) = cols.split_at_mut(k);
            let proj: C64 = done[j].iter().zip(rest[0].iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, q) in rest[0].iter_mut().zip(done[j].iter()) {
                *x -= proj * q;
            }
        }
        let n = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= n;
        }
    }
    let mut m = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    m
}

/// (G + G†)/2 with G complex Ginibre; GUE up to scale.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = complex_normal(rng);
        }
    }
    let h = (&m + &m.adjoint()).scale_real(0.5);
    HermitianOperator::trusted(h, "random")
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}
