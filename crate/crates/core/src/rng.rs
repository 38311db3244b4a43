//! Seeded generators and random matrix helpers.
//!
//! Every random object in the crate is a pure function of a 64-bit seed.
//! Generator state is always owned by the caller.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, C64};

pub type Generator = ChaCha8Rng;

pub fn generator(seed: u64) -> Generator {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed for item `index` of a run seeded with `seed`
/// (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Matrix of independent standard complex Gaussians.
pub fn ginibre(rng: &mut Generator, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im)
    })
}

/// `rows × cols` matrix with orthonormal columns spanning a Haar-random subspace.
pub fn orthonormal_columns(rng: &mut Generator, rows: usize, cols: usize) -> CMatrix {
    if cols == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let g = ginibre(rng, rows, cols);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    // fix column phases so the distribution is Haar
    for k in 0..cols {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase: C64 = d / d.norm();
            let mut col = q.column_mut(k);
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
    }
    q
}

pub fn unitary(rng: &mut Generator, dim: usize) -> CMatrix {
    orthonormal_columns(rng, dim, dim)
}

/// Uniform point of the probability simplex (normalized exponentials).
pub fn simplex_point(rng: &mut Generator, dim: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..dim)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn same_seed_same_stream() {
        let a = ginibre(&mut generator(7), 3, 3);
        let b = ginibre(&mut generator(7), 3, 3);
        assert_eq!(a, b);
        assert_ne!(a, ginibre(&mut generator(8), 3, 3));
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| derive_seed(42, i)).collect();
        let mut dedup = s.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), s.len());
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn unitary_is_unitary() {
        let u = unitary(&mut generator(3), 5);
        let gram = u.adjoint() * &u;
        assert!(max_abs_diff(&gram, &CMatrix::identity(5, 5)) < 1e-12);
    }

    #[test]
    fn simplex_point_sums_to_one() {
        let p = simplex_point(&mut generator(9), 6);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x > 0.0));
    }
}
