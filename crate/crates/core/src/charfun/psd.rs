//! Randomized positive-definiteness check on Gram matrices `[f(y_i - y_j)]`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::analysis::value_at;
use super::cf::StratifiedCF;
use crate::solenoid::SteinitzSpec;

/// A random element `m / A_N` of `Y` with small `N` and `|m|`.
pub fn random_character<R: Rng + ?Sized>(spec: &SteinitzSpec, rng: &mut R) -> BigRational {
    let depth = rng.random_range(0..=5usize);
    let m: i64 = rng.random_range(-24..=24);
    BigRational::new(BigInt::from(m), spec.tower_product(depth))
}

#[derive(Debug, Clone, Serialize)]
pub struct PsdReport {
    pub trials: usize,
    pub size: usize,
    pub seed: u64,
    pub min_eigenvalue: f64,
    /// `f(0) = 1` exactly.
    pub normalized: bool,
    /// `|f(y)| <= 1 + tol` at every probed difference.
    pub bounded: bool,
    /// `f(-y) = conj f(y)` at every probed difference.
    pub hermitian: bool,
    pub passed: bool,
}

/// Draw `trials` random `k`-subsets of `Y` and report the smallest Gram
/// eigenvalue. A necessary condition only.
pub fn psd_spot_check(f: &StratifiedCF, k: usize, trials: usize, seed: u64, tol: f64) -> PsdReport {
    let spec = f.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normalized = value_at(f, &BigRational::from_integer(0.into())).is_exactly_one();
    let mut bounded = true;
    let mut hermitian = true;
    let mut min_eig = f64::INFINITY;
    for _ in 0..trials {
        let ys: Vec<BigRational> = (0..k).map(|_| random_character(spec, &mut rng)).collect();
        let mut gram = DMatrix::<Complex64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = value_at(f, &(&ys[i] - &ys[j])).to_complex();
            }
        }
        for i in 0..k {
            for j in 0..k {
                let z = gram[(i, j)];
                bounded &= z.norm() <= 1.0 + tol;
                hermitian &= (z - gram[(j, i)].conj()).norm() <= tol;
            }
        }
        // Hermitian A + iB is PSD iff the real symmetric [[A, -B], [B, A]] is
        let mut real = DMatrix::<f64>::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                let z = gram[(i, j)];
                real[(i, j)] = z.re;
                real[(i + k, j + k)] = z.re;
                real[(i, j + k)] = -z.im;
                real[(i + k, j)] = z.im;
            }
        }
        let eig = real.symmetric_eigen().eigenvalues.min();
        min_eig = min_eig.min(eig);
    }
    PsdReport {
        trials,
        size: k,
        seed,
        min_eigenvalue: min_eig,
        normalized,
        bounded,
        hermitian,
        passed: normalized && bounded && hermitian && min_eig >= -tol,
    }
}
