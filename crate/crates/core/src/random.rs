//! Random unitary and Hermitian unitary matrices for sampling and tests.
//!
//! Unitaries are products of random permutation-symmetric unitaries
//! `aI + bJ` and permutation matrices; Hermitian unitaries are
//! conjugations `W D W†` of a ±1 diagonal `D` by such a product.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::numkernel::{all_ones, identity, ComplexMatrix};

/// Random unitary `aI + bJ` with `|a| = |a + n b| = 1`.
pub fn random_ps_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    let a = Complex64::from_polar(1.0, rng.gen_range(-PI..PI));
    let top = Complex64::from_polar(1.0, rng.gen_range(-PI..PI));
    let b = (top - a) / n as f64;
    Ok(&identity(n)?.scale(a) + &all_ones(n)?.scale(b))
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Permutation matrix with `P e_j = e_{perm[j]}`.
pub fn permutation_matrix(perm: &[usize]) -> Result<ComplexMatrix> {
    let n = perm.len();
    let mut p = ComplexMatrix::zeros(n)?;
    for (j, &target) in perm.iter().enumerate() {
        p[(target, j)] = Complex64::new(1.0, 0.0);
    }
    Ok(p)
}

/// Alternating product of `factors` PS unitaries and random permutations.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, factors: usize, rng: &mut R) -> Result<ComplexMatrix> {
    let mut w = identity(n)?;
    for _ in 0..factors {
        let ps = random_ps_unitary(n, rng)?;
        let p = permutation_matrix(&random_permutation(n, rng))?;
        w = &(&w * &ps) * &p;
    }
    Ok(w)
}

/// `W D W†` with `D` carrying `plus` entries +1 and the rest −1.
pub fn random_hermitian_unitary<R: Rng + ?Sized>(n: usize, plus: usize, rng: &mut R) -> Result<ComplexMatrix> {
    let diag: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(if j < plus { 1.0 } else { -1.0 }, 0.0))
        .collect();
    let d = ComplexMatrix::from_diagonal(&diag)?;
    let w = random_unitary(n, 3, rng)?;
    Ok(&(&w * &d) * &w.adjoint())
}
