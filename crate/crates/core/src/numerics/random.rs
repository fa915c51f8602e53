//! Seeded random matrices and states for experiments and tests.

use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, ComplexVector, C64};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| gaussian(rng))
}

/// Haar-distributed unitary: Gram–Schmidt on a complex Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(dim, rng);
    let mut cols: Vec<ComplexVector> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = g.column(j);
        // two passes of modified Gram–Schmidt keep the columns orthonormal to round-off
        for _ in 0..2 {
            for q in &cols {
                let proj = q.inner(&v);
                v = &v - &q.scale(proj);
            }
        }
        cols.push(v.normalized());
    }
    ComplexMatrix::from_columns(&cols)
}

pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(dim, rng);
    (&g + &g.adjoint()).scale(C64::new(0.5, 0.0))
}

/// Normal matrix `W diag(eigenvalues) W†` with a Haar-random `W`.
pub fn normal_with_spectrum<R: Rng + ?Sized>(eigenvalues: &[C64], rng: &mut R) -> ComplexMatrix {
    let w = unitary(eigenvalues.len(), rng);
    let d = ComplexMatrix::diag(eigenvalues);
    &(&w * &d) * &w.adjoint()
}

/// Uniformly random pure state of dimension `dim`.
pub fn state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    ComplexVector::new((0..dim).map(|_| gaussian(rng)).collect()).normalized()
}

/// Density matrix `W diag(probabilities) W†`.
pub fn density_with_spectrum<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> ComplexMatrix {
    let eig: Vec<C64> = probabilities.iter().map(|&p| C64::new(p, 0.0)).collect();
    let m = normal_with_spectrum(&eig, rng);
    // exact Hermitian symmetry
    (&m + &m.adjoint()).scale(C64::new(0.5, 0.0))
}
