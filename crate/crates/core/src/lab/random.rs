//! Seeded random instances.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::Result;
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};
use crate::triple::{FiniteAlgebra, FiniteSpectralTriple, State};

/// Uniform point of the probability simplex with `n` vertices.
pub fn simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Uniform random probability state on `n` pure states.
pub fn probability_state(rng: &mut ChaCha8Rng, n: usize) -> State {
    let mut w = simplex_point(rng, n);
    // Absorb the rounding error so the weights sum to one as closely as possible.
    let s: f64 = w.iter().sum();
    w[0] += 1.0 - s;
    State::probability(w).expect("normalized exponentials lie in the simplex")
}

/// Hermitian matrix with standard normal entries (real diagonal, complex off-diagonal).
pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        m[(i, i)] = C64::new(d, 0.0);
        for j in i + 1..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(i, j)] = C64::new(re, im);
            m[(j, i)] = C64::new(re, -im);
        }
    }
    HermitianOperator::new(m).expect("constructed Hermitian")
}

/// Random commutative triple: `ℂⁿ` with `2 ≤ n ≤ max_n`, occasionally with a coordinate of
/// multiplicity two, and a random Hermitian Dirac operator.
pub fn commutative_triple(rng: &mut ChaCha8Rng, max_n: usize) -> Result<FiniteSpectralTriple> {
    let n = rng.random_range(2..=max_n.max(2));
    let doubled = if rng.random_bool(0.25) {
        Some(rng.random_range(0..n))
    } else {
        None
    };
    let mut slots = Vec::with_capacity(n);
    let mut next = 0;
    for i in 0..n {
        let width = if doubled == Some(i) { 2 } else { 1 };
        slots.push((next..next + width).collect());
        next += width;
    }
    let dirac = hermitian(rng, next);
    FiniteSpectralTriple::new(FiniteAlgebra::Commutative { slots }, dirac)
}
