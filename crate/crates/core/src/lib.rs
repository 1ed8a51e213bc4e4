//! # spectral-transport
//!
//! Spectral distance and Wasserstein-1 transport on finite spectral triples.
//!
//! A finite spectral triple `(A, H, D)` is an algebra `A` represented on a finite-dimensional
//! Hilbert space `H` together with a Hermitian "Dirac" operator `D`. Its states carry the
//! spectral distance
//!
//! ```text
//! d_D(φ, ψ) = sup { |φ(a) − ψ(a)| : a = a*, ‖[D, a]‖ ≤ 1 }
//! ```
//!
//! and, restricting `d_D` to pure states, one obtains a cost function for optimal transport.
//! The Wasserstein-1 distance `W_D` built from that cost always dominates `d_D`, coincides with
//! it on segments between two pure states, and can be strictly larger elsewhere.
//!
//! ## Modules
//!
//! - [`linalg`]: dense complex matrices, Hermitian eigendecomposition, operator norms, kernels.
//! - [`triple`]: algebras (`ℂⁿ` with multiplicities, or a full matrix block), states, elements.
//! - [`metric`]: the spectral distance solver with witnesses and certified gaps; cost matrices.
//! - [`transport`]: transportation simplex, Kantorovich dual potentials, spectral-cost `W_D`.
//! - [`lab`]: the three-point example, closed forms, property sweeps and the `M₂(ℂ)` probe.
//!
//! The spectral distance also admits an infimum formulation over "dual" objects; it is not
//! implemented here.

#![forbid(unsafe_code)]

pub mod error;
pub mod lab;
pub mod linalg;
pub mod metric;
pub mod transport;
pub mod triple;

pub use error::{Error, Result};
pub use linalg::{commutator, kernel_basis, operator_norm, ComplexMatrix, HermitianOperator, C64};
pub use metric::{
    cost_matrix, sampled_cost_matrix, spectral_distance, CostMatrix, DistanceResult, Method,
    SolverOptions,
};
pub use transport::{
    kantorovich_dual, spectral_wasserstein, wasserstein_primal, DualPotential, TransportPlan,
};
pub use triple::{bloch_pure, AlgebraElement, FiniteAlgebra, FiniteSpectralTriple, State};
