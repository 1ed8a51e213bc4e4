//! Spectral distance between states of a finite spectral triple.
//!
//! `d_D(φ, ψ) = sup { |φ(a) − ψ(a)| : a = a*, ‖[D, a]‖ ≤ 1 }` is computed through the
//! equivalent minimum-norm program
//!
//! ```text
//! 1 / d_D(φ, ψ) = min { ‖[D, a]‖ : a = a*, φ(a) − ψ(a) = 1 }.
//! ```
//!
//! The self-adjoint elements are parametrized by real vectors `z`. Directions in the kernel of
//! `z ↦ [D, a(z)]` (always including the unit) either leave the functional `c = φ − ψ`
//! unchanged, in which case they are quotiented out, or change it, in which case the distance is
//! infinite. Both cases are decided algebraically before any iteration.

mod barrier;
mod subgradient;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, commutator, kernel_basis, ComplexMatrix, C64};
use crate::triple::{AlgebraElement, FiniteSpectralTriple, State};

/// Which minimizer is used for the minimum-norm program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Log-determinant barrier with Newton centering. Produces a certified gap.
    #[default]
    InteriorPoint,
    /// Projected subgradient with diminishing steps followed by a coordinate-search polish.
    /// Carries no certificate; the reported gap is infinite.
    Subgradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Absolute tolerance on the distance value.
    pub tol: f64,
    /// Iteration budget (Newton steps or subgradient steps).
    pub max_iter: usize,
    /// Step size at which the coordinate-search polish stops.
    pub polish_tol: f64,
    pub method: Method,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50_000,
            polish_tol: 1e-9,
            method: Method::InteriorPoint,
        }
    }
}

/// Outcome of [`spectral_distance`].
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceResult {
    /// Distance value, possibly `+∞`.
    pub value: f64,
    /// Self-adjoint element with `‖[D, π(w)]‖ ≤ 1` attaining `|φ(w) − ψ(w)| = value`
    /// (up to rounding). Absent when the distance is infinite.
    pub witness: Option<AlgebraElement>,
    pub iterations: usize,
    /// Upper bound on `sup − value`.
    pub certified_gap: f64,
}

impl DistanceResult {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    /// Value rounded upward by the certificate.
    pub fn upper_bound(&self) -> f64 {
        self.value + self.certified_gap
    }
}

/// Result of minimizing `‖H₀ + Σ y_j H_j‖` over `y`.
pub(crate) struct NormMinimum {
    pub y: Vec<f64>,
    /// Spectral norm at `y`.
    pub norm: f64,
    /// Certified lower bound on the minimum (0 when unknown).
    pub lower: f64,
    pub iterations: usize,
}

/// The affine minimum-norm problem in Hermitian form: `‖X‖ = ‖−iX‖` for anti-Hermitian `X`.
pub(crate) struct NormProblem {
    pub offset: ComplexMatrix,
    pub directions: Vec<ComplexMatrix>,
}

impl NormProblem {
    pub fn at(&self, y: &[f64]) -> ComplexMatrix {
        let mut h = self.offset.clone();
        for (yj, hj) in y.iter().zip(&self.directions) {
            h.axpy(*yj, hj);
        }
        h
    }
}

/// Threshold on `|c·k| / ‖c‖` above which a kernel direction makes the distance infinite.
const KERNEL_FUNCTIONAL_TOL: f64 = 1e-9;

/// Spectral distance between two states of `triple`.
pub fn spectral_distance(
    triple: &FiniteSpectralTriple,
    phi: &State,
    psi: &State,
    opts: &SolverOptions,
) -> Result<DistanceResult> {
    triple.check_state(phi)?;
    triple.check_state(psi)?;

    let basis = triple.self_adjoint_basis();
    let p = basis.len();
    let c: Vec<f64> = basis
        .iter()
        .map(|b| Ok((phi.evaluate(b)? - psi.evaluate(b)?).re))
        .collect::<Result<_>>()?;
    let c_norm = linalg::norm2(&c);
    if c_norm <= 1e-14 {
        return Ok(DistanceResult {
            value: 0.0,
            witness: Some(triple.zero()),
            iterations: 0,
            certified_gap: 0.0,
        });
    }

    let images: Vec<ComplexMatrix> = basis
        .iter()
        .map(|b| commutator(triple.dirac(), &triple.represent(b)?))
        .collect::<Result<_>>()?;
    let kernel = kernel_basis(&images)?;
    if kernel
        .iter()
        .any(|k| linalg::dot(&c, k).abs() > KERNEL_FUNCTIONAL_TOL * c_norm)
    {
        return Ok(DistanceResult {
            value: f64::INFINITY,
            witness: None,
            iterations: 0,
            certified_gap: 0.0,
        });
    }

    // c restricted to the orthogonal complement of the kernel.
    let mut c_perp = c.clone();
    for k in &kernel {
        let t = linalg::dot(&c, k);
        c_perp.iter_mut().zip(k).for_each(|(x, y)| *x -= t * y);
    }
    let cp2 = linalg::dot(&c_perp, &c_perp);
    let z0: Vec<f64> = c_perp.iter().map(|x| x / cp2).collect();
    let c_hat: Vec<f64> = c_perp.iter().map(|x| x / cp2.sqrt()).collect();
    let mut fixed = kernel.clone();
    fixed.push(c_hat);
    let free = linalg::orthonormal_complement(&fixed, p);

    let to_hermitian = |coeffs: &[f64]| {
        let mut x = ComplexMatrix::zeros(triple.dim_h(), triple.dim_h());
        for (ck, img) in coeffs.iter().zip(&images) {
            x.axpy(*ck, img);
        }
        x.scale(C64::new(0.0, -1.0))
    };
    let problem = NormProblem {
        offset: to_hermitian(&z0),
        directions: free.iter().map(|v| to_hermitian(v)).collect(),
    };

    let min = match opts.method {
        Method::InteriorPoint => barrier::minimize(&problem, opts)?,
        Method::Subgradient => subgradient::minimize(&problem, opts),
    };

    let mut z = z0;
    for (yj, v) in min.y.iter().zip(&free) {
        z.iter_mut().zip(v).for_each(|(a, b)| *a += yj * b);
    }
    let witness_params: Vec<f64> = z.iter().map(|x| x / min.norm).collect();
    let value = 1.0 / min.norm;
    let certified_gap = if min.lower > 0.0 {
        (1.0 / min.lower - value).max(0.0)
    } else {
        f64::INFINITY
    };
    Ok(DistanceResult {
        value,
        witness: Some(triple.element_from_params(&witness_params)?),
        iterations: min.iterations,
        certified_gap,
    })
}

/// Symmetric matrix of nonnegative costs with zero diagonal; `+∞` entries allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Validates shape, symmetry (exact), zero diagonal and nonnegativity.
    pub fn new(size: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {size}x{size} cost matrix",
                entries.len()
            )));
        }
        for i in 0..size {
            if entries[i * size + i] != 0.0 {
                return Err(Error::InvalidMarginals(format!(
                    "cost diagonal entry {i} is nonzero"
                )));
            }
            for j in 0..size {
                let v = entries[i * size + j];
                if v.is_nan() || v < 0.0 {
                    return Err(Error::InvalidMarginals(format!(
                        "cost ({i}, {j}) = {v} is invalid"
                    )));
                }
                if v != entries[j * size + i] {
                    return Err(Error::InvalidMarginals(format!(
                        "cost is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { size, entries })
    }

    /// Builds the matrix from the upper triangle `f(i, j)`, `i < j`.
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(size: usize, mut f: F) -> Result<Self> {
        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            for j in (i + 1)..size {
                let v = f(i, j);
                entries[i * size + j] = v;
                entries[j * size + i] = v;
            }
        }
        Self::new(size, entries)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "cost matrix must be square".into(),
            ));
        }
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.size)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// Multiplies every entry by `t > 0`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            size: self.size,
            entries: self.entries.iter().map(|v| v * t).collect(),
        }
    }

    /// Largest `c_ik − c_ij − c_jk` over index triples with finite entries (0 if none positive).
    pub fn triangle_violation(&self) -> f64 {
        let n = self.size;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b, c) = (self.get(i, k), self.get(i, j), self.get(j, k));
                    if a.is_finite() && b.is_finite() && c.is_finite() {
                        worst = worst.max(a - b - c);
                    }
                }
            }
        }
        worst
    }

    /// Shortest-path closure: the largest metric below this cost.
    pub fn metric_closure(&self) -> Self {
        let n = self.size;
        let mut d = self.entries.clone();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i * n + k] + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        // Symmetrize to undo rounding asymmetry.
        for i in 0..n {
            for j in (i + 1)..n {
                let v = d[i * n + j].min(d[j * n + i]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self {
            size: n,
            entries: d,
        }
    }
}

fn pairwise(
    triple: &FiniteSpectralTriple,
    states: &[State],
    opts: &SolverOptions,
) -> Result<CostMatrix> {
    let n = states.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            spectral_distance(triple, &states[i], &states[j], opts)
                .map(|r| r.value)
                .map_err(|e| Error::Pair {
                    i,
                    j,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; n * n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        entries[i * n + j] = v;
        entries[j * n + i] = v;
    }
    CostMatrix::new(n, entries)
}

/// Spectral distances between the pure states `δᵢ` of a commutative triple.
pub fn cost_matrix(triple: &FiniteSpectralTriple, opts: &SolverOptions) -> Result<CostMatrix> {
    if !triple.is_commutative() {
        return Err(Error::WrongAlgebra {
            expected: "commutative",
        });
    }
    let states: Vec<State> = (0..triple.algebra().size())
        .map(|i| triple.pure_state(i))
        .collect::<Result<_>>()?;
    pairwise(triple, &states, opts)
}

/// Tolerance for the rank-one check in [`sampled_cost_matrix`].
pub const PURITY_TOL: f64 = 1e-10;

/// Spectral distances between listed pure states (rank-one densities or point masses).
pub fn sampled_cost_matrix(
    triple: &FiniteSpectralTriple,
    pure_states: &[State],
    opts: &SolverOptions,
) -> Result<CostMatrix> {
    for (k, s) in pure_states.iter().enumerate() {
        triple.check_state(s)?;
        let pure = match (s.weights(), s.density_matrix()) {
            (Some(w), _) => w.iter().any(|&x| (x - 1.0).abs() <= PURITY_TOL),
            (_, Some(rho)) => {
                let m = rho.matrix();
                (&(m * m) - m).max_abs() <= PURITY_TOL
            }
            _ => false,
        };
        if !pure {
            return Err(Error::NotPure(k));
        }
    }
    pairwise(triple, pure_states, opts)
}
