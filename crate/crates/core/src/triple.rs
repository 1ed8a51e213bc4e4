//! Finite spectral triples, their states and algebra elements.
//!
//! Two algebra shapes are supported: `ℂⁿ` acting diagonally (each coordinate may occupy several
//! Hilbert-space slots) and a single full matrix block `Mₙ(ℂ)` acting on `ℂⁿ`.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};

/// Tolerance applied when validating states.
pub const STATE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum FiniteAlgebra {
    /// `ℂⁿ` with `slots[i]` the Hilbert-space indices carrying coordinate `i`.
    Commutative { slots: Vec<Vec<usize>> },
    /// `Mₙ(ℂ)` in its identity representation.
    FullMatrix { n: usize },
}

impl FiniteAlgebra {
    /// Number of pure states for the commutative variant, block size for the matrix variant.
    pub fn size(&self) -> usize {
        match self {
            Self::Commutative { slots } => slots.len(),
            Self::FullMatrix { n } => *n,
        }
    }
}

/// `(A, H, D)` with `A` finite dimensional.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpectralTriple {
    algebra: FiniteAlgebra,
    dirac: HermitianOperator,
}

impl FiniteSpectralTriple {
    pub fn new(algebra: FiniteAlgebra, dirac: HermitianOperator) -> Result<Self> {
        let dim_h = dirac.dim();
        match &algebra {
            FiniteAlgebra::Commutative { slots } => {
                if slots.is_empty() {
                    return Err(Error::InvalidAlgebra("no coordinates".into()));
                }
                let mut seen = vec![false; dim_h];
                for (i, s) in slots.iter().enumerate() {
                    if s.is_empty() {
                        return Err(Error::InvalidAlgebra(format!(
                            "coordinate {i} has no slots"
                        )));
                    }
                    for &k in s {
                        if k >= dim_h {
                            return Err(Error::InvalidAlgebra(format!(
                                "slot {k} outside Hilbert space of dimension {dim_h}"
                            )));
                        }
                        if seen[k] {
                            return Err(Error::InvalidAlgebra(format!("slot {k} assigned twice")));
                        }
                        seen[k] = true;
                    }
                }
                if let Some(k) = seen.iter().position(|&b| !b) {
                    return Err(Error::InvalidAlgebra(format!("slot {k} unassigned")));
                }
            }
            FiniteAlgebra::FullMatrix { n } => {
                if *n == 0 || *n != dim_h {
                    return Err(Error::InvalidAlgebra(format!(
                        "matrix block of size {n} on Hilbert space of dimension {dim_h}"
                    )));
                }
            }
        }
        Ok(Self { algebra, dirac })
    }

    /// `ℂⁿ` acting on `ℂⁿ` with unit multiplicities.
    pub fn diagonal(dirac: HermitianOperator) -> Result<Self> {
        let slots = (0..dirac.dim()).map(|i| vec![i]).collect();
        Self::new(FiniteAlgebra::Commutative { slots }, dirac)
    }

    pub fn full_matrix(dirac: HermitianOperator) -> Result<Self> {
        let n = dirac.dim();
        Self::new(FiniteAlgebra::FullMatrix { n }, dirac)
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn dirac(&self) -> &HermitianOperator {
        &self.dirac
    }

    pub fn dim_h(&self) -> usize {
        self.dirac.dim()
    }

    pub fn is_commutative(&self) -> bool {
        matches!(self.algebra, FiniteAlgebra::Commutative { .. })
    }

    /// Same algebra with Dirac operator `t·D`.
    pub fn with_scaled_dirac(&self, t: f64) -> Self {
        Self {
            algebra: self.algebra.clone(),
            dirac: self.dirac.scale(t),
        }
    }

    pub fn unit(&self) -> AlgebraElement {
        match &self.algebra {
            FiniteAlgebra::Commutative { slots } => {
                AlgebraElement::Diagonal(vec![C64::new(1.0, 0.0); slots.len()])
            }
            FiniteAlgebra::FullMatrix { n } => AlgebraElement::Matrix(ComplexMatrix::identity(*n)),
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        match &self.algebra {
            FiniteAlgebra::Commutative { slots } => {
                AlgebraElement::Diagonal(vec![C64::new(0.0, 0.0); slots.len()])
            }
            FiniteAlgebra::FullMatrix { n } => AlgebraElement::Matrix(ComplexMatrix::zeros(*n, *n)),
        }
    }

    /// Real dimension of the self-adjoint part of the algebra.
    pub fn param_dim(&self) -> usize {
        match &self.algebra {
            FiniteAlgebra::Commutative { slots } => slots.len(),
            FiniteAlgebra::FullMatrix { n } => n * n,
        }
    }

    /// Self-adjoint element with real coordinates `z`.
    ///
    /// For `Mₙ(ℂ)` the coordinates are the diagonal entries followed, for each `i < j`, by the
    /// coefficients of `E_ij + E_ji` and `i(E_ij − E_ji)`.
    pub fn element_from_params(&self, z: &[f64]) -> Result<AlgebraElement> {
        if z.len() != self.param_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} parameters for a self-adjoint space of dimension {}",
                z.len(),
                self.param_dim()
            )));
        }
        Ok(match &self.algebra {
            FiniteAlgebra::Commutative { .. } => {
                AlgebraElement::Diagonal(z.iter().map(|&x| C64::new(x, 0.0)).collect())
            }
            FiniteAlgebra::FullMatrix { n } => {
                let n = *n;
                let mut m = ComplexMatrix::zeros(n, n);
                for i in 0..n {
                    m[(i, i)] = C64::new(z[i], 0.0);
                }
                let mut k = n;
                for i in 0..n {
                    for j in (i + 1)..n {
                        let w = C64::new(z[k], z[k + 1]);
                        m[(i, j)] = w;
                        m[(j, i)] = w.conj();
                        k += 2;
                    }
                }
                AlgebraElement::Matrix(m)
            }
        })
    }

    /// Basis of the self-adjoint part matching [`Self::element_from_params`].
    pub fn self_adjoint_basis(&self) -> Vec<AlgebraElement> {
        let p = self.param_dim();
        (0..p)
            .map(|k| {
                let mut z = vec![0.0; p];
                z[k] = 1.0;
                self.element_from_params(&z).expect("dimension matches")
            })
            .collect()
    }

    /// The operator `π(a)` on the Hilbert space.
    pub fn represent(&self, a: &AlgebraElement) -> Result<ComplexMatrix> {
        match (&self.algebra, a) {
            (FiniteAlgebra::Commutative { slots }, AlgebraElement::Diagonal(z)) => {
                if z.len() != slots.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} coordinates for an algebra with {}",
                        z.len(),
                        slots.len()
                    )));
                }
                let mut diag = vec![C64::new(0.0, 0.0); self.dim_h()];
                for (zi, s) in z.iter().zip(slots) {
                    for &k in s {
                        diag[k] = *zi;
                    }
                }
                Ok(ComplexMatrix::from_diagonal(&diag))
            }
            (FiniteAlgebra::FullMatrix { n }, AlgebraElement::Matrix(m)) => {
                if m.rows() != *n || m.cols() != *n {
                    return Err(Error::DimensionMismatch(format!(
                        "{}x{} element for M_{n}",
                        m.rows(),
                        m.cols()
                    )));
                }
                Ok(m.clone())
            }
            (FiniteAlgebra::Commutative { .. }, _) => Err(Error::WrongAlgebra {
                expected: "full-matrix",
            }),
            (FiniteAlgebra::FullMatrix { .. }, _) => Err(Error::WrongAlgebra {
                expected: "commutative",
            }),
        }
    }

    /// The `i`-th pure state `δᵢ` (zero-based) of a commutative algebra.
    pub fn pure_state(&self, i: usize) -> Result<State> {
        match &self.algebra {
            FiniteAlgebra::Commutative { slots } => {
                if i >= slots.len() {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        len: slots.len(),
                    });
                }
                let mut w = vec![0.0; slots.len()];
                w[i] = 1.0;
                State::probability(w)
            }
            FiniteAlgebra::FullMatrix { .. } => Err(Error::WrongAlgebra {
                expected: "commutative",
            }),
        }
    }

    /// Whether `state` is a state of this triple's algebra.
    pub fn check_state(&self, state: &State) -> Result<()> {
        match (&self.algebra, state.kind()) {
            (FiniteAlgebra::Commutative { slots }, StateKind::Probability(w))
                if w.len() == slots.len() =>
            {
                Ok(())
            }
            (FiniteAlgebra::FullMatrix { n }, StateKind::Density(rho)) if rho.dim() == *n => Ok(()),
            _ => Err(Error::InvalidState(
                "state does not belong to the triple's algebra".into(),
            )),
        }
    }
}

/// An algebra element, not necessarily self-adjoint.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraElement {
    Diagonal(Vec<C64>),
    Matrix(ComplexMatrix),
}

impl AlgebraElement {
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        match self {
            Self::Diagonal(z) => z.iter().all(|w| w.im.abs() <= tol),
            Self::Matrix(m) => m.hermitian_deviation() <= tol,
        }
    }

    /// `c₁·self + c₂·other`; shapes must agree.
    pub fn combine(&self, c1: C64, other: &Self, c2: C64) -> Result<Self> {
        match (self, other) {
            (Self::Diagonal(a), Self::Diagonal(b)) if a.len() == b.len() => Ok(Self::Diagonal(
                a.iter().zip(b).map(|(x, y)| c1 * x + c2 * y).collect(),
            )),
            (Self::Matrix(a), Self::Matrix(b)) => {
                Ok(Self::Matrix(a.scale(c1).try_add(&b.scale(c2))?))
            }
            _ => Err(Error::DimensionMismatch(
                "incompatible algebra elements".into(),
            )),
        }
    }

    /// Pointwise / matrix product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Self::Diagonal(a), Self::Diagonal(b)) if a.len() == b.len() => Ok(Self::Diagonal(
                a.iter().zip(b).map(|(x, y)| x * y).collect(),
            )),
            (Self::Matrix(a), Self::Matrix(b)) => Ok(Self::Matrix(a.try_mul(b)?)),
            _ => Err(Error::DimensionMismatch(
                "incompatible algebra elements".into(),
            )),
        }
    }
}

/// A validated state.
#[derive(Clone, Debug, PartialEq)]
pub struct State(StateKind);

#[derive(Clone, Debug, PartialEq)]
pub enum StateKind {
    /// Weights over the pure states of `ℂⁿ`.
    Probability(Vec<f64>),
    /// Density matrix for `Mₙ(ℂ)`.
    Density(HermitianOperator),
}

impl State {
    /// Nonnegative weights summing to one (within `1e-12`). Entries in `[−1e-12, 0)` are
    /// clamped to zero.
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidState("empty weight vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < -STATE_TOL) {
            return Err(Error::InvalidState(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(StateKind::Probability(
            weights.into_iter().map(|w| w.max(0.0)).collect(),
        )))
    }

    /// Positive semidefinite, unit-trace density matrix.
    pub fn density(rho: HermitianOperator) -> Result<Self> {
        let tr = rho.matrix().trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}, not 1")));
        }
        let min = rho.eigen().values.first().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self(StateKind::Density(rho)))
    }

    /// Density matrix `½(I + r·σ)` for a Bloch vector with `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let h = 0.5;
        let m = ComplexMatrix::from_rows(&[
            vec![
                C64::new(h * (1.0 + r[2]), 0.0),
                C64::new(h * r[0], -h * r[1]),
            ],
            vec![
                C64::new(h * r[0], h * r[1]),
                C64::new(h * (1.0 - r[2]), 0.0),
            ],
        ])?;
        Self::density(HermitianOperator::new(m)?)
    }

    pub fn kind(&self) -> &StateKind {
        &self.0
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match &self.0 {
            StateKind::Probability(w) => Some(w),
            StateKind::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Option<&HermitianOperator> {
        match &self.0 {
            StateKind::Density(rho) => Some(rho),
            StateKind::Probability(_) => None,
        }
    }

    /// Bloch vector of a 2×2 density matrix.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        let rho = self.density_matrix()?;
        if rho.dim() != 2 {
            return None;
        }
        let m = rho.matrix();
        Some([
            2.0 * m[(0, 1)].re,
            -2.0 * m[(0, 1)].im,
            m[(0, 0)].re - m[(1, 1)].re,
        ])
    }

    /// `λ·self + (1 − λ)·other` for `λ ∈ [0, 1]`.
    pub fn mix(&self, other: &State, lambda: f64) -> Result<State> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidState(format!(
                "mixing weight {lambda} outside [0, 1]"
            )));
        }
        match (&self.0, &other.0) {
            (StateKind::Probability(a), StateKind::Probability(b)) if a.len() == b.len() => {
                State::probability(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                        .collect(),
                )
            }
            (StateKind::Density(a), StateKind::Density(b)) if a.dim() == b.dim() => {
                let m = a
                    .matrix()
                    .scale_real(lambda)
                    .try_add(&b.matrix().scale_real(1.0 - lambda))?;
                State::density(HermitianOperator::new(m)?)
            }
            _ => Err(Error::InvalidState(
                "cannot mix states of different algebras".into(),
            )),
        }
    }

    /// `φ(a)`: `Σ wᵢ zᵢ` or `tr(ρ a)`.
    pub fn evaluate(&self, a: &AlgebraElement) -> Result<C64> {
        evaluate(self, a)
    }
}

/// `φ(a)`: `Σ wᵢ zᵢ` for probability states, `tr(ρ a)` for density matrices.
pub fn evaluate(state: &State, a: &AlgebraElement) -> Result<C64> {
    match (state.kind(), a) {
        (StateKind::Probability(w), AlgebraElement::Diagonal(z)) if w.len() == z.len() => {
            Ok(w.iter().zip(z).map(|(wi, zi)| zi * *wi).sum())
        }
        (StateKind::Density(rho), AlgebraElement::Matrix(m))
            if m.rows() == rho.dim() && m.cols() == rho.dim() =>
        {
            let r = rho.matrix();
            let n = rho.dim();
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                for k in 0..n {
                    acc += r[(i, k)] * m[(k, i)];
                }
            }
            Ok(acc)
        }
        _ => Err(Error::DimensionMismatch(
            "state and element belong to different algebras".into(),
        )),
    }
}

/// Pure state of `M₂(ℂ)` at polar angle `theta`, azimuth `phi` on the Bloch sphere.
pub fn bloch_pure(theta: f64, phi: f64) -> State {
    let r = [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ];
    State::from_bloch(r).expect("unit Bloch vector gives a valid density matrix")
}
