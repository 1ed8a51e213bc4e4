//! Dense complex linear algebra for small operators.
//!
//! Everything here works on matrices of dimension a few dozen at most, so the algorithms
//! favour accuracy over speed: cyclic complex Jacobi for Hermitian eigenproblems and
//! one-sided (Hestenes) Jacobi for null spaces.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as C64;

/// Relative Hermiticity tolerance used when validating operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative singular-value threshold below which a direction counts as null.
pub const KERNEL_REL_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;

/// A dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(n_rows, n_cols, rows.iter().flatten().copied().collect())
    }

    /// Builds a matrix of real entries from nested rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise deviation from Hermiticity, `max |M_ij − conj(M_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Real-linear flattening `[Re m_00, Im m_00, Re m_01, ...]`.
    pub fn to_real_vec(&self) -> Vec<f64> {
        self.data.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Matrix product with a shape check.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sum")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "difference")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `self += c · other`, shapes assumed equal.
    pub(crate) fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on incompatible shapes; use [`ComplexMatrix::try_mul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("incompatible matrix shapes")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("incompatible matrix shapes")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("incompatible matrix shapes")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A square matrix validated to be Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates `max |H_ij − conj(H_ji)| ≤ 1e-12 · (1 + max |H|)`.
    ///
    /// The stored matrix is the exact Hermitian part `(H + H†)/2`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL * (1.0 + matrix.max_abs()) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self {
            matrix: symmetrize(&matrix),
        })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&self.matrix)
    }

    /// Real multiple of the operator.
    pub fn scale(&self, t: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(t),
        }
    }
}

fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    out
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows())
            .map(|i| self.vectors[(i, k)])
            .collect()
    }
}

/// Eigendecomposition of the Hermitian part of a square matrix by cyclic complex Jacobi.
pub fn hermitian_eigen(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.rows();
    let mut a = symmetrize(m);
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = v[(i, k)];
        }
    }
    HermitianEigen { values, vectors }
}

fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    // Unitary phase on index q makes the pivot real and positive.
    let phase = apq / mag;
    for k in 0..n {
        a[(k, q)] *= phase.conj();
    }
    for k in 0..n {
        a[(q, k)] *= phase;
    }
    for k in 0..n {
        v[(k, q)] *= phase.conj();
    }

    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * s;
        a[(k, q)] = akp * s + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * s;
        a[(q, k)] = apk * s + aqk * c;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s;
        v[(k, q)] = vkp * s + vkq * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Largest singular value, computed from the eigenvalues of `M†M` (or `MM†`, whichever is
/// smaller).
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let gram = if m.rows() >= m.cols() {
        &m.adjoint() * m
    } else {
        m * &m.adjoint()
    };
    let eig = hermitian_eigen(&gram);
    let top = eig.values.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Spectral norm of a Hermitian matrix, `max |λ|`.
pub fn hermitian_norm(h: &ComplexMatrix) -> f64 {
    let eig = hermitian_eigen(h);
    eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `[D, A] = DA − AD`.
pub fn commutator(d: &HermitianOperator, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != d.dim() {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {}x{} Dirac with {}x{} element",
            d.dim(),
            d.dim(),
            a.rows(),
            a.cols()
        )));
    }
    let da = d.matrix().try_mul(a)?;
    let ad = a.try_mul(d.matrix())?;
    da.try_sub(&ad)
}

/// Orthonormal basis of the real null space of `z ↦ Σ z_k images[k]`.
///
/// The map is given by its images on the standard basis of `ℝᵖ`. A direction is null when its
/// singular value is at most `1e-10` times the largest one (or when the whole map vanishes).
pub fn kernel_basis(images: &[ComplexMatrix]) -> Result<Vec<Vec<f64>>> {
    let p = images.len();
    if p == 0 {
        return Ok(Vec::new());
    }
    let shape = (images[0].rows(), images[0].cols());
    if images.iter().any(|m| (m.rows(), m.cols()) != shape) {
        return Err(Error::DimensionMismatch(
            "kernel_basis images must share a shape".into(),
        ));
    }
    let columns: Vec<Vec<f64>> = images.iter().map(ComplexMatrix::to_real_vec).collect();
    let (u, v) = one_sided_jacobi(columns);
    let sigma: Vec<f64> = u.iter().map(|c| norm2(c)).collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    Ok(sigma
        .iter()
        .zip(v)
        .filter(|(&s, _)| sigma_max == 0.0 || s <= KERNEL_REL_TOL * sigma_max)
        .map(|(_, col)| col)
        .collect())
}

/// Hestenes one-sided Jacobi: returns `(A V, V)` with mutually orthogonal columns of `A V`.
fn one_sided_jacobi(mut u: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let p = u.len();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut e = vec![0.0; p];
            e[i] = 1.0;
            e
        })
        .collect();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let alpha = dot(&u[i], &u[i]);
                let beta = dot(&u[j], &u[j]);
                let gamma = dot(&u[i], &u[j]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut u, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    (u, v)
}

fn rotate_pair(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Completes `vectors` (assumed orthonormal) to an orthonormal basis of `ℝᵖ`, returning only
/// the new vectors.
pub(crate) fn orthonormal_complement(vectors: &[Vec<f64>], p: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = vectors.to_vec();
    let mut added = Vec::new();
    for k in 0..p {
        if basis.len() == p {
            break;
        }
        let mut e = vec![0.0; p];
        e[k] = 1.0;
        // Two Gram-Schmidt passes keep the result orthogonal to working precision.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&e, b);
                for (x, y) in e.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm2(&e);
        if n > 1e-8 {
            e.iter_mut().for_each(|x| *x /= n);
            basis.push(e.clone());
            added.push(e);
        }
    }
    added
}

/// Solves the dense real system `A x = b` (row-major `A`) by Gaussian elimination with partial
/// pivoting. Returns `None` for a numerically singular system.
pub(crate) fn solve_linear(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col].abs() <= scale * 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let d = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        let data = (0..rows * cols)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::new(rows, cols, data).unwrap()
    }

    fn c3_dirac(alpha: f64, beta: f64) -> HermitianOperator {
        HermitianOperator::from_real_rows(&[
            vec![0.0, 0.0, alpha],
            vec![0.0, 0.0, beta],
            vec![alpha, beta, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn identity_has_unit_norm() {
        assert_relative_eq!(
            operator_norm(&ComplexMatrix::identity(3)).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn empty_matrix_is_rejected() {
        assert!(matches!(
            operator_norm(&ComplexMatrix::zeros(0, 0)),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn commutator_norm_of_projector() {
        let d = c3_dirac(1.0, 1.0);
        let a = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let x = commutator(&d, &a).unwrap();
        assert_relative_eq!(operator_norm(&x).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn commutator_entries_match_expansion() {
        let (alpha, beta) = (0.7, 1.9);
        let d = c3_dirac(alpha, beta);
        let z = [c(0.3, 0.0), c(-1.2, 0.0), c(2.5, 0.0)];
        let x = commutator(&d, &ComplexMatrix::from_diagonal(&z)).unwrap();
        assert_relative_eq!(x[(0, 2)].re, alpha * (z[2].re - z[0].re), epsilon = 1e-14);
        assert_relative_eq!(x[(1, 2)].re, beta * (z[2].re - z[1].re), epsilon = 1e-14);
        assert!(x.try_add(&x.adjoint()).unwrap().max_abs() < 1e-14);
        assert_eq!(x[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn identity_commutes() {
        let d = c3_dirac(1.3, 0.4);
        let x = commutator(&d, &ComplexMatrix::identity(3)).unwrap();
        assert_eq!(x.max_abs(), 0.0);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let d = c3_dirac(1.0, 1.0);
        assert!(matches!(
            commutator(&d, &ComplexMatrix::identity(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn commutator_is_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h1 = random_matrix(&mut rng, 4, 4);
        let h2 = random_matrix(&mut rng, 4, 4);
        let d1 = HermitianOperator::new(symmetrize(&h1)).unwrap();
        let d2 = HermitianOperator::new(symmetrize(&h2)).unwrap();
        let x = commutator(&d1, d2.matrix()).unwrap();
        let y = commutator(&d2, d1.matrix()).unwrap();
        assert!(x.try_add(&y).unwrap().max_abs() < 1e-14);
        assert!(x.try_add(&x.adjoint()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..7 {
            let h = symmetrize(&random_matrix(&mut rng, n, n));
            let eig = hermitian_eigen(&h);
            let lambda = ComplexMatrix::from_diagonal(
                &eig.values.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>(),
            );
            let rebuilt = &(&eig.vectors * &lambda) * &eig.vectors.adjoint();
            assert!((&rebuilt - &h).max_abs() < 1e-13, "n = {n}");
            let gram = &eig.vectors.adjoint() * &eig.vectors;
            assert!((&gram - &ComplexMatrix::identity(n)).max_abs() < 1e-13);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn operator_norm_matches_independent_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 5, 5);
            let nm = nalgebra::DMatrix::from_fn(5, 5, |i, j| {
                nalgebra::Complex::new(m[(i, j)].re, m[(i, j)].im)
            });
            let gram = nm.adjoint() * &nm;
            let eig = nalgebra::SymmetricEigen::new(gram);
            let oracle = eig.eigenvalues.iter().copied().fold(0.0, f64::max).sqrt();
            assert_relative_eq!(operator_norm(&m).unwrap(), oracle, max_relative = 1e-9);
        }
    }

    #[test]
    fn rectangular_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_matrix(&mut rng, 3, 6);
        let a = operator_norm(&m).unwrap();
        let b = operator_norm(&m.adjoint()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn hermiticity_is_validated() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian(_))
        ));
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(2, 2, vec![c(0.0, 0.0)]).is_err());
    }

    fn kernel_images(d: &HermitianOperator) -> Vec<ComplexMatrix> {
        (0..3)
            .map(|k| {
                let mut z = vec![c(0.0, 0.0); 3];
                z[k] = c(1.0, 0.0);
                commutator(d, &ComplexMatrix::from_diagonal(&z)).unwrap()
            })
            .collect()
    }

    fn projector(basis: &[Vec<f64>], p: usize) -> Vec<f64> {
        let mut out = vec![0.0; p * p];
        for v in basis {
            for i in 0..p {
                for j in 0..p {
                    out[i * p + j] += v[i] * v[j];
                }
            }
        }
        out
    }

    #[test]
    fn kernel_of_c3_commutator_is_unit_direction() {
        let basis = kernel_basis(&kernel_images(&c3_dirac(1.0, 2.0))).unwrap();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        let s = 1.0 / 3f64.sqrt();
        assert!(v.iter().all(|&x| (x.abs() - s).abs() < 1e-12));
    }

    #[test]
    fn kernel_with_vanishing_alpha() {
        // z ↦ [D, diag(z)] with alpha = 0 only constrains z2 = z3.
        let basis = kernel_basis(&kernel_images(&c3_dirac(0.0, 1.5))).unwrap();
        assert_eq!(basis.len(), 2);
        let h = 0.5f64.sqrt();
        let expected = projector(&[vec![1.0, 0.0, 0.0], vec![0.0, h, h]], 3);
        let got = projector(&basis, 3);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_of_zero_map_is_everything() {
        let images = vec![ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(2, 2)];
        assert_eq!(kernel_basis(&images).unwrap().len(), 2);
        assert!(kernel_basis(&[]).unwrap().is_empty());
    }

    #[test]
    fn linear_solver_and_complement() {
        let x = solve_linear(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0]).unwrap();
        assert_relative_eq!(x[0], 0.8, epsilon = 1e-14);
        assert_relative_eq!(x[1], 1.4, epsilon = 1e-14);
        assert!(solve_linear(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0]).is_none());

        let h = 0.5f64.sqrt();
        let extra = orthonormal_complement(&[vec![h, h, 0.0]], 3);
        assert_eq!(extra.len(), 2);
        for e in &extra {
            assert!(dot(e, &[h, h, 0.0]).abs() < 1e-14);
            assert_relative_eq!(norm2(e), 1.0, epsilon = 1e-14);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix_strategy() -> impl Strategy<Value = ComplexMatrix> {
            (1usize..5, 1usize..5).prop_flat_map(|(r, cc)| {
                proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), r * cc).prop_map(move |v| {
                    ComplexMatrix::new(r, cc, v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
                        .unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn norm_is_absolutely_homogeneous(m in matrix_strategy(), re in -4.0f64..4.0, im in -4.0f64..4.0) {
                let s = C64::new(re, im);
                let lhs = operator_norm(&m.scale(s)).unwrap();
                let rhs = s.norm() * operator_norm(&m).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
            }

            #[test]
            fn norm_is_adjoint_invariant(m in matrix_strategy()) {
                let a = operator_norm(&m).unwrap();
                let b = operator_norm(&m.adjoint()).unwrap();
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
            }

            #[test]
            fn kernel_vectors_are_annihilated(
                coeffs in proptest::collection::vec(-2.0f64..2.0, 4),
                null_dir in 0usize..4,
            ) {
                // Four images where `null_dir` is replaced by a combination of the others,
                // guaranteeing a nontrivial kernel.
                let mut rng = ChaCha8Rng::seed_from_u64(coeffs.len() as u64 + null_dir as u64);
                let mut images: Vec<ComplexMatrix> = (0..4).map(|_| random_matrix(&mut rng, 3, 3)).collect();
                let mut combo = ComplexMatrix::zeros(3, 3);
                for (k, img) in images.iter().enumerate() {
                    if k != null_dir {
                        combo.axpy(coeffs[k], img);
                    }
                }
                images[null_dir] = combo;
                let basis = kernel_basis(&images).unwrap();
                prop_assert!(!basis.is_empty());
                let scale = images.iter().map(|m| operator_norm(m).unwrap()).fold(0.0, f64::max);
                for v in &basis {
                    let mut img = ComplexMatrix::zeros(3, 3);
                    for (k, m) in images.iter().enumerate() {
                        img.axpy(v[k], m);
                    }
                    prop_assert!(operator_norm(&img).unwrap() <= 1e-9 * scale);
                }
            }
        }
    }
}
