//! Sampled transport probe on the Bloch ball of `M₂(ℂ)`.
//!
//! Writing `D = d₀ I + d·σ`, the commutator norm is `‖[D, a]‖ = 2 |d × a|`, so two states are at
//! finite spectral distance only when their Bloch vectors have the same height `h = r·d̂`. The
//! pure states at height `h` form a circle, and the spectral distance between two of them is the
//! chord length over `2|d|`. The probe samples `N` equally spaced points on that circle and
//! minimizes the transport cost over all couplings whose marginals have barycenters `r₁` and
//! `r₂`. Any such coupling gives an upper bound on the spectral distance, so the sampled value
//! dominates `d`; doubling `N` refines the sample, so the value can only decrease.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;
use crate::metric::{sampled_cost_matrix, spectral_distance, CostMatrix, SolverOptions};
use crate::triple::{FiniteSpectralTriple, State};

/// Heights closer than this are treated as equal.
const HEIGHT_TOL: f64 = 1e-9;

/// Outcome of [`m2_equality_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub samples: usize,
    #[serde(serialize_with = "super::serialize_extended")]
    pub d: f64,
    #[serde(serialize_with = "super::serialize_extended")]
    pub w_grid: f64,
}

impl ProbeResult {
    pub fn gap(&self) -> f64 {
        if self.w_grid == self.d {
            0.0
        } else {
            self.w_grid - self.d
        }
    }
}

/// `d = (d_x, d_y, d_z)` with `D = d₀ I + d·σ`.
pub fn dirac_axis(dirac: &HermitianOperator) -> Result<[f64; 3]> {
    if dirac.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 2×2 Dirac operator, got {0}×{0}",
            dirac.dim()
        )));
    }
    let m = dirac.matrix();
    Ok([
        m[(0, 1)].re,
        -m[(0, 1)].im,
        0.5 * (m[(0, 0)].re - m[(1, 1)].re),
    ])
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Orthonormal frame `(d̂, e₁, e₂)`, with `e₁` along the projection of `ẑ` when possible.
fn frame(axis: [f64; 3]) -> [[f64; 3]; 3] {
    let d = unit(axis);
    let reference = if d[2].abs() > 1.0 - 1e-12 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let t = dot(reference, d);
    let e1 = unit([
        reference[0] - t * d[0],
        reference[1] - t * d[1],
        reference[2] - t * d[2],
    ]);
    [d, e1, cross(d, e1)]
}

/// `n` points of the Fibonacci lattice on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Pure states at height `h` along `axis`, at angles `2πk/n` from the first frame vector.
pub fn circle_states(axis: [f64; 3], h: f64, n: usize) -> Result<Vec<State>> {
    let [d, e1, e2] = frame(axis);
    let rho = (1.0 - h * h).max(0.0).sqrt();
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            let (s, c) = a.sin_cos();
            let r: [f64; 3] = std::array::from_fn(|i| h * d[i] + rho * (c * e1[i] + s * e2[i]));
            State::from_bloch(r)
        })
        .collect()
}

fn bloch(state: &State) -> Result<[f64; 3]> {
    state.bloch_vector().ok_or(Error::WrongAlgebra {
        expected: "2×2 full matrix",
    })
}

/// Spectral distance and the sampled transport value for each sample count in `sizes`.
///
/// Sample counts should divide each other so that the samples are nested; the largest sample is
/// solved once and restricted for the smaller counts.
pub fn m2_equality_probe_sizes(
    dirac: &HermitianOperator,
    rho1: &State,
    rho2: &State,
    sizes: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<ProbeResult>> {
    if let Some(&n) = sizes.iter().find(|&&n| n < 8) {
        return Err(Error::Unsupported(format!(
            "probe needs at least 8 samples, got {n}"
        )));
    }
    let triple = FiniteSpectralTriple::full_matrix(dirac.clone())?;
    let d = spectral_distance(&triple, rho1, rho2, opts)?.value;
    let (r1, r2) = (bloch(rho1)?, bloch(rho2)?);
    let axis = dirac_axis(dirac)?;
    let axis_norm = dot(axis, axis).sqrt();

    let constant = |w: f64| {
        sizes
            .iter()
            .map(|&samples| ProbeResult {
                samples,
                d,
                w_grid: w,
            })
            .collect()
    };
    if d == 0.0 {
        return Ok(constant(0.0));
    }
    if axis_norm == 0.0 || d.is_infinite() {
        return Ok(constant(f64::INFINITY));
    }
    let [dh, e1, e2] = frame(axis);
    let (h1, h2) = (dot(r1, dh), dot(r2, dh));
    if (h1 - h2).abs() > HEIGHT_TOL {
        return Ok(constant(f64::INFINITY));
    }
    let h = 0.5 * (h1 + h2);
    let radius = (1.0 - h * h).max(0.0).sqrt();
    let target = |r: [f64; 3]| [dot(r, e1) / radius, dot(r, e2) / radius];
    let (t1, t2) = (target(r1), target(r2));

    let largest = *sizes.iter().max().expect("nonempty sizes");
    let states = circle_states(axis, h, largest)?;
    let cost = sampled_cost_matrix(&triple, &states, opts)?;

    sizes
        .iter()
        .map(|&n| {
            if !largest.is_multiple_of(n) {
                return Err(Error::Unsupported(format!(
                    "sample count {n} does not divide {largest}"
                )));
            }
            let stride = largest / n;
            let sub = CostMatrix::from_upper(n, |i, j| cost.get(i * stride, j * stride))?;
            let w_grid = barycentric_transport(&sub, t1, t2)?;
            Ok(ProbeResult {
                samples: n,
                d,
                w_grid,
            })
        })
        .collect()
}

/// [`m2_equality_probe_sizes`] for a single sample count.
pub fn m2_equality_probe(
    dirac: &HermitianOperator,
    rho1: &State,
    rho2: &State,
    samples: usize,
    opts: &SolverOptions,
) -> Result<ProbeResult> {
    Ok(m2_equality_probe_sizes(dirac, rho1, rho2, &[samples], opts)?[0])
}

/// Minimum of `Σ π_kl c_kl` over couplings on `n` equally spaced unit-circle points whose
/// marginals have barycenters `t1` and `t2`. `+∞` when a barycenter lies outside the polygon.
fn barycentric_transport(cost: &CostMatrix, t1: [f64; 2], t2: [f64; 2]) -> Result<f64> {
    let n = cost.size();
    let points: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let (s, c) = (std::f64::consts::TAU * k as f64 / n as f64).sin_cos();
            [c, s]
        })
        .collect();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n * n)
        .map(|kl| lp.add_var(cost.get(kl / n, kl % n), (0.0, f64::INFINITY)))
        .collect();
    lp.add_constraint(vars.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for axis in 0..2 {
        lp.add_constraint(
            vars.iter()
                .enumerate()
                .map(|(kl, &v)| (v, points[kl / n][axis])),
            ComparisonOp::Eq,
            t1[axis],
        );
        lp.add_constraint(
            vars.iter()
                .enumerate()
                .map(|(kl, &v)| (v, points[kl % n][axis])),
            ComparisonOp::Eq,
            t2[axis],
        );
    }
    match lp.solve() {
        Ok(solution) => Ok(solution.objective().max(0.0)),
        Err(minilp::Error::Infeasible) => Ok(f64::INFINITY),
        Err(e) => Err(Error::Lp(e.to_string())),
    }
}

/// Two states at a common random height along the Dirac axis, each well inside the circle of
/// pure states at that height.
pub fn random_same_height_pair(
    rng: &mut ChaCha8Rng,
    dirac: &HermitianOperator,
) -> Result<(State, State)> {
    let [d, e1, e2] = frame(dirac_axis(dirac)?);
    let h = rng.random_range(-0.6..0.6);
    let radius = (1.0f64 - h * h).sqrt();
    let mut draw = || {
        let s = 0.85 * radius * rng.random::<f64>().sqrt();
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let r: [f64; 3] =
            std::array::from_fn(|i| h * d[i] + s * (a.cos() * e1[i] + a.sin() * e2[i]));
        State::from_bloch(r)
    };
    Ok((draw()?, draw()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn sigma_x() -> HermitianOperator {
        HermitianOperator::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn axis_of_pauli_combination() {
        let d = HermitianOperator::from_real_rows(&[vec![3.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(dirac_axis(&d).unwrap(), [1.0, 0.0, 1.0]);
    }

    #[test]
    fn fibonacci_points_are_unit() {
        for p in fibonacci_sphere(50) {
            assert_relative_eq!(dot(p, p), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn equal_states_give_zero() {
        let rho = State::from_bloch([0.0, 0.3, -0.2]).unwrap();
        let r = m2_equality_probe(&sigma_x(), &rho, &rho, 16, &SolverOptions::default()).unwrap();
        assert_eq!((r.d, r.w_grid), (0.0, 0.0));
    }

    #[test]
    fn commuting_states_reduce_to_two_points() {
        let a = State::from_bloch([0.0, 0.0, 0.6]).unwrap();
        let b = State::from_bloch([0.0, 0.0, -0.2]).unwrap();
        let r = m2_equality_probe(&sigma_x(), &a, &b, 16, &SolverOptions::default()).unwrap();
        assert_relative_eq!(r.d, 0.4, epsilon = 1e-7);
        assert!((r.w_grid - r.d).abs() <= 1e-5, "{r:?}");
    }

    #[test]
    fn different_heights_are_infinitely_far() {
        let a = State::from_bloch([0.5, 0.0, 0.0]).unwrap();
        let b = State::from_bloch([0.0, 0.0, 0.0]).unwrap();
        let r = m2_equality_probe(&sigma_x(), &a, &b, 8, &SolverOptions::default()).unwrap();
        assert!(r.d.is_infinite() && r.w_grid.is_infinite());
    }

    #[test]
    fn refinement_never_increases_the_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, b) = random_same_height_pair(&mut rng, &sigma_x()).unwrap();
        let r =
            m2_equality_probe_sizes(&sigma_x(), &a, &b, &[8, 16, 32], &SolverOptions::default())
                .unwrap();
        for w in r.windows(2) {
            assert!(w[1].w_grid <= w[0].w_grid + 1e-9);
        }
        assert!(r.iter().all(|p| p.gap() >= -1e-6));
    }
}
