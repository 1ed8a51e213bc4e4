//! Worked examples and property sweeps.
//!
//! The three-point example is `ℂ³` acting diagonally on `ℂ³` with
//!
//! ```text
//!     ⎡0 0 α⎤
//! D = ⎢0 0 β⎥
//!     ⎣α β 0⎦
//! ```
//!
//! for which `‖[D, diag z]‖ = √(α²(z₃−z₁)² + β²(z₃−z₂)²)`. For states `φ = Σ λᵢ δᵢ` and
//! `φ′ = Σ λ′ᵢ δᵢ` with `Λᵢ = λᵢ − λ′ᵢ`, transport moves mass along the legs of a right triangle
//! (`W = |Λ₁|/α + |Λ₂|/β` when `Λ₁Λ₂ ≥ 0`) while the spectral distance is its hypotenuse
//! (`d = √(Λ₁²/α² + Λ₂²/β²)`).

mod m2;
pub mod random;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;
use crate::metric::{cost_matrix, spectral_distance, CostMatrix, SolverOptions};
use crate::transport::wasserstein_primal;
use crate::triple::{FiniteSpectralTriple, State};

pub use m2::{
    circle_states, dirac_axis, fibonacci_sphere, m2_equality_probe, m2_equality_probe_sizes,
    random_same_height_pair, ProbeResult,
};

/// Tolerance for comparisons against the closed forms.
pub const CLOSED_FORM_TOL: f64 = 1e-4;
/// Allowed negative slack in `d ≤ W`.
pub const INEQUALITY_TOL: f64 = 1e-6;
/// Tolerance for `d = W` on segments between two pure states.
pub const SEGMENT_TOL: f64 = 1e-5;

/// Writes non-finite values as the strings `"inf"`, `"-inf"` and `"nan"`.
pub fn serialize_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn serialize_extended_opt<S: Serializer>(
    x: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_extended(v, s),
        None => s.serialize_none(),
    }
}

/// Couplings `α`, `β` of the three-point example.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct C3Params {
    pub alpha: f64,
    pub beta: f64,
}

impl C3Params {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidAlgebra(format!(
                "couplings must be positive and finite, got α = {alpha}, β = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Like [`C3Params::new`] but also accepts zero couplings, which disconnect a point.
    pub fn allowing_zero(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidAlgebra(format!(
                "couplings must be nonnegative and finite, got α = {alpha}, β = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn dirac(&self) -> HermitianOperator {
        HermitianOperator::from_real_rows(&[
            vec![0.0, 0.0, self.alpha],
            vec![0.0, 0.0, self.beta],
            vec![self.alpha, self.beta, 0.0],
        ])
        .expect("real symmetric")
    }
}

/// `ℂ³` acting diagonally on `ℂ³` with the three-point Dirac operator.
pub fn c3_triple(p: &C3Params) -> FiniteSpectralTriple {
    FiniteSpectralTriple::diagonal(p.dirac()).expect("3×3 Dirac matches ℂ³")
}

/// `(W, d)` for same-sign `Λ₁`, `Λ₂`.
pub fn triangle_closed_forms(p: &C3Params, lam1: f64, lam2: f64) -> Result<(f64, f64)> {
    if lam1 * lam2 < 0.0 {
        return Err(Error::HypothesisViolated(format!(
            "Λ₁ = {lam1} and Λ₂ = {lam2} have opposite signs"
        )));
    }
    let (a, b) = (lam1 / p.alpha, lam2 / p.beta);
    Ok((a.abs() + b.abs(), a.hypot(b)))
}

/// A pair of states of `ℂ³` with `λᵢ − λ′ᵢ = Λᵢ` for `i = 1, 2`.
///
/// The common part `ε` is chosen as large as possible while keeping both states in the simplex,
/// so the two states are generally mixed.
pub fn states_with_differences(lam1: f64, lam2: f64) -> Result<(State, State)> {
    let pos = lam1.max(0.0) + lam2.max(0.0);
    let neg = (-lam1).max(0.0) + (-lam2).max(0.0);
    if pos.max(neg) > 1.0 {
        return Err(Error::InvalidState(format!(
            "no pair of states has differences ({lam1}, {lam2})"
        )));
    }
    let eps = (1.0 - pos.max(neg)) / 4.0;
    let phi = [lam1.max(0.0) + eps, lam2.max(0.0) + eps];
    let psi = [(-lam1).max(0.0) + eps, (-lam2).max(0.0) + eps];
    let state = |w: [f64; 2]| State::probability(vec![w[0], w[1], 1.0 - w[0] - w[1]]);
    Ok((state(phi)?, state(psi)?))
}

/// `Λ ∈ {0, 0.05, …, 0.45}²`.
pub fn default_lambda_grid() -> Vec<(f64, f64)> {
    let steps: Vec<f64> = (0..10).map(|k| k as f64 * 0.05).collect();
    steps
        .iter()
        .flat_map(|&a| steps.iter().map(move |&b| (a, b)))
        .collect()
}

/// Numerical `d` and `W` against the closed forms for one `(Λ₁, Λ₂)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub d_value: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub w_value: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub gap: f64,
    #[serde(serialize_with = "serialize_extended_opt")]
    pub closed_form_d: Option<f64>,
    #[serde(serialize_with = "serialize_extended_opt")]
    pub closed_form_w: Option<f64>,
    pub d_pass: bool,
    pub w_pass: bool,
    pub gap_pass: bool,
    pub pass: bool,
}

fn gap(w: f64, d: f64) -> f64 {
    if w == d {
        0.0
    } else {
        w - d
    }
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    x == y || (x - y).abs() <= tol
}

fn compare_pair(
    p: &C3Params,
    triple: &FiniteSpectralTriple,
    cost: &CostMatrix,
    (lam1, lam2): (f64, f64),
    opts: &SolverOptions,
) -> Result<ComparisonReport> {
    let (phi, psi) = states_with_differences(lam1, lam2)?;
    let d = spectral_distance(triple, &phi, &psi, opts)?.value;
    let w = wasserstein_primal(
        cost,
        phi.weights().expect("probability"),
        psi.weights().expect("probability"),
    )?
    .value;
    let closed = triangle_closed_forms(p, lam1, lam2).ok();
    let (d_pass, w_pass) = match closed {
        Some((cw, cd)) => (close(d, cd, CLOSED_FORM_TOL), close(w, cw, CLOSED_FORM_TOL)),
        None => (true, true),
    };
    let gap = gap(w, d);
    let gap_pass = gap >= -INEQUALITY_TOL;
    Ok(ComparisonReport {
        lambda1: lam1,
        lambda2: lam2,
        d_value: d,
        w_value: w,
        gap,
        closed_form_d: closed.map(|c| c.1),
        closed_form_w: closed.map(|c| c.0),
        d_pass,
        w_pass,
        gap_pass,
        pass: d_pass && w_pass && gap_pass,
    })
}

/// Compares `d` and `W` with the closed forms over `grid`.
///
/// Pairs with opposite signs are checked only for `d ≤ W`.
pub fn verify_closed_forms(
    p: &C3Params,
    grid: &[(f64, f64)],
    opts: &SolverOptions,
) -> Result<Vec<ComparisonReport>> {
    let triple = c3_triple(p);
    let cost = cost_matrix(&triple, opts)?;
    grid.par_iter()
        .map(|&lam| compare_pair(p, &triple, &cost, lam, opts))
        .collect()
}

/// A state pair that violated `d ≤ W`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub d: f64,
    pub w: f64,
}

/// Outcome of [`verify_inequality`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub seed: u64,
    pub trials: usize,
    /// Largest `W − d` observed.
    #[serde(serialize_with = "serialize_extended")]
    pub max_gap: f64,
    /// Smallest `W − d` observed.
    #[serde(serialize_with = "serialize_extended")]
    pub min_slack: f64,
    pub violations: Vec<Violation>,
    pub pass: bool,
}

/// Checks `d ≤ W + 1e-6` on `trials` random state pairs drawn uniformly from the simplex.
pub fn verify_inequality(
    triple: &FiniteSpectralTriple,
    trials: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<InequalityReport> {
    let cost = cost_matrix(triple, opts)?;
    let n = triple.algebra().size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(State, State)> = (0..trials)
        .map(|_| {
            (
                random::probability_state(&mut rng, n),
                random::probability_state(&mut rng, n),
            )
        })
        .collect();
    let results: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|(phi, psi)| {
            let d = spectral_distance(triple, phi, psi, opts)?.value;
            let w =
                wasserstein_primal(&cost, phi.weights().unwrap(), psi.weights().unwrap())?.value;
            Ok((d, w))
        })
        .collect::<Result<_>>()?;

    let mut max_gap = f64::NEG_INFINITY;
    let mut min_slack = f64::INFINITY;
    let mut violations = Vec::new();
    for (trial, ((phi, psi), &(d, w))) in pairs.iter().zip(&results).enumerate() {
        let g = gap(w, d);
        if !g.is_nan() {
            max_gap = max_gap.max(g);
            min_slack = min_slack.min(g);
        }
        if g.is_nan() || g < -INEQUALITY_TOL {
            violations.push(Violation {
                trial,
                phi: phi.weights().unwrap().to_vec(),
                psi: psi.weights().unwrap().to_vec(),
                d,
                w,
            });
        }
    }
    Ok(InequalityReport {
        seed,
        trials,
        max_gap,
        min_slack,
        pass: violations.is_empty(),
        violations,
    })
}

/// One segment `φ_λ = λ δᵢ + (1 − λ) δⱼ` evaluated at `λ₁`, `λ₂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentReport {
    pub i: usize,
    pub j: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub d: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub w: f64,
    pub pass: bool,
}

/// Compares `d` and `W` at two points of a segment between the pure states `i` and `j`.
pub fn segment_check(
    triple: &FiniteSpectralTriple,
    cost: &CostMatrix,
    (i, j): (usize, usize),
    (lam1, lam2): (f64, f64),
    opts: &SolverOptions,
) -> Result<SegmentReport> {
    let (di, dj) = (triple.pure_state(i)?, triple.pure_state(j)?);
    let phi = di.mix(&dj, lam1)?;
    let psi = di.mix(&dj, lam2)?;
    let d = spectral_distance(triple, &phi, &psi, opts)?.value;
    let w = wasserstein_primal(cost, phi.weights().unwrap(), psi.weights().unwrap())?.value;
    Ok(SegmentReport {
        i,
        j,
        lambda1: lam1,
        lambda2: lam2,
        d,
        w,
        pass: close(d, w, SEGMENT_TOL),
    })
}

/// `segments` random segments on random commutative triples with at most `max_n` points.
pub fn verify_segments(
    segments: usize,
    max_n: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<SegmentReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<_> = (0..segments)
        .map(|_| {
            let triple = random::commutative_triple(&mut rng, max_n)?;
            let n = triple.algebra().size();
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let lam = (rng.random::<f64>(), rng.random::<f64>());
            Ok((triple, (i, j), lam))
        })
        .collect::<Result<_>>()?;
    cases
        .par_iter()
        .map(|(triple, ij, lam)| {
            let cost = cost_matrix(triple, opts)?;
            segment_check(triple, &cost, *ij, *lam, opts)
        })
        .collect()
}

/// Sampled `M₂(ℂ)` transport values for one state pair at several sample counts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeSeries {
    pub rho1: [f64; 3],
    pub rho2: [f64; 3],
    pub results: Vec<ProbeResult>,
    /// `w_grid ≥ d − 1e-6` at every sample count.
    pub pass: bool,
}

/// The probe on `pairs` random same-height pairs for `D = σₓ + 0.3 σ_z + 0.2·I`.
pub fn probe_series(
    pairs: usize,
    sizes: &[usize],
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<ProbeSeries>> {
    let dirac = probe_dirac();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<(State, State)> = (0..pairs)
        .map(|_| random_same_height_pair(&mut rng, &dirac))
        .collect::<Result<_>>()?;
    states
        .iter()
        .map(|(a, b)| {
            let results = m2_equality_probe_sizes(&dirac, a, b, sizes, opts)?;
            Ok(ProbeSeries {
                rho1: a.bloch_vector().unwrap(),
                rho2: b.bloch_vector().unwrap(),
                pass: results.iter().all(|r| r.gap() >= -INEQUALITY_TOL),
                results,
            })
        })
        .collect()
}

/// Dirac operator used by [`probe_series`].
pub fn probe_dirac() -> HermitianOperator {
    HermitianOperator::from_real_rows(&[vec![0.5, 1.0], vec![1.0, -0.1]]).expect("symmetric")
}

/// Median of `w_grid − d` across series, per sample count.
pub fn median_gaps(series: &[ProbeSeries]) -> Vec<f64> {
    let Some(first) = series.first() else {
        return Vec::new();
    };
    (0..first.results.len())
        .map(|k| {
            let mut g: Vec<f64> = series.iter().map(|s| s.results[k].gap()).collect();
            g.sort_by(f64::total_cmp);
            let m = g.len();
            if m % 2 == 1 {
                g[m / 2]
            } else {
                0.5 * (g[m / 2 - 1] + g[m / 2])
            }
        })
        .collect()
}

/// Distances on the three-point example with `α = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisconnectedReport {
    #[serde(serialize_with = "serialize_extended")]
    pub d12: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub d23: f64,
    /// Transport between states that differ on the isolated point.
    #[serde(serialize_with = "serialize_extended")]
    pub w_moving: f64,
    /// Transport between states that agree on the isolated point.
    #[serde(serialize_with = "serialize_extended")]
    pub w_staying: f64,
    pub pass: bool,
}

pub fn disconnected_check(opts: &SolverOptions) -> Result<DisconnectedReport> {
    let triple = c3_triple(&C3Params::allowing_zero(0.0, 1.0)?);
    let cost = cost_matrix(&triple, opts)?;
    let w = |a: &[f64], b: &[f64]| wasserstein_primal(&cost, a, b).map(|s| s.value);
    let w_moving = w(&[0.5, 0.25, 0.25], &[0.2, 0.3, 0.5])?;
    let w_staying = w(&[0.5, 0.25, 0.25], &[0.5, 0.5, 0.0])?;
    let (d12, d23) = (cost.get(0, 1), cost.get(1, 2));
    Ok(DisconnectedReport {
        d12,
        d23,
        w_moving,
        w_staying,
        pass: d12 == f64::INFINITY
            && close(d23, 1.0, CLOSED_FORM_TOL)
            && w_moving == f64::INFINITY
            && close(w_staying, 0.25, CLOSED_FORM_TOL),
    })
}

/// Parameters of [`run_repro`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReproConfig {
    pub seed: u64,
    /// Largest sample count of the `M₂(ℂ)` probe; it also runs at a half and a quarter of it.
    pub samples: usize,
    pub inequality_trials: usize,
    pub segments: usize,
    pub probe_pairs: usize,
}

impl Default for ReproConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: 128,
            inequality_trials: 100,
            segments: 50,
            probe_pairs: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormBlock {
    pub params: C3Params,
    pub rows: Vec<ComparisonReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeBlock {
    pub series: Vec<ProbeSeries>,
    pub median_gaps: Vec<f64>,
    /// Every pair satisfies the bound and the median gap strictly decreases.
    pub pass: bool,
}

/// Every check in one deterministic report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproReport {
    pub config: ReproConfig,
    pub closed_forms: Vec<ClosedFormBlock>,
    pub opposite_signs: Vec<ComparisonReport>,
    pub inequality: InequalityReport,
    pub segments: Vec<SegmentReport>,
    pub disconnected: DisconnectedReport,
    pub probe: ProbeBlock,
    pub pass: bool,
}

/// Couplings at which the closed forms are checked.
pub const CLOSED_FORM_SETTINGS: [(f64, f64); 3] = [(1.0, 1.0), (1.0, 2.0), (2.0, 0.5)];

pub fn run_repro(config: &ReproConfig, opts: &SolverOptions) -> Result<ReproReport> {
    let grid = default_lambda_grid();
    let closed_forms = CLOSED_FORM_SETTINGS
        .iter()
        .map(|&(a, b)| {
            let params = C3Params::new(a, b)?;
            let rows = verify_closed_forms(&params, &grid, opts)?;
            Ok(ClosedFormBlock {
                params,
                pass: rows.iter().all(|r| r.pass),
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let opposite: Vec<(f64, f64)> = vec![(0.3, -0.2), (-0.4, 0.1), (0.15, -0.45), (-0.25, 0.25)];
    let opposite_signs = verify_closed_forms(&C3Params::new(1.0, 1.0)?, &opposite, opts)?;

    let inequality = verify_inequality(
        &c3_triple(&C3Params::new(1.0, 1.0)?),
        config.inequality_trials,
        config.seed,
        opts,
    )?;
    let segments = verify_segments(config.segments, 5, config.seed.wrapping_add(1), opts)?;
    let disconnected = disconnected_check(opts)?;

    let sizes = [config.samples / 4, config.samples / 2, config.samples];
    let series = probe_series(
        config.probe_pairs,
        &sizes,
        config.seed.wrapping_add(2),
        opts,
    )?;
    let medians = median_gaps(&series);
    let probe = ProbeBlock {
        pass: series.iter().all(|s| s.pass) && medians.windows(2).all(|w| w[1] < w[0]),
        median_gaps: medians,
        series,
    };

    let pass = closed_forms.iter().all(|b| b.pass)
        && opposite_signs.iter().all(|r| r.pass)
        && inequality.pass
        && segments.iter().all(|s| s.pass)
        && disconnected.pass
        && probe.pass;
    Ok(ReproReport {
        config: *config,
        closed_forms,
        opposite_signs,
        inequality,
        segments,
        disconnected,
        probe,
        pass,
    })
}
