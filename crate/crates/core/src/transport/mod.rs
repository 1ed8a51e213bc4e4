//! Wasserstein-1 distance on finite spaces.
//!
//! [`wasserstein_primal`] solves the transportation problem `min Σ π_ij c_ij` over couplings of
//! `μ` and `ν`; [`kantorovich_dual`] returns an optimal 1-Lipschitz potential `f` maximizing
//! `Σ f_i (μ_i − ν_i)`; [`spectral_wasserstein`] plugs in the pure-state spectral distances as the
//! cost.

mod flow;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{cost_matrix, CostMatrix, SolverOptions};
use crate::triple::{AlgebraElement, FiniteSpectralTriple, State};
use crate::C64;
use simplex::Lex;

/// Weights below this are treated as exact zeros.
pub const ZERO_WEIGHT: f64 = 1e-15;
/// Tolerance on the total mass of each marginal.
pub const MASS_TOL: f64 = 1e-12;

/// A coupling of `mu` and `nu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    pi: Vec<f64>,
    mu: Vec<f64>,
    nu: Vec<f64>,
}

impl TransportPlan {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pi[i * self.cols + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.pi
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.pi.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Largest deviation of a row or column sum from its marginal.
    pub fn marginal_error(&self) -> f64 {
        let rows = (0..self.rows)
            .map(|i| ((0..self.cols).map(|j| self.get(i, j)).sum::<f64>() - self.mu[i]).abs());
        let cols = (0..self.cols)
            .map(|j| ((0..self.rows).map(|i| self.get(i, j)).sum::<f64>() - self.nu[j]).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// `Σ π_ij c_ij`, skipping zero-mass cells so that unused infinite edges do not contribute.
    pub fn cost(&self, cost: &CostMatrix) -> f64 {
        let mut total = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let p = self.get(i, j);
                if p != 0.0 {
                    total += p * cost.get(i, j);
                }
            }
        }
        total
    }
}

/// A potential `f` with `f_i − f_j ≤ c_ij`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPotential {
    pub f: Vec<f64>,
}

impl DualPotential {
    /// `Σ f_i (μ_i − ν_i)`.
    pub fn value(&self, mu: &[f64], nu: &[f64]) -> f64 {
        self.f
            .iter()
            .zip(mu.iter().zip(nu))
            .map(|(f, (a, b))| f * (a - b))
            .sum()
    }

    /// Largest `f_i − f_j − c_ij` over finite entries.
    pub fn lipschitz_violation(&self, cost: &CostMatrix) -> f64 {
        let n = self.f.len();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                let c = cost.get(i, j);
                if c.is_finite() {
                    worst = worst.max(self.f[i] - self.f[j] - c);
                }
            }
        }
        worst
    }

    /// The potential read as a self-adjoint element of `ℂⁿ`.
    pub fn to_element(&self) -> AlgebraElement {
        AlgebraElement::Diagonal(self.f.iter().map(|&x| C64::new(x, 0.0)).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrimalSolution {
    /// Optimal cost, `+∞` when every coupling uses an infinite edge.
    pub value: f64,
    pub plan: TransportPlan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub value: f64,
    pub potential: DualPotential,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralWasserstein {
    pub value: f64,
    pub plan: TransportPlan,
    /// Present when all pure-state distances are finite.
    pub potential: Option<DualPotential>,
}

fn clean_marginal(w: &[f64], name: &str, n: usize) -> Result<Vec<f64>> {
    if w.len() != n {
        return Err(Error::InvalidMarginals(format!(
            "{name} has {} entries, cost has size {n}",
            w.len()
        )));
    }
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidMarginals(format!(
            "{name} has a negative or non-finite weight"
        )));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidMarginals(format!(
            "{name} sums to {sum}, not 1"
        )));
    }
    Ok(w.iter()
        .map(|&x| if x < ZERO_WEIGHT { 0.0 } else { x })
        .collect())
}

struct Solved {
    value: f64,
    plan: TransportPlan,
    /// Column potentials (finite part) indexed by point, `None` for inactive columns.
    v: Vec<Option<f64>>,
}

fn solve_primal(cost: &CostMatrix, mu: &[f64], nu: &[f64]) -> Result<Solved> {
    let n = cost.size();
    let mu = clean_marginal(mu, "mu", n)?;
    let nu = clean_marginal(nu, "nu", n)?;
    let rows: Vec<usize> = (0..n).filter(|&i| mu[i] > 0.0).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| nu[j] > 0.0).collect();
    let supply: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| nu[j]).collect();
    let (r, c) = (rows.len(), cols.len());

    let allowed: Vec<bool> = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
        .map(|(i, j)| cost.get(i, j).is_finite())
        .collect();
    let mass = supply.iter().sum::<f64>().min(demand.iter().sum());
    let feasible = flow::max_flow(&supply, &demand, &allowed) >= mass - MASS_TOL;

    let mut pi = vec![0.0; n * n];
    if !feasible {
        for &i in &rows {
            for &j in &cols {
                pi[i * n + j] = mu[i] * nu[j];
            }
        }
        return Ok(Solved {
            value: f64::INFINITY,
            plan: TransportPlan {
                rows: n,
                cols: n,
                pi,
                mu,
                nu,
            },
            v: vec![None; n],
        });
    }

    let lex: Vec<Lex> = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
        .map(|(i, j)| {
            let x = cost.get(i, j);
            if x.is_finite() {
                Lex::finite(x)
            } else {
                Lex::excluded()
            }
        })
        .collect();
    let sol = simplex::solve(&supply, &demand, &lex)?;
    let mut value = 0.0;
    for a in 0..r {
        for b in 0..c {
            let x = sol.flow[a * c + b];
            if x == 0.0 {
                continue;
            }
            let cij = cost.get(rows[a], cols[b]);
            if !cij.is_finite() {
                if x > MASS_TOL {
                    return Err(Error::Lp(
                        "optimal plan routes mass over an infinite edge".into(),
                    ));
                }
                continue;
            }
            pi[rows[a] * n + cols[b]] = x;
            value += x * cij;
        }
    }
    let mut v = vec![None; n];
    for (b, &j) in cols.iter().enumerate() {
        v[j] = Some(sol.v[b].cost);
    }
    Ok(Solved {
        value,
        plan: TransportPlan {
            rows: n,
            cols: n,
            pi,
            mu,
            nu,
        },
        v,
    })
}

/// Optimal transport cost between `mu` and `nu` under `cost`.
pub fn wasserstein_primal(cost: &CostMatrix, mu: &[f64], nu: &[f64]) -> Result<PrimalSolution> {
    let s = solve_primal(cost, mu, nu)?;
    Ok(PrimalSolution {
        value: s.value,
        plan: s.plan,
    })
}

/// Maximum of `Σ f_i (μ_i − ν_i)` over potentials with `f_i − f_j ≤ c_ij`.
///
/// The potential is the c-transform of the optimal column potentials of the transport problem
/// on the metric closure of `cost`, shifted so that `min f = 0`. When `cost` satisfies the
/// triangle inequality the value equals [`wasserstein_primal`].
pub fn kantorovich_dual(cost: &CostMatrix, mu: &[f64], nu: &[f64]) -> Result<DualSolution> {
    if !cost.is_finite() {
        return Err(Error::Unsupported(
            "the dual formulation needs a finite cost matrix".into(),
        ));
    }
    let closure = cost.metric_closure();
    let s = solve_primal(&closure, mu, nu)?;
    let n = cost.size();
    let mut f: Vec<f64> = (0..n)
        .map(|i| {
            s.v.iter()
                .enumerate()
                .filter_map(|(j, vj)| vj.map(|vj| closure.get(i, j) - vj))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let shift = f.iter().copied().fold(f64::INFINITY, f64::min);
    f.iter_mut().for_each(|x| *x -= shift);
    let potential = DualPotential { f };
    Ok(DualSolution {
        value: potential.value(s.plan.mu(), s.plan.nu()),
        potential,
    })
}

/// `W_D(φ, ψ)` for probability states of a commutative triple, with cost the pure-state spectral
/// distance.
pub fn spectral_wasserstein(
    triple: &FiniteSpectralTriple,
    phi: &State,
    psi: &State,
    opts: &SolverOptions,
) -> Result<SpectralWasserstein> {
    let cost = cost_matrix(triple, opts)?;
    spectral_wasserstein_with_cost(&cost, phi, psi)
}

/// [`spectral_wasserstein`] with a precomputed pure-state cost matrix.
pub fn spectral_wasserstein_with_cost(
    cost: &CostMatrix,
    phi: &State,
    psi: &State,
) -> Result<SpectralWasserstein> {
    let (Some(mu), Some(nu)) = (phi.weights(), psi.weights()) else {
        return Err(Error::WrongAlgebra {
            expected: "commutative",
        });
    };
    let primal = wasserstein_primal(cost, mu, nu)?;
    let potential = if cost.is_finite() {
        Some(kantorovich_dual(cost, mu, nu)?.potential)
    } else {
        None
    };
    Ok(SpectralWasserstein {
        value: primal.value,
        plan: primal.plan,
        potential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c3_cost(alpha: f64, beta: f64) -> CostMatrix {
        let c12 = (1.0 / (alpha * alpha) + 1.0 / (beta * beta)).sqrt();
        CostMatrix::from_rows(&[
            vec![0.0, c12, 1.0 / alpha],
            vec![c12, 0.0, 1.0 / beta],
            vec![1.0 / alpha, 1.0 / beta, 0.0],
        ])
        .unwrap()
    }

    /// Brute force over the vertices of the 3×3 transportation polytope: every basic feasible
    /// solution is determined by the choice of 5 support cells forming a spanning tree.
    fn vertex_enumeration(cost: &CostMatrix, mu: &[f64], nu: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << 9) {
            if mask.count_ones() != 5 {
                continue;
            }
            let cells: Vec<usize> = (0..9).filter(|k| mask & (1 << k) != 0).collect();
            // Marginal equations restricted to the 5 cells, solved through the normal equations.
            let mut a = [[0.0f64; 5]; 6];
            for (col, &cell) in cells.iter().enumerate() {
                a[cell / 3][col] = 1.0;
                a[3 + cell % 3][col] = 1.0;
            }
            let b: Vec<f64> = mu.iter().chain(nu).copied().collect();
            let mut ata = vec![0.0; 25];
            let mut atb = vec![0.0; 5];
            for r in 0..6 {
                for i in 0..5 {
                    atb[i] += a[r][i] * b[r];
                    for j in 0..5 {
                        ata[i * 5 + j] += a[r][i] * a[r][j];
                    }
                }
            }
            let Some(x) = crate::linalg::solve_linear(ata, atb) else {
                continue;
            };
            if x.iter().any(|&v| v < -1e-12) {
                continue;
            }
            let residual = (0..6)
                .map(|r| ((0..5).map(|i| a[r][i] * x[i]).sum::<f64>() - b[r]).abs())
                .fold(0.0, f64::max);
            if residual > 1e-12 {
                continue;
            }
            let value: f64 = cells
                .iter()
                .zip(&x)
                .map(|(&c, &v)| v * cost.get(c / 3, c % 3))
                .sum();
            best = best.min(value);
        }
        best
    }

    #[test]
    fn point_masses_force_the_plan() {
        let cost = c3_cost(1.0, 2.0);
        let s = wasserstein_primal(&cost, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(s.value, cost.get(0, 1), epsilon = 1e-15);
        assert_eq!(s.plan.get(0, 1), 1.0);
        assert_eq!(s.plan.entries().iter().filter(|&&x| x != 0.0).count(), 1);
    }

    #[test]
    fn equal_marginals_cost_nothing() {
        let cost = c3_cost(1.0, 1.0);
        let mu = [0.2, 0.5, 0.3];
        let s = wasserstein_primal(&cost, &mu, &mu).unwrap();
        assert_eq!(s.value, 0.0);
        for i in 0..3 {
            assert_relative_eq!(s.plan.get(i, i), mu[i], epsilon = 1e-15);
        }
        let d = kantorovich_dual(&cost, &mu, &mu).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn primal_matches_vertex_enumeration() {
        let cost = c3_cost(1.0, 1.0);
        let (mu, nu) = ([0.5, 0.3, 0.2], [0.2, 0.1, 0.7]);
        let s = wasserstein_primal(&cost, &mu, &nu).unwrap();
        let oracle = vertex_enumeration(&cost, &mu, &nu);
        assert_relative_eq!(s.value, oracle, epsilon = 1e-9);
        assert!(s.plan.marginal_error() <= 1e-10);
    }

    #[test]
    fn two_point_dual() {
        let cost = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = kantorovich_dual(&cost, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_relative_eq!(d.value, 1.0, epsilon = 1e-15);
        assert_eq!(d.potential.f, vec![1.0, 0.0]);
    }

    #[test]
    fn dual_refuses_infinite_costs() {
        let cost =
            CostMatrix::from_rows(&[vec![0.0, f64::INFINITY], vec![f64::INFINITY, 0.0]]).unwrap();
        assert!(matches!(
            kantorovich_dual(&cost, &[1.0, 0.0], &[1.0, 0.0]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn infinite_edges_are_excluded() {
        let inf = f64::INFINITY;
        let cost = CostMatrix::from_rows(&[
            vec![0.0, inf, inf],
            vec![inf, 0.0, 2.0],
            vec![inf, 2.0, 0.0],
        ])
        .unwrap();
        let s = wasserstein_primal(&cost, &[0.3, 0.7, 0.0], &[0.3, 0.2, 0.5]).unwrap();
        assert_relative_eq!(s.value, 1.0, epsilon = 1e-14);
        let s = wasserstein_primal(&cost, &[0.4, 0.6, 0.0], &[0.3, 0.2, 0.5]).unwrap();
        assert!(s.value.is_infinite());
        assert!(s.plan.marginal_error() <= 1e-15);
    }

    #[test]
    fn marginals_are_validated() {
        let cost = c3_cost(1.0, 1.0);
        assert!(wasserstein_primal(&cost, &[0.5, 0.6, 0.0], &[1.0, 0.0, 0.0]).is_err());
        assert!(wasserstein_primal(&cost, &[1.5, -0.5, 0.0], &[1.0, 0.0, 0.0]).is_err());
        assert!(wasserstein_primal(&cost, &[1.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn degenerate_instance_terminates() {
        // Many ties in supplies and demands stress degenerate pivoting.
        let n = 6;
        let cost = CostMatrix::from_upper(n, |i, j| (j - i) as f64).unwrap();
        let mu = vec![1.0 / 6.0; n];
        let mut nu = vec![0.0; n];
        nu[0] = 0.5;
        nu[5] = 0.5;
        let p = wasserstein_primal(&cost, &mu, &nu).unwrap();
        let d = kantorovich_dual(&cost, &mu, &nu).unwrap();
        assert_relative_eq!(p.value, d.value, epsilon = 1e-12);
        assert_relative_eq!(p.value, (1.0 + 2.0 + 1.0 + 2.0) / 6.0, epsilon = 1e-12);
    }
}
