//! Barrier method for `min_y ‖H(y)‖` with `H(y) = H₀ + Σ y_j H_j` Hermitian.
//!
//! The problem is written as `min t` subject to `tI − H(y) ⪰ 0` and `tI + H(y) ⪰ 0`, and the
//! log-determinant barrier of both cones is followed along the central path with damped Newton
//! steps. Each central point yields a dual matrix `Z = (P − Q) / tr(P + Q)` with
//! `P = (tI − H)⁻¹`, `Q = (tI + H)⁻¹`. After projecting out its components along the `H_j`,
//! `Re tr(Z H₀) / ‖Z‖₁` is a lower bound on the minimum that holds however loosely the point is
//! centered.

use super::{NormMinimum, NormProblem, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_norm, solve_linear, ComplexMatrix, C64};

const KAPPA_GROWTH: f64 = 8.0;
/// Newton decrement below which a point counts as centered.
const CENTERING_TOL: f64 = 1e-6;
const MAX_CENTERING_STEPS: usize = 60;
const MAX_OUTER: usize = 30;

struct Point {
    y: Vec<f64>,
    t: f64,
}

struct Local {
    lambda: Vec<f64>,
    vectors: ComplexMatrix,
}

fn local(problem: &NormProblem, y: &[f64]) -> Local {
    let eig = hermitian_eigen(&problem.at(y));
    Local {
        lambda: eig.values,
        vectors: eig.vectors,
    }
}

fn spectral_norm(lambda: &[f64]) -> f64 {
    lambda.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `V† H V`.
fn rotate(h: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    &(&v.adjoint() * h) * v
}

/// `Re tr(A B)` for Hermitian `A`, `B`.
fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x * y.conj()).re)
        .sum()
}

/// Lower bound on `min_y ‖H(y)‖` from the dual matrix `diag(z)` in the eigenbasis of `H(y)`.
fn dual_bound(z: &[f64], lambda: &[f64], g: &[ComplexMatrix]) -> f64 {
    let n = z.len();
    let m = g.len();
    let mut gram = vec![0.0; m * m];
    for j in 0..m {
        for k in j..m {
            let v = trace_product(&g[j], &g[k]);
            gram[j * m + k] = v;
            gram[k * m + j] = v;
        }
    }
    let rhs: Vec<f64> = g
        .iter()
        .map(|gj| (0..n).map(|a| z[a] * gj[(a, a)].re).sum())
        .collect();
    let Some(c) = solve_linear(gram, rhs) else {
        return 0.0;
    };
    let mut zp =
        ComplexMatrix::from_diagonal(&z.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
    for (ck, gk) in c.iter().zip(g) {
        zp.axpy(-ck, gk);
    }
    let trace_norm: f64 = hermitian_eigen(&zp).values.iter().map(|x| x.abs()).sum();
    if trace_norm <= 0.0 {
        return 0.0;
    }
    let value: f64 = (0..n).map(|a| zp[(a, a)].re * lambda[a]).sum();
    (value / trace_norm).max(0.0)
}

pub(crate) fn minimize(problem: &NormProblem, opts: &SolverOptions) -> Result<NormMinimum> {
    let n = problem.offset.rows();
    let m = problem.directions.len();
    let theta = 2.0 * n as f64;
    let start_norm = hermitian_norm(&problem.offset);
    if m == 0 {
        return Ok(NormMinimum {
            y: Vec::new(),
            norm: start_norm,
            lower: start_norm,
            iterations: 0,
        });
    }

    let mut x = Point {
        y: vec![0.0; m],
        t: if start_norm > 0.0 {
            1.5 * start_norm
        } else {
            1.0
        },
    };
    let mut kappa = theta / x.t;
    let mut iterations = 0usize;
    let mut best_y = x.y.clone();
    let mut best_norm = start_norm;
    let mut lower = 0.0_f64;
    let dim = m + 1;

    let not_converged = |iterations: usize, lower: f64, best_norm: f64| Error::NotConverged {
        iterations,
        lower: 1.0 / best_norm,
        upper: if lower > 0.0 {
            1.0 / lower
        } else {
            f64::INFINITY
        },
    };

    for _ in 0..MAX_OUTER {
        for _ in 0..MAX_CENTERING_STEPS {
            iterations += 1;
            if iterations > opts.max_iter {
                return Err(not_converged(iterations, lower, best_norm));
            }
            let loc = local(problem, &x.y);
            let p: Vec<f64> = loc.lambda.iter().map(|l| 1.0 / (x.t - l)).collect();
            let q: Vec<f64> = loc.lambda.iter().map(|l| 1.0 / (x.t + l)).collect();
            let g: Vec<ComplexMatrix> = problem
                .directions
                .iter()
                .map(|h| rotate(h, &loc.vectors))
                .collect();

            let mut grad = vec![0.0; dim];
            let mut hess = vec![0.0; dim * dim];
            for (j, gj) in g.iter().enumerate() {
                grad[j] = (0..n).map(|k| (p[k] - q[k]) * gj[(k, k)].re).sum();
                hess[j * dim + m] = (0..n)
                    .map(|k| (q[k] * q[k] - p[k] * p[k]) * gj[(k, k)].re)
                    .sum();
                hess[m * dim + j] = hess[j * dim + m];
                for (l, gl) in g.iter().enumerate().skip(j) {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            let w = p[a] * p[b] + q[a] * q[b];
                            let prod: C64 = gj[(a, b)] * gl[(a, b)].conj();
                            acc += w * prod.re;
                        }
                    }
                    hess[j * dim + l] = acc;
                    hess[l * dim + j] = acc;
                }
            }
            grad[m] = kappa - p.iter().zip(&q).map(|(a, b)| a + b).sum::<f64>();
            hess[m * dim + m] = p.iter().zip(&q).map(|(a, b)| a * a + b * b).sum();

            let norm = spectral_norm(&loc.lambda);
            if norm < best_norm {
                best_norm = norm;
                best_y = x.y.clone();
            }
            let total: f64 = p.iter().zip(&q).map(|(a, b)| a + b).sum();
            let z: Vec<f64> = p.iter().zip(&q).map(|(a, b)| (a - b) / total).collect();
            lower = lower.max(dual_bound(&z, &loc.lambda, &g)).min(best_norm);

            let Some(step) = solve_linear(hess, grad.iter().map(|v| -v).collect()) else {
                break;
            };
            let slope: f64 = grad.iter().zip(&step).map(|(a, b)| a * b).sum();
            let decrement = (-slope).max(0.0).sqrt();
            if decrement <= CENTERING_TOL {
                break;
            }
            // Damped step of a self-concordant barrier; the feasibility check guards rounding.
            let mut s = if decrement > 0.25 {
                1.0 / (1.0 + decrement)
            } else {
                1.0
            };
            let mut moved = false;
            while s > 1e-12 {
                let y: Vec<f64> = x.y.iter().zip(&step).map(|(a, b)| a + s * b).collect();
                let t = x.t + s * step[m];
                if t > spectral_norm(&local(problem, &y).lambda) {
                    x = Point { y, t };
                    moved = true;
                    break;
                }
                s *= 0.5;
            }
            if !moved {
                break;
            }
        }

        if lower > 0.0 && 1.0 / lower - 1.0 / best_norm <= 0.01 * opts.tol {
            break;
        }
        kappa *= KAPPA_GROWTH;
    }
    if lower > 0.0 && 1.0 / lower - 1.0 / best_norm <= opts.tol {
        Ok(NormMinimum {
            y: best_y,
            norm: best_norm,
            lower,
            iterations,
        })
    } else {
        Err(not_converged(iterations, lower, best_norm))
    }
}
