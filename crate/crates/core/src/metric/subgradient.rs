//! Projected subgradient descent for `min_y ‖H(y)‖`, followed by a compass-search polish.
//!
//! The affine constraint is already eliminated by the parametrization, so projection is the
//! identity in `y`. Steps follow the fixed schedule `r₀ / √(k + 1)`; no randomness is involved.

use super::{NormMinimum, NormProblem, SolverOptions};
use crate::linalg::{hermitian_eigen, hermitian_norm};

fn value(problem: &NormProblem, y: &[f64]) -> f64 {
    hermitian_norm(&problem.at(y))
}

pub(crate) fn minimize(problem: &NormProblem, opts: &SolverOptions) -> NormMinimum {
    let m = problem.directions.len();
    let mut y = vec![0.0; m];
    let mut best_y = y.clone();
    let mut best = value(problem, &y);
    if m == 0 {
        return NormMinimum {
            y,
            norm: best,
            lower: 0.0,
            iterations: 0,
        };
    }
    let dir_scale = problem
        .directions
        .iter()
        .map(hermitian_norm)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let r0 = 0.5 * best / dir_scale;
    let sub_iters = opts.max_iter / 2;

    for k in 0..sub_iters {
        let eig = hermitian_eigen(&problem.at(&y));
        let (idx, lam) = eig
            .values
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("nonempty spectrum");
        let v = eig.vector(idx);
        let sign = lam.signum();
        let g: Vec<f64> = problem
            .directions
            .iter()
            .map(|h| {
                let mut acc = 0.0;
                for a in 0..v.len() {
                    for b in 0..v.len() {
                        acc += (v[a].conj() * h[(a, b)] * v[b]).re;
                    }
                }
                sign * acc
            })
            .collect();
        let gn = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gn == 0.0 {
            break;
        }
        let step = r0 / ((k + 1) as f64).sqrt();
        y.iter_mut().zip(&g).for_each(|(a, b)| *a -= step * b / gn);
        let f = value(problem, &y);
        if f < best {
            best = f;
            best_y = y.clone();
        }
    }

    // Compass search along coordinate directions with halving steps.
    let mut iterations = sub_iters;
    let mut h = r0 * 0.1;
    let mut y = best_y;
    while h > opts.polish_tol && iterations < opts.max_iter {
        let mut improved = false;
        for j in 0..m {
            for dir in [1.0, -1.0] {
                iterations += 1;
                let mut trial = y.clone();
                trial[j] += dir * h;
                let f = value(problem, &trial);
                if f < best {
                    best = f;
                    y = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    NormMinimum {
        y,
        norm: best,
        lower: 0.0,
        iterations,
    }
}
