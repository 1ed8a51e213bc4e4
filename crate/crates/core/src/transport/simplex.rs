//! Transportation simplex on a dense bipartite instance.
//!
//! Costs are lexicographic pairs `(forbidden, cost)`: an excluded edge costs `(1, 0)` and a
//! regular edge `(0, c)`. Minimizing lexicographically first drives all mass off excluded
//! edges and then minimizes the real cost. The start basis comes from the northwest-corner rule
//! and pivots follow Bland's rule (lowest-index entering cell, lowest-index leaving cell among
//! ties), which rules out cycling on degenerate bases.

use std::collections::VecDeque;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Lex {
    pub forbidden: f64,
    pub cost: f64,
}

impl Lex {
    pub fn finite(cost: f64) -> Self {
        Self {
            forbidden: 0.0,
            cost,
        }
    }

    pub fn excluded() -> Self {
        Self {
            forbidden: 1.0,
            cost: 0.0,
        }
    }
}

impl Add for Lex {
    type Output = Lex;
    fn add(self, o: Lex) -> Lex {
        Lex {
            forbidden: self.forbidden + o.forbidden,
            cost: self.cost + o.cost,
        }
    }
}

impl Sub for Lex {
    type Output = Lex;
    fn sub(self, o: Lex) -> Lex {
        Lex {
            forbidden: self.forbidden - o.forbidden,
            cost: self.cost - o.cost,
        }
    }
}

pub(crate) struct Solution {
    /// Row-major `rows × cols` flows.
    pub flow: Vec<f64>,
    pub v: Vec<Lex>,
}

const FLOW_TIE: f64 = 1e-15;

pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[Lex]) -> Result<Solution> {
    let (n, m) = (supply.len(), demand.len());
    debug_assert_eq!(cost.len(), n * m);
    let cost_scale = cost.iter().map(|c| c.cost.abs()).fold(0.0, f64::max);
    let reduced_tol = 1e-12 * (1.0 + cost_scale);

    let mut flow = vec![0.0; n * m];
    let mut basic = vec![false; n * m];
    northwest_corner(supply, demand, &mut flow, &mut basic);

    let max_pivots = 50 * n * m + 1000;
    let mut pivots = 0;
    loop {
        let (u, v) = potentials(n, m, &basic, cost);
        let entering = (0..n * m).find(|&cell| {
            if basic[cell] {
                return false;
            }
            let r = cost[cell] - u[cell / m] - v[cell % m];
            r.forbidden < -0.5 || (r.forbidden.abs() < 0.5 && r.cost < -reduced_tol)
        });
        let Some(entering) = entering else {
            return Ok(Solution { flow, v });
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Lp(format!(
                "transportation simplex exceeded {max_pivots} pivots"
            )));
        }

        let cycle = tree_path(n, m, &basic, entering % m, entering / m);
        // Cells along the path alternate −, +, −, ... starting next to the entering column.
        let minus: Vec<usize> = cycle.iter().step_by(2).copied().collect();
        let plus: Vec<usize> = cycle.iter().skip(1).step_by(2).copied().collect();
        let theta_min = minus.iter().map(|&c| flow[c]).fold(f64::INFINITY, f64::min);
        let leaving = *minus
            .iter()
            .filter(|&&c| flow[c] <= theta_min + FLOW_TIE)
            .min()
            .expect("cycle has a decreasing cell");
        let theta = flow[leaving];

        flow[entering] += theta;
        for &c in &plus {
            flow[c] += theta;
        }
        for &c in &minus {
            flow[c] = (flow[c] - theta).max(0.0);
        }
        flow[leaving] = 0.0;
        basic[leaving] = false;
        basic[entering] = true;
    }
}

fn northwest_corner(supply: &[f64], demand: &[f64], flow: &mut [f64], basic: &mut [bool]) {
    let (n, m) = (supply.len(), demand.len());
    let mut ra = supply.to_vec();
    let mut rb = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]).max(0.0);
        flow[i * m + j] = x;
        basic[i * m + j] = true;
        ra[i] -= x;
        rb[j] -= x;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if i == n - 1 {
            j += 1;
        } else if j == m - 1 || ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
}

/// Node potentials with `u_i + v_j = c_ij` on basic cells and `u_0 = 0`.
fn potentials(n: usize, m: usize, basic: &[bool], cost: &[Lex]) -> (Vec<Lex>, Vec<Lex>) {
    let mut u = vec![None; n];
    let mut v = vec![None; m];
    u[0] = Some(Lex::default());
    let mut queue = VecDeque::from([0usize]);
    // Nodes 0..n are rows, n..n+m columns.
    while let Some(node) = queue.pop_front() {
        if node < n {
            let ui = u[node].expect("visited");
            for j in 0..m {
                if basic[node * m + j] && v[j].is_none() {
                    v[j] = Some(cost[node * m + j] - ui);
                    queue.push_back(n + j);
                }
            }
        } else {
            let j = node - n;
            let vj = v[j].expect("visited");
            for i in 0..n {
                if basic[i * m + j] && u[i].is_none() {
                    u[i] = Some(cost[i * m + j] - vj);
                    queue.push_back(i);
                }
            }
        }
    }
    (
        u.into_iter()
            .map(|x| x.expect("basis spans all rows"))
            .collect(),
        v.into_iter()
            .map(|x| x.expect("basis spans all columns"))
            .collect(),
    )
}

/// Basic cells on the tree path from column `col` to row `row`, in order.
fn tree_path(n: usize, m: usize, basic: &[bool], col: usize, row: usize) -> Vec<usize> {
    let start = n + col;
    let mut parent: Vec<Option<usize>> = vec![None; n + m];
    let mut seen = vec![false; n + m];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == row {
            break;
        }
        let neighbours: Vec<usize> = if node < n {
            (0..m)
                .filter(|&j| basic[node * m + j])
                .map(|j| n + j)
                .collect()
        } else {
            (0..n).filter(|&i| basic[i * m + (node - n)]).collect()
        };
        for next in neighbours {
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some(node);
                queue.push_back(next);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = row;
    while node != start {
        let prev = parent[node].expect("basis is a spanning tree");
        let (r, c) = if node < n {
            (node, prev - n)
        } else {
            (prev, node - n)
        };
        cells.push(r * m + c);
        node = prev;
    }
    cells.reverse();
    cells
}
