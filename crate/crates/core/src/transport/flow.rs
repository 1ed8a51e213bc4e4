//! Max-flow feasibility of a transport problem restricted to allowed edges.

use std::collections::VecDeque;

const RESIDUAL_EPS: f64 = 1e-15;

/// Maximum flow from supplies to demands using only edges with `allowed[i * m + j]`.
pub(crate) fn max_flow(supply: &[f64], demand: &[f64], allowed: &[bool]) -> f64 {
    let (n, m) = (supply.len(), demand.len());
    let nodes = n + m + 2;
    let (source, sink) = (n + m, n + m + 1);
    let mut cap = vec![0.0; nodes * nodes];
    let total: f64 = supply.iter().sum::<f64>() + 1.0;
    for i in 0..n {
        cap[source * nodes + i] = supply[i];
        for j in 0..m {
            if allowed[i * m + j] {
                cap[i * nodes + n + j] = total;
            }
        }
    }
    for j in 0..m {
        cap[(n + j) * nodes + sink] = demand[j];
    }

    // Edmonds-Karp.
    let mut flow = 0.0;
    loop {
        let mut parent = vec![usize::MAX; nodes];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(a) = queue.pop_front() {
            if a == sink {
                break;
            }
            for b in 0..nodes {
                if parent[b] == usize::MAX && cap[a * nodes + b] > RESIDUAL_EPS {
                    parent[b] = a;
                    queue.push_back(b);
                }
            }
        }
        if parent[sink] == usize::MAX {
            return flow;
        }
        let mut push = f64::INFINITY;
        let mut b = sink;
        while b != source {
            let a = parent[b];
            push = push.min(cap[a * nodes + b]);
            b = a;
        }
        let mut b = sink;
        while b != source {
            let a = parent[b];
            cap[a * nodes + b] -= push;
            cap[b * nodes + a] += push;
            b = a;
        }
        flow += push;
    }
}
