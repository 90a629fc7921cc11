//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use otstruct::{CostSpec, TransportProblem};

pub type Q = Rational64;

pub fn q(x: f64) -> Q {
    Q::approximate_float(x).expect("representable")
}

/// Rational copy of a problem whose data are small rationals.
pub struct RationalInstance {
    pub alpha: Vec<Q>,
    pub beta: Vec<Q>,
    pub cost: Vec<Vec<Q>>,
}

impl RationalInstance {
    pub fn from_problem(p: &TransportProblem) -> Self {
        let xs: Vec<Vec<Q>> = p.source.points.iter().map(|v| v.iter().map(|&a| q(a)).collect()).collect();
        let ys: Vec<Vec<Q>> = p.target.points.iter().map(|v| v.iter().map(|&a| q(a)).collect()).collect();
        let cost = match &p.cost {
            CostSpec::PNorm { p } if *p == 2.0 => xs
                .iter()
                .map(|x| {
                    ys.iter()
                        .map(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
                        .collect()
                })
                .collect(),
            CostSpec::Correlation => xs
                .iter()
                .map(|x| ys.iter().map(|y| -x.iter().zip(y).map(|(a, b)| a * b).sum::<Q>()).collect())
                .collect(),
            CostSpec::Matrix { values } => values.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect(),
            other => panic!("oracle has no rational form for {other:?}"),
        };
        Self {
            alpha: p.source.weights.iter().map(|&w| q(w)).collect(),
            beta: p.target.weights.iter().map(|&w| q(w)).collect(),
            cost,
        }
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }
}

/// Everything exhaustive enumeration of spanning trees of `K_{M,N}` reveals.
pub struct OracleResult {
    pub value: Q,
    /// Distinct optimal vertices, each as sorted `(i, j, mass)` with mass > 0.
    pub optimal_vertices: Vec<Vec<(usize, usize, Q)>>,
    /// Distinct optimal dual vertices with `phi_0 = 0`.
    pub optimal_duals: Vec<(Vec<Q>, Vec<Q>)>,
    /// Union of supports of the optimal vertices.
    pub union_support: BTreeSet<(usize, usize)>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn is_spanning_tree(m: usize, n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..m + n).collect();
    for &(i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Flows on a spanning tree by peeling leaves.
fn tree_flows(inst: &RationalInstance, edges: &[(usize, usize)]) -> Vec<Q> {
    let (m, n) = (inst.m(), inst.n());
    let mut rest: Vec<Q> = inst.alpha.iter().chain(&inst.beta).cloned().collect();
    let mut deg = vec![0usize; m + n];
    for &(i, j) in edges {
        deg[i] += 1;
        deg[m + j] += 1;
    }
    let mut flow = vec![Q::zero(); edges.len()];
    let mut done = vec![false; edges.len()];
    for _ in 0..edges.len() {
        let (k, leaf) = (0..edges.len())
            .filter(|&k| !done[k])
            .find_map(|k| {
                let (i, j) = edges[k];
                if deg[i] == 1 {
                    Some((k, i))
                } else if deg[m + j] == 1 {
                    Some((k, m + j))
                } else {
                    None
                }
            })
            .expect("a tree always has a leaf");
        let (i, j) = edges[k];
        let other = if leaf == i { m + j } else { i };
        flow[k] = rest[leaf];
        let moved = rest[leaf];
        rest[other] -= moved;
        rest[leaf] = Q::zero();
        done[k] = true;
        deg[i] -= 1;
        deg[m + j] -= 1;
    }
    flow
}

/// Tree dual with `phi_0 = 0`, tight on every tree edge.
fn tree_dual(inst: &RationalInstance, edges: &[(usize, usize)]) -> (Vec<Q>, Vec<Q>) {
    let (m, n) = (inst.m(), inst.n());
    let mut phi: Vec<Option<Q>> = vec![None; m];
    let mut psi: Vec<Option<Q>> = vec![None; n];
    phi[0] = Some(Q::zero());
    loop {
        let mut progress = false;
        for &(i, j) in edges {
            match (phi[i], psi[j]) {
                (Some(a), None) => {
                    psi[j] = Some(inst.cost[i][j] - a);
                    progress = true;
                }
                (None, Some(b)) => {
                    phi[i] = Some(inst.cost[i][j] - b);
                    progress = true;
                }
                _ => {}
            }
        }
        if !progress {
            break;
        }
    }
    (
        phi.into_iter().map(|v| v.expect("spanning")).collect(),
        psi.into_iter().map(|v| v.expect("spanning")).collect(),
    )
}

fn combinations(total: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > total {
        return;
    }
    loop {
        f(&idx);
        let mut p = k;
        while p > 0 && idx[p - 1] == total - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            return;
        }
        idx[p - 1] += 1;
        for r in p..k {
            idx[r] = idx[r - 1] + 1;
        }
    }
}

/// Enumerates all `(M + N - 1)`-edge spanning trees of `K_{M,N}`.
pub fn oracle(inst: &RationalInstance) -> OracleResult {
    let (m, n) = (inst.m(), inst.n());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut vertices: BTreeSet<Vec<(usize, usize, Q)>> = BTreeSet::new();
    let mut duals: Vec<(Vec<Q>, Vec<Q>, Q)> = Vec::new();
    combinations(cells.len(), m + n - 1, |pick| {
        let edges: Vec<(usize, usize)> = pick.iter().map(|&k| cells[k]).collect();
        if !is_spanning_tree(m, n, &edges) {
            return;
        }
        let flow = tree_flows(inst, &edges);
        if flow.iter().all(|f| !f.is_negative()) {
            let mut v: Vec<(usize, usize, Q)> = edges
                .iter()
                .zip(&flow)
                .filter(|(_, f)| f.is_positive())
                .map(|(&(i, j), f)| (i, j, *f))
                .collect();
            v.sort();
            vertices.insert(v);
        }
        let (phi, psi) = tree_dual(inst, &edges);
        let feasible = (0..m).all(|i| (0..n).all(|j| phi[i] + psi[j] <= inst.cost[i][j]));
        if feasible {
            let obj: Q = phi.iter().zip(&inst.alpha).map(|(a, b)| a * b).sum::<Q>()
                + psi.iter().zip(&inst.beta).map(|(a, b)| a * b).sum::<Q>();
            duals.push((phi, psi, obj));
        }
    });
    let value_of = |v: &Vec<(usize, usize, Q)>| -> Q { v.iter().map(|&(i, j, f)| f * inst.cost[i][j]).sum() };
    let value = vertices.iter().map(value_of).min().expect("the polytope has a vertex");
    let optimal_vertices: Vec<_> = vertices.into_iter().filter(|v| value_of(v) == value).collect();
    let union_support = optimal_vertices.iter().flatten().map(|&(i, j, _)| (i, j)).collect();
    let mut optimal_duals: Vec<(Vec<Q>, Vec<Q>)> =
        duals.into_iter().filter(|d| d.2 == value).map(|d| (d.0, d.1)).collect();
    optimal_duals.sort();
    optimal_duals.dedup();
    OracleResult {
        value,
        optimal_vertices,
        optimal_duals,
        union_support,
    }
}

pub fn to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}
