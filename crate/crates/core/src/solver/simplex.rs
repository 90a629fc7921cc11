//! Transportation simplex on the complete bipartite graph `K_{M,N}`.
//!
//! The basis is a spanning tree with `M + N - 1` cells (degenerate cells
//! carry zero flow). Arithmetic goes through [`Scalar`] so the same code runs
//! on `f64` and on exact rationals; only additions, subtractions and
//! comparisons are needed.
//!
//! Supplies are perturbed symbolically to `s_i + delta` and the last demand to
//! `d_N + M delta`. Every basis of the perturbed problem is nondegenerate, so
//! each pivot makes lexicographic progress and the method cannot cycle.

use std::collections::VecDeque;
use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{OtError, Result};

pub trait Scalar: Clone + PartialOrd + Debug + Send + Sync {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Lowest-index entering cell, lowest-index leaving cell on ties.
    Bland,
    /// Most negative reduced cost within rotating blocks of cells.
    BlockSearch,
}

#[derive(Debug, Clone)]
pub struct SimplexConfig<T> {
    /// Flows at or below this are zero.
    pub flow_eps: T,
    /// A cell enters only when its reduced cost is below `-cost_eps`.
    pub cost_eps: T,
    pub rule: PivotRule,
    pub max_iter: usize,
}

#[derive(Debug, Clone)]
pub struct SimplexOutput<T> {
    /// Basic cells `(i, j)` with their flows (zero flows included).
    pub basis: Vec<(usize, usize, T)>,
    /// Row potentials, normalised so that `u[0] == 0`.
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub iterations: usize,
}

const NONE: usize = usize::MAX;

/// `a + b delta` for an infinitesimal `delta > 0`.
#[derive(Debug, Clone)]
struct Flow<T> {
    a: T,
    b: i64,
}

impl<T: Scalar> Flow<T> {
    fn new(a: T, b: i64) -> Self {
        Self { a, b }
    }

    fn add(&self, o: &Self) -> Self {
        Self::new(self.a.add(&o.a), self.b + o.b)
    }

    /// Difference with the real part snapped to zero inside `eps`.
    fn sub(&self, o: &Self, eps: &T) -> Self {
        let a = self.a.sub(&o.a);
        let a = if a <= *eps && T::zero().sub(eps) <= a { T::zero() } else { a };
        Self::new(a, self.b - o.b)
    }

    /// Lexicographic `self < o`, real parts equal inside `eps`.
    fn less(&self, o: &Self, eps: &T) -> bool {
        let d = self.a.sub(&o.a);
        if d < T::zero().sub(eps) {
            true
        } else if *eps < d {
            false
        } else {
            self.b < o.b
        }
    }
}

struct Tree<'a, T> {
    m: usize,
    n: usize,
    cost: &'a [T],
    cells: Vec<usize>,
    flow: Vec<Flow<T>>,
    slot_of: Vec<usize>,
    adj: Vec<Vec<usize>>,
    parent: Vec<usize>,
    depth: Vec<usize>,
    pot: Vec<T>,
}

impl<'a, T: Scalar> Tree<'a, T> {
    fn ends(&self, cell: usize) -> (usize, usize) {
        (cell / self.n, self.m + cell % self.n)
    }

    fn northwest_corner(m: usize, n: usize, cost: &'a [T], supply: &[T], demand: &[T], eps: &T) -> Self {
        let mut tree = Tree {
            m,
            n,
            cost,
            cells: Vec::with_capacity(m + n - 1),
            flow: Vec::with_capacity(m + n - 1),
            slot_of: vec![NONE; m * n],
            adj: vec![Vec::new(); m + n],
            parent: vec![NONE; m + n],
            depth: vec![0; m + n],
            pot: vec![T::zero(); m + n],
        };
        let mut s: Vec<Flow<T>> = supply.iter().map(|v| Flow::new(v.clone(), 1)).collect();
        let mut d: Vec<Flow<T>> = demand.iter().map(|v| Flow::new(v.clone(), 0)).collect();
        d[n - 1].b = m as i64;
        let zero = Flow::new(T::zero(), 0);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = if s[i].less(&d[j], eps) { s[i].clone() } else { d[j].clone() };
            s[i] = s[i].sub(&x, eps);
            d[j] = d[j].sub(&x, eps);
            tree.push(i * n + j, x);
            if i == m - 1 && j == n - 1 {
                break;
            }
            let row_done = !zero.less(&s[i], eps);
            if (row_done && i < m - 1) || j == n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        tree
    }

    fn push(&mut self, cell: usize, x: Flow<T>) {
        let slot = self.cells.len();
        self.cells.push(cell);
        self.flow.push(x);
        self.slot_of[cell] = slot;
        let (a, b) = self.ends(cell);
        self.adj[a].push(slot);
        self.adj[b].push(slot);
    }

    /// Recomputes parents, depths and potentials by BFS from row 0.
    fn refresh(&mut self) -> Result<()> {
        let total = self.m + self.n;
        let mut seen = vec![false; total];
        let mut queue = VecDeque::with_capacity(total);
        seen[0] = true;
        self.parent[0] = NONE;
        self.depth[0] = 0;
        self.pot[0] = T::zero();
        queue.push_back(0);
        let mut visited = 1;
        while let Some(node) = queue.pop_front() {
            for k in 0..self.adj[node].len() {
                let slot = self.adj[node][k];
                let cell = self.cells[slot];
                let (a, b) = self.ends(cell);
                let other = if a == node { b } else { a };
                if seen[other] {
                    continue;
                }
                seen[other] = true;
                visited += 1;
                self.parent[other] = slot;
                self.depth[other] = self.depth[node] + 1;
                self.pot[other] = self.cost[cell].sub(&self.pot[node]);
                queue.push_back(other);
            }
        }
        if visited != total {
            return Err(OtError::Inconsistent("simplex basis is not a spanning tree".into()));
        }
        Ok(())
    }

    #[inline]
    fn reduced(&self, cell: usize) -> T {
        let (a, b) = self.ends(cell);
        self.cost[cell].sub(&self.pot[a]).sub(&self.pot[b])
    }

    fn other_end(&self, slot: usize, node: usize) -> usize {
        let (a, b) = self.ends(self.cells[slot]);
        if a == node {
            b
        } else {
            a
        }
    }

    /// Tree slots on the cycle closed by `cell`, in traversal order starting
    /// after the entering cell; signs alternate starting with minus.
    fn cycle(&self, cell: usize) -> Vec<usize> {
        let (mut a, mut b) = self.ends(cell);
        let mut from_b = Vec::new();
        let mut from_a = Vec::new();
        while self.depth[a] > self.depth[b] {
            let s = self.parent[a];
            from_a.push(s);
            a = self.other_end(s, a);
        }
        while self.depth[b] > self.depth[a] {
            let s = self.parent[b];
            from_b.push(s);
            b = self.other_end(s, b);
        }
        while a != b {
            let sa = self.parent[a];
            from_a.push(sa);
            a = self.other_end(sa, a);
            let sb = self.parent[b];
            from_b.push(sb);
            b = self.other_end(sb, b);
        }
        from_b.extend(from_a.into_iter().rev());
        from_b
    }

    fn pivot(&mut self, cell: usize, eps: &T) {
        let cyc = self.cycle(cell);
        let mut leave = NONE;
        for (k, &slot) in cyc.iter().enumerate() {
            if k % 2 == 1 {
                continue;
            }
            if leave == NONE {
                leave = slot;
                continue;
            }
            let (f, g) = (&self.flow[slot], &self.flow[leave]);
            if f.less(g, eps) || (!g.less(f, eps) && self.cells[slot] < self.cells[leave]) {
                leave = slot;
            }
        }
        let theta = self.flow[leave].clone();
        for (k, &slot) in cyc.iter().enumerate() {
            if k % 2 == 0 {
                self.flow[slot] = self.flow[slot].sub(&theta, eps);
            } else {
                self.flow[slot] = self.flow[slot].add(&theta);
            }
        }
        let old = self.cells[leave];
        let (oa, ob) = self.ends(old);
        self.adj[oa].retain(|&s| s != leave);
        self.adj[ob].retain(|&s| s != leave);
        self.slot_of[old] = NONE;
        self.cells[leave] = cell;
        self.flow[leave] = theta.clone();
        self.slot_of[cell] = leave;
        let (na, nb) = self.ends(cell);
        self.adj[na].push(leave);
        self.adj[nb].push(leave);
    }
}

fn bland_entering<T: Scalar>(tree: &Tree<'_, T>, threshold: &T) -> Option<usize> {
    (0..tree.m * tree.n).find(|&c| tree.slot_of[c] == NONE && tree.reduced(c) < *threshold)
}

fn block_entering<T: Scalar>(tree: &Tree<'_, T>, threshold: &T, start: &mut usize, block: usize) -> Option<usize> {
    let total = tree.m * tree.n;
    let mut best: Option<(usize, T)> = None;
    let mut scanned_in_block = 0;
    for step in 0..total {
        let c = (*start + step) % total;
        if tree.slot_of[c] == NONE {
            let r = tree.reduced(c);
            if r < *threshold && best.as_ref().is_none_or(|(_, b)| r < *b) {
                best = Some((c, r));
            }
        }
        scanned_in_block += 1;
        if scanned_in_block == block {
            scanned_in_block = 0;
            if let Some((c, _)) = best {
                *start = (*start + step + 1) % total;
                return Some(c);
            }
        }
    }
    best.map(|(c, _)| {
        *start = (c + 1) % total;
        c
    })
}

/// Minimises `sum cost[i*n+j] * x_ij` over the transportation polytope with
/// the given margins. Margins must balance (checked by the caller).
pub fn solve<T: Scalar>(
    m: usize,
    n: usize,
    cost: &[T],
    supply: &[T],
    demand: &[T],
    cfg: &SimplexConfig<T>,
) -> Result<SimplexOutput<T>> {
    assert!(m > 0 && n > 0 && cost.len() == m * n);
    let mut tree = Tree::northwest_corner(m, n, cost, supply, demand, &cfg.flow_eps);
    tree.refresh()?;
    let threshold = T::zero().sub(&cfg.cost_eps);
    let block = ((m * n) as f64).sqrt().ceil().max(16.0) as usize;
    let mut start = 0;
    let mut iterations = 0;
    loop {
        let entering = match cfg.rule {
            PivotRule::Bland => bland_entering(&tree, &threshold),
            PivotRule::BlockSearch => block_entering(&tree, &threshold, &mut start, block),
        };
        let Some(cell) = entering else { break };
        if iterations >= cfg.max_iter {
            return Err(OtError::IterationLimit(cfg.max_iter));
        }
        iterations += 1;
        tree.pivot(cell, &cfg.flow_eps);
        tree.refresh()?;
    }
    let basis = tree
        .cells
        .iter()
        .zip(&tree.flow)
        .map(|(&c, f)| {
            let x = if f.a < T::zero() { T::zero() } else { f.a.clone() };
            (c / n, c % n, x)
        })
        .collect();
    let u = tree.pot[..m].to_vec();
    let v = tree.pot[m..].to_vec();
    Ok(SimplexOutput {
        basis,
        u,
        v,
        iterations,
    })
}
