use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::problem::{CostMatrix, TransportProblem};
use crate::solver::Coupling;

/// Ordered support pairs `[(i_1, j_1), ..., (i_n, j_n)]` with pairwise
/// distinct sources and pairwise distinct targets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chain {
    pub pairs: Vec<(usize, usize)>,
}

impl Chain {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut si = HashSet::new();
        let mut sj = HashSet::new();
        for &(i, j) in &pairs {
            if !si.insert(i) {
                return Err(OtError::ChainNotDistinct(format!("source {i} repeated")));
            }
            if !sj.insert(j) {
                return Err(OtError::ChainNotDistinct(format!("target {j} repeated")));
            }
        }
        Ok(Self { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Rotation starting at the pair with the lowest source index.
    pub fn canonical(&self) -> Self {
        let Some(k) = (0..self.pairs.len()).min_by_key(|&k| self.pairs[k].0) else {
            return self.clone();
        };
        let mut pairs = self.pairs[k..].to_vec();
        pairs.extend_from_slice(&self.pairs[..k]);
        Self { pairs }
    }

    /// The shifted pairs `(i_{k+1}, j_k)`.
    pub fn shifted(&self) -> Vec<(usize, usize)> {
        let n = self.pairs.len();
        (0..n).map(|k| (self.pairs[(k + 1) % n].0, self.pairs[k].1)).collect()
    }

    /// Edge set of the closed walk `x_{i_1}, y_{j_1}, x_{i_2}, ..., y_{j_n}, x_{i_1}`.
    pub fn cycle_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self.pairs.iter().copied().chain(self.shifted()).collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}

/// Gap of a chain against an explicit cost matrix.
pub fn cm_gap_matrix(c: &CostMatrix, chain: &Chain) -> Result<f64> {
    let n = chain.len();
    if let Some(&(i, j)) = chain.pairs.iter().find(|(i, j)| *i >= c.rows() || *j >= c.cols()) {
        return Err(OtError::InvalidInput(format!("chain pair ({i}, {j}) out of range")));
    }
    Chain::new(chain.pairs.clone())?;
    let mut gap = 0.0;
    for k in 0..n {
        let (i, j) = chain.pairs[k];
        let next = chain.pairs[(k + 1) % n].0;
        gap += c.get(next, j) - c.get(i, j);
    }
    Ok(gap)
}

/// `Delta_P = sum_k C(i_{k+1}, j_k) - C(i_k, j_k)`, indices cyclic.
pub fn cm_gap(problem: &TransportProblem, chain: &Chain) -> Result<f64> {
    cm_gap_matrix(&problem.cost_matrix()?, chain)
}

/// Smallest `Delta_P` over distinct chains of length `2..=max_len` drawn from
/// the support of `plan`, with an argmin chain in canonical rotation.
///
/// Exhaustive: the number of chains grows like `|supp|^max_len`. Returns
/// `(inf, None)` when no chain of length two exists.
pub fn min_cycle_gap(problem: &TransportProblem, plan: &Coupling, max_len: usize) -> Result<(f64, Option<Chain>)> {
    min_cycle_gap_matrix(&problem.cost_matrix()?, plan, max_len)
}

pub fn min_cycle_gap_matrix(c: &CostMatrix, plan: &Coupling, max_len: usize) -> Result<(f64, Option<Chain>)> {
    if max_len < 2 {
        return Err(OtError::InvalidInput(format!("max_len must be at least 2, got {max_len}")));
    }
    let support: Vec<(usize, usize)> = plan.entries.iter().map(|&(i, j, _)| (i, j)).collect();
    let mut search = Search {
        c,
        support: &support,
        max_len,
        used_i: vec![false; c.rows()],
        used_j: vec![false; c.cols()],
        path: Vec::new(),
        best: (f64::INFINITY, None),
    };
    for s in 0..support.len() {
        let (i, j) = support[s];
        search.used_i[i] = true;
        search.used_j[j] = true;
        search.path.push(s);
        search.extend(i, -c.get(i, j));
        search.path.pop();
        search.used_i[i] = false;
        search.used_j[j] = false;
    }
    let (gap, chain) = search.best;
    Ok((gap, chain.map(|p| Chain { pairs: p }.canonical())))
}

struct Search<'a> {
    c: &'a CostMatrix,
    support: &'a [(usize, usize)],
    max_len: usize,
    used_i: Vec<bool>,
    used_j: Vec<bool>,
    path: Vec<usize>,
    best: (f64, Option<Vec<(usize, usize)>>),
}

impl Search<'_> {
    /// `partial` holds `sum C(i_{k+1}, j_k) - C(i_k, j_k)` over closed links.
    /// Rotations are skipped by requiring later sources to exceed the first.
    fn extend(&mut self, first_i: usize, partial: f64) {
        let last = self.support[*self.path.last().expect("non-empty path")];
        if self.path.len() >= 2 {
            let gap = partial + self.c.get(first_i, last.1);
            if gap < self.best.0 {
                self.best = (gap, Some(self.path.iter().map(|&s| self.support[s]).collect()));
            }
        }
        if self.path.len() == self.max_len {
            return;
        }
        for s in 0..self.support.len() {
            let (i, j) = self.support[s];
            if i <= first_i || self.used_i[i] || self.used_j[j] {
                continue;
            }
            self.used_i[i] = true;
            self.used_j[j] = true;
            self.path.push(s);
            let step = self.c.get(i, last.1) - self.c.get(i, j);
            self.extend(first_i, partial + step);
            self.path.pop();
            self.used_i[i] = false;
            self.used_j[j] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::jump;

    fn chain(p: &[(usize, usize)]) -> Chain {
        Chain::new(p.to_vec()).unwrap()
    }

    #[test]
    fn single_pair_gap_is_zero() {
        assert_eq!(cm_gap(&jump(0.1), &chain(&[(1, 0)])).unwrap(), 0.0);
    }

    #[test]
    fn jump_gaps() {
        // C = [[1.81, 2.21], [2.21, 1.81]] at eps = 0.1; all 2 at eps = 0
        let g = cm_gap(&jump(0.1), &chain(&[(0, 0), (1, 1)])).unwrap();
        assert!((g - (2.0 * 2.21 - 2.0 * 1.81)).abs() < 1e-12);
        assert_eq!(cm_gap(&jump(0.0), &chain(&[(0, 0), (1, 1)])).unwrap(), 0.0);
    }

    #[test]
    fn repeated_index_rejected() {
        assert!(matches!(
            Chain::new(vec![(0, 0), (0, 1)]),
            Err(OtError::ChainNotDistinct(_))
        ));
        let bad = Chain {
            pairs: vec![(0, 0), (1, 0)],
        };
        assert!(cm_gap(&jump(0.1), &bad).is_err());
    }

    #[test]
    fn canonical_rotation() {
        let c = chain(&[(2, 0), (0, 1), (1, 2)]);
        assert_eq!(c.canonical().pairs, vec![(0, 1), (1, 2), (2, 0)]);
        assert_eq!(c.shifted(), vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn min_gap_on_jump() {
        let plan = Coupling::new(2, 2, vec![(0, 0, 0.5), (1, 1, 0.5)]).unwrap();
        let (g, c) = min_cycle_gap(&jump(0.1), &plan, 6).unwrap();
        assert!((g - 0.8).abs() < 1e-12);
        assert_eq!(c.unwrap().pairs, vec![(0, 0), (1, 1)]);
        let (g0, c0) = min_cycle_gap(&jump(0.0), &plan, 2).unwrap();
        assert_eq!(g0, 0.0);
        assert_eq!(c0.unwrap().pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn single_source_has_no_chain() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let plan = Coupling::new(1, 3, vec![(0, 0, 0.2), (0, 1, 0.3), (0, 2, 0.5)]).unwrap();
        assert_eq!(min_cycle_gap_matrix(&c, &plan, 6).unwrap(), (f64::INFINITY, None));
    }

    #[test]
    fn max_len_below_two_rejected() {
        let plan = Coupling::new(2, 2, vec![(0, 0, 0.5), (1, 1, 0.5)]).unwrap();
        assert!(min_cycle_gap(&jump(0.1), &plan, 1).is_err());
    }

    #[test]
    fn three_chain_counts_each_rotation_once() {
        // brute force over all ordered triples agrees with the search
        let c = CostMatrix::from_fn(3, 3, |i, j| ((i * 7 + j * 5) % 4) as f64 - (i * j) as f64);
        let plan = Coupling::new(3, 3, vec![(0, 0, 0.3), (1, 1, 0.3), (2, 2, 0.4)]).unwrap();
        let mut best = f64::INFINITY;
        let sup = [(0, 0), (1, 1), (2, 2)];
        for a in 0..3 {
            for b in 0..3 {
                if b != a {
                    best = best.min(cm_gap_matrix(&c, &chain(&[sup[a], sup[b]])).unwrap());
                }
                for d in 0..3 {
                    if a != b && b != d && a != d {
                        best = best.min(cm_gap_matrix(&c, &chain(&[sup[a], sup[b], sup[d]])).unwrap());
                    }
                }
            }
        }
        assert_eq!(min_cycle_gap_matrix(&c, &plan, 3).unwrap().0, best);
    }
}
