//! Exact solution of the discrete primal transport LP and its dual.

mod exact;
pub(crate) mod face;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::problem::{CostMatrix, TransportProblem};
use crate::tolerance::Tolerances;
use simplex::{PivotRule, SimplexConfig};

pub use exact::{oracle_cap, solve_exact, ExactProblem, ExactSolution};
pub use face::{face_max_mass, face_min_mass, face_range};

/// Above this many cells the solver prices with block search instead of
/// scanning every cell.
pub const BLAND_CELL_LIMIT: usize = 2500;

/// Nonnegative `M x N` mass matrix stored sparsely, entries sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Coupling {
    pub fn new(m: usize, n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, w)) = entries.iter().find(|(i, j, w)| *i >= m || *j >= n || !(*w > 0.0)) {
            return Err(OtError::InvalidInput(format!(
                "coupling entry ({i}, {j}, {w}) out of range or not strictly positive"
            )));
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for w in entries.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(OtError::InvalidInput(format!("duplicate coupling entry ({}, {})", w[0].0, w[0].1)));
            }
        }
        Ok(Self { m, n, entries })
    }

    /// Diagonal coupling of a measure with itself.
    pub fn identity(weights: &[f64]) -> Self {
        Self {
            m: weights.len(),
            n: weights.len(),
            entries: weights.iter().enumerate().map(|(i, &w)| (i, i, w)).collect(),
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.m];
        for &(i, _, w) in &self.entries {
            r[i] += w;
        }
        r
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        for &(_, j, w) in &self.entries {
            c[j] += w;
        }
        c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(i, j)))
            .map_or(0.0, |k| self.entries[k].2)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.m];
        for &(i, j, w) in &self.entries {
            d[i][j] = w;
        }
        d
    }

    pub fn cost(&self, c: &CostMatrix) -> f64 {
        self.entries.iter().map(|&(i, j, w)| w * c.get(i, j)).sum()
    }

    /// Largest deviation of the margins from `(alpha, beta)`.
    pub fn marginal_defect(&self, alpha: &[f64], beta: &[f64]) -> f64 {
        let r = self.row_sums();
        let c = self.col_sums();
        r.iter()
            .zip(alpha)
            .chain(c.iter().zip(beta))
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// The target index of every source when each row has a single entry.
    pub fn as_map(&self) -> Result<Vec<usize>> {
        let mut map = vec![usize::MAX; self.m];
        for &(i, j, _) in &self.entries {
            if map[i] != usize::MAX {
                return Err(OtError::NotAMap(i));
            }
            map[i] = j;
        }
        if let Some(i) = map.iter().position(|&j| j == usize::MAX) {
            return Err(OtError::InvalidInput(format!("source {i} carries no mass")));
        }
        Ok(map)
    }

    /// Same sparsity pattern with masses equal within `tol`.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.m == other.m
            && self.n == other.n
            && self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.0 == b.0 && a.1 == b.1 && (a.2 - b.2).abs() <= tol)
    }
}

/// Potentials `(phi, psi)` with `phi_i + psi_j <= C_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPair {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl DualPair {
    pub fn objective(&self, alpha: &[f64], beta: &[f64]) -> f64 {
        let a: f64 = self.phi.iter().zip(alpha).map(|(p, w)| p * w).sum();
        let b: f64 = self.psi.iter().zip(beta).map(|(p, w)| p * w).sum();
        a + b
    }

    /// Shifts so that `phi[0] == 0`; the objective is unchanged because the
    /// margins carry equal mass.
    pub fn normalized(&self) -> Self {
        let s = self.phi.first().copied().unwrap_or(0.0);
        Self {
            phi: self.phi.iter().map(|p| p - s).collect(),
            psi: self.psi.iter().map(|p| p + s).collect(),
        }
    }

    pub fn max_violation(&self, c: &CostMatrix) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (i, p) in self.phi.iter().enumerate() {
            for (j, q) in self.psi.iter().enumerate() {
                worst = worst.max(p + q - c.get(i, j));
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub plan: Coupling,
    pub dual: DualPair,
    pub value: f64,
    pub iterations: usize,
}

#[derive(Serialize, Deserialize)]
struct SolutionWire {
    value: f64,
    plan: Vec<(usize, usize, f64)>,
    phi: Vec<f64>,
    psi: Vec<f64>,
    iterations: usize,
}

impl Solution {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(SolutionWire {
            value: self.value,
            plan: self.plan.entries.clone(),
            phi: self.dual.phi.clone(),
            psi: self.dual.psi.clone(),
            iterations: self.iterations,
        })
        .expect("solution serialises")
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self> {
        let w: SolutionWire =
            serde_json::from_value(v).map_err(|e| OtError::InvalidInput(format!("bad solution JSON: {e}")))?;
        let (m, n) = (w.phi.len(), w.psi.len());
        Ok(Self {
            plan: Coupling::new(m, n, w.plan)?,
            dual: DualPair { phi: w.phi, psi: w.psi },
            value: w.value,
            iterations: w.iterations,
        })
    }
}

fn check_balance(alpha: &[f64], beta: &[f64], tol: &Tolerances) -> Result<()> {
    let defect = (alpha.iter().sum::<f64>() - beta.iter().sum::<f64>()).abs();
    if defect > tol.mass {
        return Err(OtError::Infeasible { defect });
    }
    Ok(())
}

pub(crate) fn float_config(cells: usize, scale: f64, tol: &Tolerances) -> SimplexConfig<f64> {
    SimplexConfig {
        flow_eps: tol.flow_eps(),
        cost_eps: 0.5 * tol.lp * scale,
        rule: if cells <= BLAND_CELL_LIMIT {
            PivotRule::Bland
        } else {
            PivotRule::BlockSearch
        },
        max_iter: 200_000 + 200 * cells,
    }
}

/// Solves the transport LP for an explicit cost matrix and margins.
pub fn solve_matrix(c: &CostMatrix, alpha: &[f64], beta: &[f64], tol: &Tolerances) -> Result<Solution> {
    let (m, n) = (c.rows(), c.cols());
    if alpha.len() != m || beta.len() != n {
        return Err(OtError::DimensionMismatch {
            expected: m * n,
            found: alpha.len() * beta.len(),
        });
    }
    c.check_finite()?;
    check_balance(alpha, beta, tol)?;
    let cfg = float_config(m * n, c.scale(), tol);
    let out = simplex::solve(m, n, c.as_slice(), alpha, beta, &cfg)?;
    let entries: Vec<(usize, usize, f64)> = out
        .basis
        .iter()
        .filter(|(_, _, f)| *f > cfg.flow_eps)
        .map(|&(i, j, f)| (i, j, f))
        .collect();
    let plan = Coupling::new(m, n, entries)?;
    let value = plan.cost(c);
    Ok(Solution {
        plan,
        dual: DualPair { phi: out.u, psi: out.v },
        value,
        iterations: out.iterations,
    })
}

/// Optimal vertex plan and a complementary dual, normalised to `phi[0] = 0`.
///
/// The simplex dual is a vertex of the dual polyhedron, so its tight graph is
/// always connected. When the plan's support splits into several components
/// the dual is moved by [`center_dual`] so that edges between components are
/// tight only when every optimal dual forces them to be.
pub fn solve(problem: &TransportProblem, tol: &Tolerances) -> Result<Solution> {
    tol.validate()?;
    check_balance(&problem.source.weights, &problem.target.weights, tol)?;
    problem.validate(tol)?;
    let c = problem.cost_matrix()?;
    let mut s = solve_matrix(&c, &problem.source.weights, &problem.target.weights, tol)?;
    s.dual = center_dual(&c, &s.plan, &s.dual);
    Ok(s)
}

const CENTERING_SWEEPS: usize = 4;

/// Shifts each support component (`phi -= t`, `psi += t`) to the midpoint of
/// its feasible window, sweeping the components a few times. Support edges
/// stay tight and feasibility is kept at every step, so the result is an
/// optimal dual; a window of positive width always ends with strictly
/// positive reduced costs on the edges leaving that component.
pub fn center_dual(c: &CostMatrix, plan: &Coupling, dual: &DualPair) -> DualPair {
    let comps = crate::structure::support_graph(plan).components();
    if comps.len() < 2 {
        return dual.clone();
    }
    let (m, n) = (c.rows(), c.cols());
    let mut src_of = vec![0; m];
    let mut tgt_of = vec![0; n];
    for (k, comp) in comps.iter().enumerate() {
        comp.sources.iter().for_each(|&i| src_of[i] = k);
        comp.targets.iter().for_each(|&j| tgt_of[j] = k);
    }
    let mut out = dual.clone();
    for _ in 0..CENTERING_SWEEPS {
        for (l, comp) in comps.iter().enumerate() {
            // edges into l (source outside) bound t above, edges out of l below
            let mut plus = f64::INFINITY;
            for &j in &comp.targets {
                for i in (0..m).filter(|&i| src_of[i] != l) {
                    plus = plus.min(c.get(i, j) - out.phi[i] - out.psi[j]);
                }
            }
            let mut minus = f64::INFINITY;
            for &i in &comp.sources {
                for j in (0..n).filter(|&j| tgt_of[j] != l) {
                    minus = minus.min(c.get(i, j) - out.phi[i] - out.psi[j]);
                }
            }
            if !(plus.is_finite() && minus.is_finite()) || plus < 0.0 || minus < 0.0 {
                continue;
            }
            let t = 0.5 * (plus - minus);
            comp.sources.iter().for_each(|&i| out.phi[i] -= t);
            comp.targets.iter().for_each(|&j| out.psi[j] += t);
        }
    }
    out.normalized()
}

/// `C_ij - phi_i - psi_j`.
pub fn reduced_costs(c: &CostMatrix, dual: &DualPair) -> CostMatrix {
    CostMatrix::from_fn(c.rows(), c.cols(), |i, j| c.get(i, j) - dual.phi[i] - dual.psi[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DiscreteMeasure;
    use crate::problem::CostSpec;

    fn jump(eps: f64) -> TransportProblem {
        crate::generators::jump(eps)
    }

    #[test]
    fn jump_positive_eps_pairs_upper_with_upper() {
        let s = solve(&jump(0.1), &Tolerances::default()).unwrap();
        assert_eq!(s.plan.entries.len(), 2);
        assert_eq!((s.plan.entries[0].0, s.plan.entries[0].1), (0, 0));
        assert_eq!((s.plan.entries[1].0, s.plan.entries[1].1), (1, 1));
        assert!((s.plan.entries[0].2 - 0.5).abs() < 1e-15);
        assert!((s.value - 1.81).abs() < 1e-12);
        assert_eq!(s.dual.phi[0], 0.0);
    }

    #[test]
    fn single_cell_problem() {
        let p = TransportProblem::new(
            DiscreteMeasure::new(vec![vec![0.0, 0.0]], vec![1.0]).unwrap(),
            DiscreteMeasure::new(vec![vec![3.0, 4.0]], vec![1.0]).unwrap(),
            CostSpec::PNorm { p: 2.0 },
        )
        .unwrap();
        let s = solve(&p, &Tolerances::default()).unwrap();
        assert_eq!(s.plan.entries, vec![(0, 0, 1.0)]);
        assert_eq!(s.value, 25.0);
    }

    #[test]
    fn infeasible_margins() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let err = solve_matrix(&c, &[1.0], &[0.5, 0.6], &Tolerances::default()).unwrap_err();
        assert!(matches!(err, OtError::Infeasible { .. }));
    }

    #[test]
    fn non_finite_cost() {
        let c = CostMatrix::from_rows(&[vec![1.0, f64::NAN]]).unwrap();
        let err = solve_matrix(&c, &[1.0], &[0.5, 0.5], &Tolerances::default()).unwrap_err();
        assert!(matches!(err, OtError::NonFiniteCost { i: 0, j: 1 }));
    }

    #[test]
    fn reduced_costs_vanish_on_support() {
        let tol = Tolerances::default();
        let p = jump(0.1);
        let s = solve(&p, &tol).unwrap();
        let c = p.cost_matrix().unwrap();
        let r = reduced_costs(&c, &s.dual);
        for &(i, j, _) in &s.plan.entries {
            assert!(r.get(i, j).abs() <= tol.tie);
        }
        assert!(r.get(0, 1) > 0.1 && r.get(1, 0) > 0.1);
        let zero = DualPair {
            phi: vec![0.0; 2],
            psi: vec![0.0; 2],
        };
        assert_eq!(reduced_costs(&c, &zero), c);
    }

    #[test]
    fn solution_json_round_trip() {
        let s = solve(&jump(0.1), &Tolerances::default()).unwrap();
        let v = s.to_json_value();
        assert_eq!(v["plan"][1][0], 1);
        assert_eq!(Solution::from_json_value(v).unwrap(), s);
    }

    #[test]
    fn coupling_rejects_bad_entries() {
        assert!(Coupling::new(1, 1, vec![(0, 0, 0.0)]).is_err());
        assert!(Coupling::new(1, 1, vec![(0, 1, 1.0)]).is_err());
        assert!(Coupling::new(2, 2, vec![(0, 0, 0.5), (0, 0, 0.5)]).is_err());
    }

    #[test]
    fn as_map_detects_split_rows() {
        let c = Coupling::new(1, 2, vec![(0, 0, 0.5), (0, 1, 0.5)]).unwrap();
        assert!(matches!(c.as_map(), Err(OtError::NotAMap(0))));
        let c = Coupling::new(2, 2, vec![(0, 1, 0.5), (1, 0, 0.5)]).unwrap();
        assert_eq!(c.as_map().unwrap(), vec![1, 0]);
    }
}
