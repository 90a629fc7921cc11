//! Support graphs, `G_Gamma`, uniqueness verdicts and dual slacks.

mod chain;
mod graph;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::problem::{CostMatrix, TransportProblem};
use crate::solver::{face, reduced_costs, Coupling, DualPair, Solution};
use crate::tolerance::Tolerances;

pub use chain::{cm_gap, cm_gap_matrix, min_cycle_gap, min_cycle_gap_matrix, Chain};
pub use graph::{Component, GraphKind, SupportGraph};

/// Default chain length cap for [`min_cycle_gap`].
pub const DEFAULT_MAX_CHAIN: usize = 6;

/// Edges of the strictly positive plan entries.
pub fn support_graph(plan: &Coupling) -> SupportGraph {
    SupportGraph {
        m: plan.m,
        n: plan.n,
        edges: plan.entries.iter().map(|&(i, j, _)| (i, j)).collect(),
        kind: GraphKind::Support,
    }
}

pub(crate) fn tight_graph_matrix(c: &CostMatrix, dual: &DualPair, tol: &Tolerances) -> SupportGraph {
    let thr = tol.tie * c.scale();
    let r = reduced_costs(c, dual);
    let mut edges = Vec::new();
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            if r.get(i, j).abs() <= thr {
                edges.push((i, j));
            }
        }
    }
    SupportGraph {
        m: c.rows(),
        n: c.cols(),
        edges,
        kind: GraphKind::Tight,
    }
}

/// `|C_ij - phi_i - psi_j| <= tie * scale`.
pub fn tight_graph(problem: &TransportProblem, dual: &DualPair, tol: &Tolerances) -> Result<SupportGraph> {
    let c = problem.cost_matrix()?;
    check_dual_len(&c, dual)?;
    Ok(tight_graph_matrix(&c, dual, tol))
}

fn check_dual_len(c: &CostMatrix, dual: &DualPair) -> Result<()> {
    if dual.phi.len() != c.rows() || dual.psi.len() != c.cols() {
        return Err(OtError::DimensionMismatch {
            expected: c.rows() + c.cols(),
            found: dual.phi.len() + dual.psi.len(),
        });
    }
    Ok(())
}

pub(crate) fn g_gamma_matrix(
    c: &CostMatrix,
    alpha: &[f64],
    beta: &[f64],
    base: &Solution,
    tol: &Tolerances,
) -> Result<SupportGraph> {
    check_dual_len(c, &base.dual)?;
    let tight = face::tight_mask(c, &base.dual, tol);
    let n = c.cols();
    let candidates: Vec<(usize, usize)> = (0..c.rows())
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| tight[i * n + j])
        .collect();
    let verdicts: Vec<Result<bool>> = candidates
        .par_iter()
        .map(|&e| {
            if base.plan.get(e.0, e.1) > tol.mass {
                return Ok(true);
            }
            Ok(face::face_extreme(c, alpha, beta, &tight, e, true, tol)? > tol.mass)
        })
        .collect();
    let mut edges = Vec::new();
    for (e, v) in candidates.into_iter().zip(verdicts) {
        if v? {
            edges.push(e);
        }
    }
    Ok(SupportGraph {
        m: c.rows(),
        n,
        edges,
        kind: GraphKind::GGamma,
    })
}

/// Union of the supports of all optimal plans: tight edges whose maximal
/// mass over the optimal face exceeds `tol.mass`.
pub fn g_gamma(problem: &TransportProblem, base: &Solution, tol: &Tolerances) -> Result<SupportGraph> {
    let c = problem.cost_matrix()?;
    g_gamma_matrix(&c, &problem.source.weights, &problem.target.weights, base, tol)
}

/// The optimal plan is unique iff `G_Gamma` has no cycle.
pub fn primal_unique(g_gamma: &SupportGraph) -> bool {
    g_gamma.is_acyclic()
}

/// Optimal potentials are unique up to a constant iff `G_Gamma` is connected.
/// An isolated node cannot occur with positive weights and is reported as an
/// internal inconsistency.
pub fn dual_unique(g_gamma: &SupportGraph) -> Result<bool> {
    let (is, js) = g_gamma.isolated();
    if !is.is_empty() || !js.is_empty() {
        return Err(OtError::Inconsistent(format!(
            "G_Gamma has isolated sources {is:?} and targets {js:?}"
        )));
    }
    Ok(g_gamma.is_connected())
}

/// A simple cycle of the graph written as a chain: both the pairs and their
/// shifts are edges.
pub fn cycle_witness(g: &SupportGraph) -> Option<Chain> {
    let mut nodes = g.find_cycle_nodes()?;
    if nodes[0] >= g.m {
        nodes.rotate_left(1);
    }
    let pairs = nodes.chunks(2).map(|w| (w[0], w[1] - g.m)).collect();
    Some(Chain { pairs }.canonical())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub primal_unique: bool,
    pub dual_unique: bool,
    pub g_gamma: SupportGraph,
    pub cycles_found: Vec<Chain>,
    pub components: Vec<Component>,
}

impl UniquenessReport {
    pub fn from_g_gamma(g_gamma: SupportGraph) -> Result<Self> {
        let dual_unique = dual_unique(&g_gamma)?;
        let primal_unique = primal_unique(&g_gamma);
        let cycles_found = if primal_unique {
            Vec::new()
        } else {
            vec![cycle_witness(&g_gamma).ok_or_else(|| OtError::Inconsistent("cyclic graph without a cycle".into()))?]
        };
        let components = g_gamma.components();
        Ok(Self {
            primal_unique,
            dual_unique,
            g_gamma,
            cycles_found,
            components,
        })
    }

    /// Verdicts must match the graph they were derived from.
    pub fn is_consistent(&self) -> bool {
        self.primal_unique == self.g_gamma.is_acyclic()
            && self.dual_unique == self.g_gamma.is_connected()
            && self.primal_unique == self.cycles_found.is_empty()
    }
}

pub fn uniqueness_report(problem: &TransportProblem, base: &Solution, tol: &Tolerances) -> Result<UniquenessReport> {
    UniquenessReport::from_g_gamma(g_gamma(problem, base, tol)?)
}

/// Minimal reduced costs between components of the tight graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSlacks {
    pub components: Vec<Component>,
    /// `slack[k][l]`: min reduced cost over sources in `k`, targets in `l`;
    /// the diagonal is 0.
    pub slack: Vec<Vec<f64>>,
}

impl ComponentSlacks {
    /// `(eps_minus, eps_plus)` for shifting component `l`: the admissible
    /// `t` form `[-eps_minus, eps_plus]`. Infinite with a single component.
    pub fn window(&self, l: usize) -> (f64, f64) {
        let k_all = 0..self.components.len();
        let plus = k_all.clone().filter(|&k| k != l).map(|k| self.slack[k][l]).fold(f64::INFINITY, f64::min);
        let minus = k_all.filter(|&k| k != l).map(|k| self.slack[l][k]).fold(f64::INFINITY, f64::min);
        (minus, plus)
    }
}

pub(crate) fn component_slacks_matrix(c: &CostMatrix, dual: &DualPair, tol: &Tolerances) -> ComponentSlacks {
    let components = tight_graph_matrix(c, dual, tol).components();
    let r = reduced_costs(c, dual);
    let mut src_of = vec![0; c.rows()];
    let mut tgt_of = vec![0; c.cols()];
    for (k, comp) in components.iter().enumerate() {
        comp.sources.iter().for_each(|&i| src_of[i] = k);
        comp.targets.iter().for_each(|&j| tgt_of[j] = k);
    }
    let q = components.len();
    let mut slack = vec![vec![f64::INFINITY; q]; q];
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            let (k, l) = (src_of[i], tgt_of[j]);
            slack[k][l] = slack[k][l].min(r.get(i, j));
        }
    }
    for (k, row) in slack.iter_mut().enumerate() {
        row[k] = 0.0;
    }
    ComponentSlacks { components, slack }
}

/// `eps(G_k, G_l)` for every ordered pair of tight-graph components.
pub fn component_slacks(problem: &TransportProblem, dual: &DualPair, tol: &Tolerances) -> Result<ComponentSlacks> {
    let c = problem.cost_matrix()?;
    check_dual_len(&c, dual)?;
    Ok(component_slacks_matrix(&c, dual, tol))
}

/// `phi_i -= t`, `psi_j += t` on one component. Errors when `t` leaves the
/// window `[-eps_minus, eps_plus]` by more than `tol.lp`.
pub fn perturb_dual_component(
    problem: &TransportProblem,
    dual: &DualPair,
    component: &Component,
    t: f64,
    tol: &Tolerances,
) -> Result<DualPair> {
    let c = problem.cost_matrix()?;
    check_dual_len(&c, dual)?;
    let r = reduced_costs(&c, dual);
    let mut inside_i = vec![false; c.rows()];
    let mut inside_j = vec![false; c.cols()];
    component.sources.iter().for_each(|&i| inside_i[i] = true);
    component.targets.iter().for_each(|&j| inside_j[j] = true);
    let (mut plus, mut minus) = (f64::INFINITY, f64::INFINITY);
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            match (inside_i[i], inside_j[j]) {
                (false, true) => plus = plus.min(r.get(i, j)),
                (true, false) => minus = minus.min(r.get(i, j)),
                _ => {}
            }
        }
    }
    if t > plus + tol.lp || t < -minus - tol.lp {
        return Err(OtError::OutsideSlack {
            t,
            lower: -minus,
            upper: plus,
        });
    }
    let mut out = dual.clone();
    component.sources.iter().for_each(|&i| out.phi[i] -= t);
    component.targets.iter().for_each(|&j| out.psi[j] += t);
    Ok(out)
}
