//! The set `Phi` of optimal source potentials as a difference-constraint
//! polyhedron, in the cost convention `phi_i + psi_j <= C_ij`.
//!
//! `phi` is optimal iff every target `j` that some optimal plan sends from
//! `i` stays in the generalised Laguerre cell of `i`, i.e.
//! `C_ij - phi_i <= C_kj - phi_k` for all `k`. Collecting these gives
//! `phi_i - phi_k >= h(i, k) = max_{j in S_i} (C_ij - C_kj)`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::problem::{dot, CostMatrix, CostSpec, TransportProblem};
use crate::solver::{Coupling, DualPair};
use crate::structure::{tight_graph_matrix, SupportGraph};
use crate::tolerance::Tolerances;

/// `s[i]`: targets joined to source `i` in `G_Gamma`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignableSets {
    pub s: Vec<Vec<usize>>,
}

pub fn assignable_sets(g_gamma: &SupportGraph) -> Result<AssignableSets> {
    let mut s = vec![Vec::new(); g_gamma.m];
    for &(i, j) in &g_gamma.edges {
        s[i].push(j);
    }
    if let Some(i) = s.iter().position(|v| v.is_empty()) {
        return Err(OtError::Inconsistent(format!("source {i} has no assignable target")));
    }
    Ok(AssignableSets { s })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Cost,
}

/// Constraints `(i, k, h)` meaning `phi_i - phi_k >= h`, one per ordered pair
/// `i != k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceSystem {
    pub convention: Convention,
    pub m: usize,
    /// Cost scale `1 + max |C|` used for relative tolerances.
    pub scale: f64,
    pub constraints: Vec<(usize, usize, f64)>,
}

impl HalfSpaceSystem {
    /// Largest amount by which `phi` violates a constraint (0 if none).
    pub fn violation(&self, phi: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|&(i, k, h)| h - (phi[i] - phi[k]))
            .fold(0.0, f64::max)
    }

    /// Membership with the solver's relative tie tolerance.
    pub fn contains(&self, phi: &[f64], tol: &Tolerances) -> bool {
        phi.len() == self.m && self.violation(phi) <= tol.tie * self.scale
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("system serialises")
    }

    /// Dense bound matrix, `-inf` on the diagonal.
    fn bounds(&self) -> Vec<Vec<f64>> {
        let mut b = vec![vec![f64::NEG_INFINITY; self.m]; self.m];
        for &(i, k, h) in &self.constraints {
            b[i][k] = b[i][k].max(h);
        }
        b
    }
}

pub(crate) fn halfspaces_matrix(c: &CostMatrix, sets: &AssignableSets) -> Result<HalfSpaceSystem> {
    let m = c.rows();
    if sets.s.len() != m {
        return Err(OtError::DimensionMismatch {
            expected: m,
            found: sets.s.len(),
        });
    }
    let mut constraints = Vec::with_capacity(m * m.saturating_sub(1));
    for (i, si) in sets.s.iter().enumerate() {
        if si.is_empty() {
            return Err(OtError::Inconsistent(format!("source {i} has no assignable target")));
        }
        for k in (0..m).filter(|&k| k != i) {
            let h = si.iter().map(|&j| c.get(i, j) - c.get(k, j)).fold(f64::NEG_INFINITY, f64::max);
            constraints.push((i, k, h));
        }
    }
    Ok(HalfSpaceSystem {
        convention: Convention::Cost,
        m,
        scale: c.scale(),
        constraints,
    })
}

/// `h(i, k) = max_{j in s[i]} (C_ij - C_kj)` for every ordered `i != k`.
pub fn halfspaces(problem: &TransportProblem, sets: &AssignableSets) -> Result<HalfSpaceSystem> {
    halfspaces_matrix(&problem.cost_matrix()?, sets)
}

pub(crate) fn ctransform_matrix(c: &CostMatrix, phi: &[f64]) -> Vec<f64> {
    (0..c.cols())
        .map(|j| (0..c.rows()).map(|i| c.get(i, j) - phi[i]).fold(f64::INFINITY, f64::min))
        .collect()
}

pub(crate) fn ctransform_reverse_matrix(c: &CostMatrix, psi: &[f64]) -> Vec<f64> {
    (0..c.rows())
        .map(|i| (0..c.cols()).map(|j| c.get(i, j) - psi[j]).fold(f64::INFINITY, f64::min))
        .collect()
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(OtError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `psi_j = min_i C_ij - phi_i`.
pub fn ctransform(problem: &TransportProblem, phi: &[f64]) -> Result<Vec<f64>> {
    let c = problem.cost_matrix()?;
    check_len(phi.len(), c.rows())?;
    Ok(ctransform_matrix(&c, phi))
}

/// `phi_i = min_j C_ij - psi_j`.
pub fn ctransform_reverse(problem: &TransportProblem, psi: &[f64]) -> Result<Vec<f64>> {
    let c = problem.cost_matrix()?;
    check_len(psi.len(), c.cols())?;
    Ok(ctransform_reverse_matrix(&c, psi))
}

pub(crate) fn potential_objective(c: &CostMatrix, alpha: &[f64], beta: &[f64], phi: &[f64]) -> f64 {
    let psi = ctransform_matrix(c, phi);
    dot(phi, alpha) + dot(&psi, beta)
}

/// `<phi, alpha> + <phi^c, beta>` equals the optimal `value` within
/// `tie * scale`.
pub fn is_optimal_potential(problem: &TransportProblem, phi: &[f64], value: f64, tol: &Tolerances) -> Result<bool> {
    let c = problem.cost_matrix()?;
    check_len(phi.len(), c.rows())?;
    let obj = potential_objective(&c, &problem.source.weights, &problem.target.weights, phi);
    Ok((obj - value).abs() <= tol.tie * c.scale())
}

/// Closed interval for `phi_i - phi_k` over `Phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub pinned: bool,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Admissible ranges of all pairwise differences, keyed `"i-k"` with `i < k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalHull {
    pub intervals: BTreeMap<String, Interval>,
}

impl IntervalHull {
    pub fn get(&self, i: usize, k: usize) -> Option<&Interval> {
        self.intervals.get(&format!("{i}-{k}"))
    }

    pub fn all_pinned(&self) -> bool {
        self.intervals.values().all(|v| v.pinned)
    }
}

/// Shortest-path closure: `d[i][k]` is the tightest upper bound on
/// `phi_k - phi_i` implied by the system.
fn closure(system: &HalfSpaceSystem, tol: &Tolerances) -> Result<Vec<Vec<f64>>> {
    let m = system.m;
    let b = system.bounds();
    let mut d: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|k| if i == k { 0.0 } else { -b[i][k] }).collect())
        .collect();
    for via in 0..m {
        for i in 0..m {
            let di = d[i][via];
            if di == f64::INFINITY {
                continue;
            }
            for k in 0..m {
                let cand = di + d[via][k];
                if cand < d[i][k] {
                    d[i][k] = cand;
                }
            }
        }
    }
    let thr = tol.tie * system.scale;
    if let Some(i) = (0..m).find(|&i| d[i][i] < -thr) {
        return Err(OtError::Inconsistent(format!(
            "difference constraints are infeasible: negative cycle through {i} of weight {}",
            d[i][i]
        )));
    }
    Ok(d)
}

/// Exact interval hull of `phi_i - phi_k` over `Phi`, from the shortest-path
/// closure of the difference constraints (not only the direct pair bounds).
pub fn phi_interval_hull(system: &HalfSpaceSystem, tol: &Tolerances) -> Result<IntervalHull> {
    let d = closure(system, tol)?;
    let thr = tol.tie * system.scale;
    let mut intervals = BTreeMap::new();
    for i in 0..system.m {
        for k in i + 1..system.m {
            let (lower, upper) = (-d[i][k], d[k][i]);
            if lower > upper + thr {
                return Err(OtError::Inconsistent(format!("empty interval for phi_{i} - phi_{k}")));
            }
            intervals.insert(
                format!("{i}-{k}"),
                Interval {
                    lower,
                    upper,
                    pinned: upper - lower <= thr,
                },
            );
        }
    }
    Ok(IntervalHull { intervals })
}

/// Random vertices of `Phi` with `phi_0 = 0`.
///
/// Sources are fixed one at a time in random order, each at a random endpoint
/// of the range left open by the sources already fixed. The closure makes each
/// range exact, so every partial assignment extends, and each fixed value is
/// tied to an earlier one by a chain of tight constraints; the tight
/// constraints therefore connect all sources and the point is a vertex.
pub fn sample_vertices<R: Rng>(system: &HalfSpaceSystem, count: usize, rng: &mut R, tol: &Tolerances) -> Result<Vec<Vec<f64>>> {
    let m = system.m;
    let d = closure(system, tol)?;
    let mut out = Vec::with_capacity(count);
    let mut order: Vec<usize> = (1..m).collect();
    for _ in 0..count {
        let mut phi = vec![0.0; m];
        let mut fixed = vec![0usize];
        order.shuffle(rng);
        for &k in &order {
            let lo = fixed.iter().map(|&f| phi[f] - d[k][f]).fold(f64::NEG_INFINITY, f64::max);
            let hi = fixed.iter().map(|&f| phi[f] + d[f][k]).fold(f64::INFINITY, f64::min);
            phi[k] = if lo > hi {
                0.5 * (lo + hi)
            } else if rng.random_bool(0.5) {
                lo
            } else {
                hi
            };
            fixed.push(k);
        }
        out.push(phi);
    }
    Ok(out)
}

/// `inf_lambda |a - b - lambda|_inf`.
pub fn sup_distance_mod_constants(a: &[f64], b: &[f64]) -> f64 {
    let (lo, hi) = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        0.0
    } else {
        0.5 * (hi - lo)
    }
}

/// Legendre view of a cost-convention source potential: `u = -phi` for
/// correlation, `u_i = (|x_i|^2 - phi_i) / 2` for `p = 2`, so that
/// `u_i + v_j >= <x_i, y_j>`.
pub fn to_legendre(problem: &TransportProblem, phi: &[f64]) -> Result<Vec<f64>> {
    check_len(phi.len(), problem.m())?;
    match &problem.cost {
        CostSpec::Correlation => Ok(phi.iter().map(|v| -v).collect()),
        CostSpec::PNorm { p } if *p == 2.0 => Ok(problem
            .source
            .points
            .iter()
            .zip(phi)
            .map(|(x, v)| 0.5 * (dot(x, x) - v))
            .collect()),
        other => Err(OtError::UnsupportedCost(format!(
            "no Legendre form for {other:?}; only p = 2 and correlation"
        ))),
    }
}

/// `1/2 min <x_1 - x_0 | y_1 - y_0>` over plan pairs `(x_0, y_0)` in the
/// first component of `g_gamma` and `(x_1, y_1)` in the second. Bounds the
/// diameter of `Phi` modulo constants in the Legendre view.
pub fn diameter_bound_two_components(problem: &TransportProblem, g_gamma: &SupportGraph, plan: &Coupling) -> Result<f64> {
    match &problem.cost {
        CostSpec::Correlation => {}
        CostSpec::PNorm { p } if *p == 2.0 => {}
        other => return Err(OtError::UnsupportedCost(format!("diameter bound needs p = 2 or correlation, got {other:?}"))),
    }
    let comps = g_gamma.components();
    if comps.len() != 2 {
        return Err(OtError::InvalidInput(format!(
            "diameter bound needs exactly two components, found {}",
            comps.len()
        )));
    }
    let mut side = vec![0u8; problem.m()];
    comps[1].sources.iter().for_each(|&i| side[i] = 1);
    let (xs, ys) = (&problem.source.points, &problem.target.points);
    let mut best = f64::INFINITY;
    for &(i0, j0, _) in plan.entries.iter().filter(|e| side[e.0] == 0) {
        for &(i1, j1, _) in plan.entries.iter().filter(|e| side[e.0] == 1) {
            let dx: Vec<f64> = xs[i1].iter().zip(&xs[i0]).map(|(a, b)| a - b).collect();
            let dy: Vec<f64> = ys[j1].iter().zip(&ys[j0]).map(|(a, b)| a - b).collect();
            best = best.min(dot(&dx, &dy));
        }
    }
    Ok(0.5 * best)
}

/// A normalised dual (`phi_0 = 0`) is a vertex of `D(C) ∩ {phi_0 = 0}` iff it
/// is feasible and its tight graph is connected.
pub fn is_dual_vertex(problem: &TransportProblem, dual: &DualPair, tol: &Tolerances) -> Result<bool> {
    let c = problem.cost_matrix()?;
    check_len(dual.phi.len(), c.rows())?;
    check_len(dual.psi.len(), c.cols())?;
    if dual.phi[0].abs() > tol.tie * c.scale() || dual.max_violation(&c) > tol.lp * c.scale() {
        return Ok(false);
    }
    Ok(tight_graph_matrix(&c, dual, tol).is_connected())
}
