//! One-call structural analysis of a problem: solution, `G_Gamma`, verdicts,
//! the half-space description of `Phi` and its interval hull.

use serde::Serialize;

use crate::dualset::{assignable_sets, halfspaces_matrix, phi_interval_hull, HalfSpaceSystem, IntervalHull};
use crate::error::Result;
use crate::problem::TransportProblem;
use crate::solver::{solve, Solution};
use crate::structure::{g_gamma_matrix, UniquenessReport};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub solution: serde_json::Value,
    #[serde(flatten)]
    pub uniqueness: UniquenessReport,
    pub halfspaces: HalfSpaceSystem,
    pub intervals: IntervalHull,
    #[serde(skip)]
    pub base: Solution,
}

pub fn analyze(problem: &TransportProblem, tol: &Tolerances) -> Result<Analysis> {
    let base = solve(problem, tol)?;
    analyze_with(problem, base, tol)
}

/// Analysis around a given optimal solution.
pub fn analyze_with(problem: &TransportProblem, base: Solution, tol: &Tolerances) -> Result<Analysis> {
    let c = problem.cost_matrix()?;
    let g = g_gamma_matrix(&c, &problem.source.weights, &problem.target.weights, &base, tol)?;
    let sets = assignable_sets(&g)?;
    let halfspaces = halfspaces_matrix(&c, &sets)?;
    let intervals = phi_interval_hull(&halfspaces, tol)?;
    Ok(Analysis {
        solution: base.to_json_value(),
        uniqueness: UniquenessReport::from_g_gamma(g)?,
        halfspaces,
        intervals,
        base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{figure_cells, jump};

    #[test]
    fn figure_analysis_json() {
        let a = analyze(&figure_cells(), &Tolerances::default()).unwrap();
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["primal_unique"], false);
        assert_eq!(v["dual_unique"], true);
        assert_eq!(v["g_gamma"]["edges"].as_array().unwrap().len(), 8);
        assert_eq!(v["g_gamma"]["kind"], "g_gamma");
        assert_eq!(v["halfspaces"]["convention"], "cost");
        assert!(v["intervals"]["0-1"]["pinned"].as_bool().unwrap());
    }

    #[test]
    fn unique_instance_is_pinned_only_when_connected() {
        let a = analyze(&jump(0.1), &Tolerances::default()).unwrap();
        assert!(a.uniqueness.primal_unique && !a.uniqueness.dual_unique);
        assert!(!a.intervals.all_pinned());
    }
}
