//! Extremes of a single coordinate over the optimal face.
//!
//! The optimal face is the set of couplings supported on edges that are tight
//! for an optimal dual. Extremising `gamma_e` over it is a transportation
//! problem with cost `-1` (or `+1`) on `e`, `0` on the other tight edges and
//! a penalty of `2` on non-tight edges. A penalty above `1` is exact: a
//! conformal cycle decomposition shows that moving `delta` mass onto
//! non-tight edges can raise `gamma_e` by at most `delta`.

use crate::error::{OtError, Result};
use crate::problem::{CostMatrix, TransportProblem};
use crate::tolerance::Tolerances;

use super::{float_config, reduced_costs, simplex, DualPair, Solution};

const OFF_FACE_PENALTY: f64 = 2.0;

pub(crate) fn tight_mask(c: &CostMatrix, dual: &DualPair, tol: &Tolerances) -> Vec<bool> {
    let thr = tol.tie * c.scale();
    reduced_costs(c, dual).as_slice().iter().map(|&r| r <= thr).collect()
}

pub(crate) fn face_extreme(
    c: &CostMatrix,
    alpha: &[f64],
    beta: &[f64],
    tight: &[bool],
    edge: (usize, usize),
    maximize: bool,
    tol: &Tolerances,
) -> Result<f64> {
    let (m, n) = (c.rows(), c.cols());
    let (ei, ej) = edge;
    if ei >= m || ej >= n {
        return Err(OtError::InvalidInput(format!("edge ({ei}, {ej}) out of range")));
    }
    if !tight[ei * n + ej] {
        return Ok(0.0);
    }
    let face_cost: Vec<f64> = (0..m * n)
        .map(|k| {
            if k == ei * n + ej {
                if maximize {
                    -1.0
                } else {
                    1.0
                }
            } else if tight[k] {
                0.0
            } else {
                OFF_FACE_PENALTY
            }
        })
        .collect();
    let cfg = float_config(m * n, 1.0 + OFF_FACE_PENALTY, tol);
    let out = simplex::solve(m, n, &face_cost, alpha, beta, &cfg)?;
    let mass = out
        .basis
        .iter()
        .find(|(i, j, _)| (*i, *j) == edge)
        .map_or(0.0, |(_, _, f)| *f);
    Ok(if mass > cfg.flow_eps { mass } else { 0.0 })
}

/// Maximum of `gamma_ij` over optimal plans; zero when the edge is in no
/// optimal plan.
pub fn face_max_mass(
    problem: &TransportProblem,
    base: &Solution,
    edge: (usize, usize),
    tol: &Tolerances,
) -> Result<f64> {
    let c = problem.cost_matrix()?;
    let tight = tight_mask(&c, &base.dual, tol);
    face_extreme(&c, &problem.source.weights, &problem.target.weights, &tight, edge, true, tol)
}

/// Minimum of `gamma_ij` over optimal plans.
pub fn face_min_mass(
    problem: &TransportProblem,
    base: &Solution,
    edge: (usize, usize),
    tol: &Tolerances,
) -> Result<f64> {
    let c = problem.cost_matrix()?;
    let tight = tight_mask(&c, &base.dual, tol);
    face_extreme(&c, &problem.source.weights, &problem.target.weights, &tight, edge, false, tol)
}

/// `(min, max)` of `gamma_ij` over the optimal face.
pub fn face_range(
    problem: &TransportProblem,
    base: &Solution,
    edge: (usize, usize),
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let c = problem.cost_matrix()?;
    let tight = tight_mask(&c, &base.dual, tol);
    let (a, b) = (&problem.source.weights, &problem.target.weights);
    Ok((
        face_extreme(&c, a, b, &tight, edge, false, tol)?,
        face_extreme(&c, a, b, &tight, edge, true, tol)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::jump;
    use crate::solver::{reduced_costs, solve};

    #[test]
    fn degenerate_jump_face_is_a_segment() {
        let tol = Tolerances::default();
        let p = jump(0.0);
        let s = solve(&p, &tol).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let (lo, hi) = face_range(&p, &s, (i, j), &tol).unwrap();
                assert!((hi - 0.5).abs() < 1e-12, "({i},{j}) max {hi}");
                assert!(lo.abs() < 1e-12, "({i},{j}) min {lo}");
            }
        }
    }

    #[test]
    fn base_plan_is_a_witness() {
        let tol = Tolerances::default();
        let p = jump(0.1);
        let s = solve(&p, &tol).unwrap();
        for &(i, j, w) in &s.plan.entries {
            assert!(face_max_mass(&p, &s, (i, j), &tol).unwrap() >= w - 1e-15);
        }
    }

    #[test]
    fn positive_reduced_cost_edges_carry_nothing() {
        let tol = Tolerances::default();
        let p = jump(0.1);
        let s = solve(&p, &tol).unwrap();
        let r = reduced_costs(&p.cost_matrix().unwrap(), &s.dual);
        assert!(r.get(0, 1) > 0.0);
        assert_eq!(face_max_mass(&p, &s, (0, 1), &tol).unwrap(), 0.0);
        assert_eq!(face_max_mass(&p, &s, (1, 0), &tol).unwrap(), 0.0);
    }
}
