//! Wasserstein distances between measures, between plans on the product
//! space, between maps, and the anisotropic `tau_{c_eps}` family.

use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::measure::DiscreteMeasure;
use crate::problem::{pnorm_cost, sq_dist, CostMatrix};
use crate::solver::{solve_matrix, Coupling, Solution};
use crate::tolerance::Tolerances;

/// Largest product-space cost matrix `wp_plans` and `tau_c_eps` will build.
pub const PLAN_CELL_CAP: usize = 4_000_000;

/// A plan seen as a measure on `R^d x R^d`: atoms `x_i ⊕ y_j` with the plan
/// masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanAsMeasure {
    /// Dimension `d` of each half.
    pub d: usize,
    pub support: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl PlanAsMeasure {
    pub fn from_plan(plan: &Coupling, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<Self> {
        if xs.len() != plan.m || ys.len() != plan.n {
            return Err(OtError::DimensionMismatch {
                expected: plan.m + plan.n,
                found: xs.len() + ys.len(),
            });
        }
        let d = xs.first().map_or(0, Vec::len);
        if xs.iter().chain(ys).any(|p| p.len() != d) {
            return Err(OtError::InvalidInput("plan coordinates have mixed dimensions".into()));
        }
        let support = plan
            .entries
            .iter()
            .map(|&(i, j, _)| xs[i].iter().chain(&ys[j]).copied().collect())
            .collect();
        Ok(Self {
            d,
            support,
            weights: plan.entries.iter().map(|e| e.2).collect(),
        })
    }

    pub fn to_measure(&self) -> DiscreteMeasure {
        DiscreteMeasure {
            points: self.support.clone(),
            weights: self.weights.clone(),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(OtError::InvalidInput(format!("W_p needs p >= 1, got {p}")));
    }
    Ok(())
}

fn check_cap(cells: usize) -> Result<()> {
    if cells > PLAN_CELL_CAP {
        return Err(OtError::SizeCap {
            cells,
            cap: PLAN_CELL_CAP,
        });
    }
    Ok(())
}

/// Optimal coupling for `|x - y|^p` between two weighted clouds.
pub fn wp_solution(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, p: f64, tol: &Tolerances) -> Result<Solution> {
    check_p(p)?;
    if mu0.dim() != mu1.dim() {
        return Err(OtError::DimensionMismatch {
            expected: mu0.dim(),
            found: mu1.dim(),
        });
    }
    let c = CostMatrix::from_fn(mu0.len(), mu1.len(), |i, j| pnorm_cost(&mu0.points[i], &mu1.points[j], p));
    solve_matrix(&c, &mu0.weights, &mu1.weights, tol)
}

/// `W_p(mu0, mu1)`.
pub fn wp(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, p: f64, tol: &Tolerances) -> Result<f64> {
    Ok(wp_solution(mu0, mu1, p, tol)?.value.max(0.0).powf(1.0 / p))
}

/// `W_p` between two plans on the product space.
pub fn wp_plans(g0: &PlanAsMeasure, g1: &PlanAsMeasure, p: f64, tol: &Tolerances) -> Result<f64> {
    if g0.d != g1.d {
        return Err(OtError::DimensionMismatch {
            expected: 2 * g0.d,
            found: 2 * g1.d,
        });
    }
    check_cap(g0.weights.len() * g1.weights.len())?;
    wp(&g0.to_measure(), &g1.to_measure(), p, tol)
}

/// `(sum_i alpha_i |T0(x_i) - T1(x_i)|^p)^(1/p)` for assignments into two
/// target clouds.
pub fn map_lp_distance(
    t0: &[usize],
    t1: &[usize],
    alpha: &[f64],
    targets0: &[Vec<f64>],
    targets1: &[Vec<f64>],
    p: f64,
) -> Result<f64> {
    check_p(p)?;
    if t0.len() != alpha.len() || t1.len() != alpha.len() {
        return Err(OtError::DimensionMismatch {
            expected: alpha.len(),
            found: t0.len().min(t1.len()),
        });
    }
    if let Some(&j) = t0.iter().find(|&&j| j >= targets0.len()).or(t1.iter().find(|&&j| j >= targets1.len())) {
        return Err(OtError::InvalidInput(format!("assignment to target {j} out of range")));
    }
    let s: f64 = (0..alpha.len())
        .map(|i| alpha[i] * pnorm_cost(&targets0[t0[i]], &targets1[t1[i]], p))
        .sum();
    Ok(s.powf(1.0 / p))
}

/// [`map_lp_distance`] for two map-induced plans; fails on a split row.
pub fn map_lp_distance_plans(
    g0: &Coupling,
    g1: &Coupling,
    alpha: &[f64],
    targets0: &[Vec<f64>],
    targets1: &[Vec<f64>],
    p: f64,
) -> Result<f64> {
    map_lp_distance(&g0.as_map()?, &g1.as_map()?, alpha, targets0, targets1, p)
}

/// Optimal cost between two plans for
/// `c_eps = |x_0 - x_1|^2 + eps |y_0 - y_1|^2`.
pub fn tau_c_eps(g0: &PlanAsMeasure, g1: &PlanAsMeasure, eps: f64, tol: &Tolerances) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(OtError::InvalidInput(format!("eps must be nonnegative, got {eps}")));
    }
    if g0.d != g1.d {
        return Err(OtError::DimensionMismatch {
            expected: 2 * g0.d,
            found: 2 * g1.d,
        });
    }
    check_cap(g0.weights.len() * g1.weights.len())?;
    let d = g0.d;
    let c = CostMatrix::from_fn(g0.weights.len(), g1.weights.len(), |a, b| {
        let (u, v) = (&g0.support[a], &g1.support[b]);
        sq_dist(&u[..d], &v[..d]) + eps * sq_dist(&u[d..], &v[d..])
    });
    Ok(solve_matrix(&c, &g0.weights, &g1.weights, tol)?.value)
}

/// `sqrt(sum_i alpha_i v_i^2)`.
pub fn alpha_norm(v: &[f64], alpha: &[f64]) -> f64 {
    v.iter().zip(alpha).map(|(x, a)| a * x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Measures,
    Plans,
    Maps,
    Tau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub distance: f64,
    pub p: f64,
    pub kind: DistanceKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Vec<(usize, usize, f64)>>,
}

/// Lower constant in `W_p^p(plans) >= c_p (W_p^p(rho) + W_p^p(mu))`.
pub fn reverse_stability_constant(p: f64) -> f64 {
    1f64.min(2f64.powf(p / 2.0 - 1.0))
}

/// Upper constant `C_p = max(1, 2^{p/2 - 1})`.
pub fn stability_constant(p: f64) -> f64 {
    1f64.max(2f64.powf(p / 2.0 - 1.0))
}
