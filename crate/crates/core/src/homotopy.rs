//! Tracking optimal plans along affine interpolations of the support points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::measure::DiscreteMeasure;
use crate::metrics::{reverse_stability_constant, stability_constant, wp, wp_plans, PlanAsMeasure};
use crate::problem::{dot, CostSpec, TransportProblem};
use crate::solver::{reduced_costs, solve, Coupling, Solution};
use crate::structure::g_gamma;
use crate::tolerance::Tolerances;

pub const DEFAULT_SAMPLES: usize = 64;

/// Affine motion `X(t) = (1 - t) X0 + t X1`, `Y(t)` likewise, with fixed
/// weights and cost kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub x0: Vec<Vec<f64>>,
    pub x1: Vec<Vec<f64>>,
    pub y0: Vec<Vec<f64>>,
    pub y1: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub cost: CostSpec,
    pub samples: usize,
}

#[derive(Serialize, Deserialize)]
struct PathWire {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    cost: CostSpec,
    x1: Vec<Vec<f64>>,
    y1: Vec<Vec<f64>>,
    #[serde(default = "default_samples")]
    samples: usize,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn lerp(a: &[Vec<f64>], b: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.iter().zip(q).map(|(u, v)| (1.0 - t) * u + t * v).collect())
        .collect()
}

impl PathSpec {
    /// Endpoint shapes must agree; the problem at `t = 0` must be valid.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let shape = |v: &[Vec<f64>]| v.iter().map(Vec::len).collect::<Vec<_>>();
        if shape(&self.x0) != shape(&self.x1) || shape(&self.y0) != shape(&self.y1) {
            return Err(OtError::InvalidInput("path endpoints have different shapes".into()));
        }
        if self.samples < 2 {
            return Err(OtError::InvalidInput(format!("need at least 2 samples, got {}", self.samples)));
        }
        self.at(0.0).validate(tol)?;
        self.at(1.0).validate(tol)
    }

    pub fn at(&self, t: f64) -> TransportProblem {
        TransportProblem {
            source: DiscreteMeasure {
                points: lerp(&self.x0, &self.x1, t),
                weights: self.alpha.clone(),
            },
            target: DiscreteMeasure {
                points: lerp(&self.y0, &self.y1, t),
                weights: self.beta.clone(),
            },
            cost: self.cost.clone(),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let s = self.samples.max(2);
        (0..s).map(|k| k as f64 / (s - 1) as f64).collect()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(PathWire {
            source: DiscreteMeasure {
                points: self.x0.clone(),
                weights: self.alpha.clone(),
            },
            target: DiscreteMeasure {
                points: self.y0.clone(),
                weights: self.beta.clone(),
            },
            cost: self.cost.clone(),
            x1: self.x1.clone(),
            y1: self.y1.clone(),
            samples: self.samples,
        })
        .expect("path serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: PathWire = serde_json::from_str(s).map_err(|e| OtError::InvalidInput(format!("bad path JSON: {e}")))?;
        Ok(Self {
            x0: w.source.points,
            x1: w.x1,
            y0: w.target.points,
            y1: w.y1,
            alpha: w.source.weights,
            beta: w.target.weights,
            cost: w.cost,
            samples: w.samples,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub side: Side,
    pub a: usize,
    pub b: usize,
    pub t: f64,
    pub distance: f64,
}

fn crossings(p0: &[Vec<f64>], p1: &[Vec<f64>], side: Side, tol: &Tolerances) -> Vec<Crossing> {
    let mut out = Vec::new();
    for a in 0..p0.len() {
        for b in a + 1..p0.len() {
            let d0: Vec<f64> = p0[a].iter().zip(&p0[b]).map(|(u, v)| u - v).collect();
            let d1: Vec<f64> = p1[a].iter().zip(&p1[b]).map(|(u, v)| u - v).collect();
            let dd: Vec<f64> = d1.iter().zip(&d0).map(|(u, v)| u - v).collect();
            let thr = tol.tie * (1.0 + dot(&d0, &d0).sqrt() + dot(&d1, &d1).sqrt());
            let bb = dot(&dd, &dd);
            // |d0 + t dd|^2 is minimised at t* = -<d0, dd> / |dd|^2
            let t = if bb > 0.0 { -dot(&d0, &dd) / bb } else { 0.5 };
            if !(t > 0.0 && t < 1.0) {
                continue;
            }
            let gap: Vec<f64> = d0.iter().zip(&dd).map(|(u, v)| u + t * v).collect();
            let distance = dot(&gap, &gap).sqrt();
            if distance <= thr {
                out.push(Crossing { side, a, b, t, distance });
            }
        }
    }
    out
}

/// Pairs of sources (or targets) that meet strictly inside `(0, 1)`.
/// Meetings at the endpoints are allowed and not reported.
pub fn noncrossing_check(path: &PathSpec, tol: &Tolerances) -> Vec<Crossing> {
    let mut out = crossings(&path.x0, &path.x1, Side::Source, tol);
    out.extend(crossings(&path.y0, &path.y1, Side::Target, tol));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    UniquenessLost,
    Crossing,
}

/// `[t_low, t_high, kind]` on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event(pub f64, pub f64, pub EventKind);

#[derive(Debug, Clone, PartialEq)]
struct SampleState {
    unique: bool,
    plan: Coupling,
    margin: f64,
}

impl SampleState {
    fn same(&self, other: &Self, tol: &Tolerances) -> bool {
        self.unique == other.unique && self.plan.same_as(&other.plan, tol.mass)
    }
}

fn sample_state(path: &PathSpec, t: f64, tol: &Tolerances) -> Result<SampleState> {
    let p = path.at(t);
    let s = solve(&p, tol)?;
    let g = g_gamma(&p, &s, tol)?;
    let r = reduced_costs(&p.cost_matrix()?, &s.dual);
    let mut margin = f64::INFINITY;
    for i in 0..p.m() {
        for j in 0..p.n() {
            if !g.contains((i, j)) {
                margin = margin.min(r.get(i, j));
            }
        }
    }
    Ok(SampleState {
        unique: g.is_acyclic(),
        plan: s.plan,
        margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub t: f64,
    pub unique: bool,
    /// Smallest reduced cost over edges outside `G_Gamma`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackReport {
    pub events: Vec<Event>,
    /// Unique at every sample, same plan (support and masses) at every
    /// sample, no event. A grid certificate, not a proof.
    pub persistent: bool,
    /// Plan at `t = 0`; when `persistent` this is the plan on the whole path.
    pub pattern: Vec<(usize, usize, f64)>,
    pub samples: Vec<TrackSample>,
    /// Grid spacing `1 / (samples - 1)`; events narrower than this can be missed.
    pub resolution: f64,
    pub crossings: Vec<Crossing>,
}

/// Bisects between two differing states down to `tol.event`.
fn bracket(path: &PathSpec, mut lo: f64, mut hi: f64, left: &SampleState, tol: &Tolerances) -> Result<(f64, f64)> {
    while hi - lo > tol.event {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sample_state(path, mid, tol)?.same(left, tol) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Bisects the sign change of the cost difference between two vertex plans.
/// The tie band around the switch is wider than `tol.event`, so bisecting the
/// verdict would report its two edges instead of the switch itself.
fn bracket_switch(
    path: &PathSpec,
    mut lo: f64,
    mut hi: f64,
    left: &Coupling,
    right: &Coupling,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let gap = |t: f64| -> Result<f64> {
        let c = path.at(t).cost_matrix()?;
        Ok(left.cost(&c) - right.cost(&c))
    };
    while hi - lo > tol.event {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Solves on the grid, and brackets every change of uniqueness verdict or
/// plan between neighbouring samples by bisection.
pub fn track(path: &PathSpec, tol: &Tolerances) -> Result<TrackReport> {
    tol.validate()?;
    path.validate(tol)?;
    let grid = path.grid();
    let states: Vec<SampleState> = grid
        .par_iter()
        .map(|&t| sample_state(path, t, tol))
        .collect::<Result<_>>()?;
    let mut events = Vec::new();
    let mut k = 1;
    while k < grid.len() {
        // a sample landing exactly on a vertex switch
        if k + 1 < grid.len()
            && !states[k].unique
            && states[k - 1].unique
            && states[k + 1].unique
            && !states[k - 1].plan.same_as(&states[k + 1].plan, tol.mass)
        {
            let (lo, hi) = bracket_switch(path, grid[k - 1], grid[k + 1], &states[k - 1].plan, &states[k + 1].plan, tol)?;
            events.push(Event(lo, hi, EventKind::UniquenessLost));
            k += 2;
            continue;
        }
        let (a, b) = (&states[k - 1], &states[k]);
        if !b.same(a, tol) {
            let (lo, hi) = if a.unique && b.unique {
                bracket_switch(path, grid[k - 1], grid[k], &a.plan, &b.plan, tol)?
            } else {
                bracket(path, grid[k - 1], grid[k], a, tol)?
            };
            events.push(Event(lo, hi, EventKind::UniquenessLost));
        }
        k += 1;
    }
    let crossings = noncrossing_check(path, tol);
    events.extend(crossings.iter().map(|c| Event(c.t, c.t, EventKind::Crossing)));
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let persistent = events.is_empty() && states.iter().all(|s| s.unique);
    Ok(TrackReport {
        events,
        persistent,
        pattern: states[0].plan.entries.clone(),
        samples: grid
            .iter()
            .zip(&states)
            .map(|(&t, s)| TrackSample {
                t,
                unique: s.unique,
                margin: s.margin,
            })
            .collect(),
        resolution: 1.0 / (grid.len() - 1) as f64,
        crossings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueResult {
    pub plan: Coupling,
    /// Some middle atom has a split column in `gamma0` and a split row in
    /// `pi`, so other glueings exist.
    pub alternatives: bool,
}

/// Disintegration glueing `sum_j gamma0(i, j) pi(j, k) / mu0(j)`.
pub fn glue_composition(gamma0: &Coupling, pi: &Coupling, tol: &Tolerances) -> Result<GlueResult> {
    if gamma0.n != pi.m {
        return Err(OtError::MarginalMismatch(format!(
            "gamma0 has {} middle atoms, pi has {}",
            gamma0.n, pi.m
        )));
    }
    let (mid0, mid1) = (gamma0.col_sums(), pi.row_sums());
    if let Some(j) = (0..mid0.len()).find(|&j| (mid0[j] - mid1[j]).abs() > tol.mass) {
        return Err(OtError::MarginalMismatch(format!(
            "middle atom {j}: {} from gamma0, {} from pi",
            mid0[j], mid1[j]
        )));
    }
    let mut rows_of_pi = vec![Vec::new(); pi.m];
    for &(j, k, w) in &pi.entries {
        rows_of_pi[j].push((k, w));
    }
    let mut col_count = vec![0usize; gamma0.n];
    let mut dense = vec![0.0; gamma0.m * pi.n];
    for &(i, j, g) in &gamma0.entries {
        col_count[j] += 1;
        for &(k, w) in &rows_of_pi[j] {
            dense[i * pi.n + k] += g * w / mid1[j];
        }
    }
    let alternatives = (0..gamma0.n).any(|j| col_count[j] >= 2 && rows_of_pi[j].len() >= 2);
    let entries = dense
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(k, &w)| (k / pi.n, k % pi.n, w))
        .collect();
    Ok(GlueResult {
        plan: Coupling::new(gamma0.m, pi.n, entries)?,
        alternatives,
    })
}

/// A plan placed at new coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedPlan {
    pub plan: Coupling,
    pub problem: TransportProblem,
}

impl PlacedPlan {
    /// `<C(t), plan>`.
    pub fn cost(&self) -> Result<f64> {
        Ok(self.plan.cost(&self.problem.cost_matrix()?))
    }

    pub fn as_measure(&self) -> Result<PlanAsMeasure> {
        PlanAsMeasure::from_plan(&self.plan, &self.problem.source.points, &self.problem.target.points)
    }
}

/// The masses of a plan at parameter `s` placed on `(x_i(t), y_j(t))`.
pub fn structural_glue(path: &PathSpec, s: f64, t: f64, plan_at_s: &Coupling) -> Result<PlacedPlan> {
    if plan_at_s.m != path.alpha.len() || plan_at_s.n != path.beta.len() {
        return Err(OtError::DimensionMismatch {
            expected: path.alpha.len() * path.beta.len(),
            found: plan_at_s.m * plan_at_s.n,
        });
    }
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
        return Err(OtError::InvalidInput(format!("parameters ({s}, {t}) outside [0, 1]")));
    }
    Ok(PlacedPlan {
        plan: plan_at_s.clone(),
        problem: path.at(t),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub p: f64,
    /// `W_p^p(gamma_0, gamma_1)`.
    pub lhs: f64,
    /// `W_p^p(rho_0, rho_1) + W_p^p(mu_0, mu_1)`.
    pub sum: f64,
    pub rhs_lower: f64,
    pub rhs_upper: f64,
    pub pass: bool,
}

/// Slack allowed on both sides of the stability sandwich.
pub const STABILITY_SLACK: f64 = 1e-7;

/// Compares `W_p^p` of the endpoint plans with the marginal distances, for a
/// path whose cost is `|x - y|^p`.
pub fn stability_check(path: &PathSpec, tol: &Tolerances) -> Result<StabilityReport> {
    let p = match path.cost {
        CostSpec::PNorm { p } => p,
        ref other => return Err(OtError::UnsupportedCost(format!("stability needs a p-norm cost, got {other:?}"))),
    };
    let (a, b) = (path.at(0.0), path.at(1.0));
    let (sa, sb): (Solution, Solution) = (solve(&a, tol)?, solve(&b, tol)?);
    stability_from_plans(&a, &sa.plan, &b, &sb.plan, p, tol)
}

pub fn stability_from_plans(
    a: &TransportProblem,
    plan_a: &Coupling,
    b: &TransportProblem,
    plan_b: &Coupling,
    p: f64,
    tol: &Tolerances,
) -> Result<StabilityReport> {
    let ga = PlanAsMeasure::from_plan(plan_a, &a.source.points, &a.target.points)?;
    let gb = PlanAsMeasure::from_plan(plan_b, &b.source.points, &b.target.points)?;
    let lhs = wp_plans(&ga, &gb, p, tol)?.powf(p);
    let sum = wp(&a.source, &b.source, p, tol)?.powf(p) + wp(&a.target, &b.target, p, tol)?.powf(p);
    let (rhs_lower, rhs_upper) = (reverse_stability_constant(p) * sum, stability_constant(p) * sum);
    Ok(StabilityReport {
        p,
        lhs,
        sum,
        rhs_lower,
        rhs_upper,
        pass: rhs_lower - STABILITY_SLACK <= lhs && lhs <= rhs_upper + STABILITY_SLACK,
    })
}
