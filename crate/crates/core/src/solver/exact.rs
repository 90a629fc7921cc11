//! Rational-arithmetic solver used as ground truth for tie detection.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{OtError, Result};
use crate::problem::{CostSpec, TransportProblem};

use super::simplex::{self, PivotRule, SimplexConfig};
use super::{Coupling, DualPair, Solution};

pub const DEFAULT_ORACLE_CAP: usize = 400;

/// Largest `M * N` accepted by [`solve_exact`]; `OTSTRUCT_ORACLE_CAP` overrides.
pub fn oracle_cap() -> usize {
    std::env::var("OTSTRUCT_ORACLE_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_CAP)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactProblem {
    pub alpha: Vec<BigRational>,
    pub beta: Vec<BigRational>,
    /// Row-major `M x N`.
    pub cost: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub plan: Vec<(usize, usize, BigRational)>,
    pub phi: Vec<BigRational>,
    pub psi: Vec<BigRational>,
    pub value: BigRational,
    pub iterations: usize,
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn exact_float(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| OtError::InvalidInput(format!("{v} is not finite")))
}

/// Closest fraction with denominator at most `max_den` (continued fractions).
fn limit_denominator(v: &BigRational, max_den: &BigInt) -> BigRational {
    if v.denom() <= max_den {
        return v.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let (mut n, mut d) = (v.numer().clone(), v.denom().clone());
    loop {
        let a = n.clone() / d.clone();
        let q2 = &q0 + &a * &q1;
        if &q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = (max_den - &q0) / &q1;
    let b1 = BigRational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let b2 = BigRational::new(p1, q1);
    if (&b2 - v).abs() <= (&b1 - v).abs() {
        b2
    } else {
        b1
    }
}

fn rational_weights(w: &[f64]) -> Result<Vec<BigRational>> {
    w.iter().map(|&x| exact_float(x)).collect()
}

fn snap_weights(w: &[f64]) -> Result<Vec<BigRational>> {
    let cap = BigInt::from(1_000_000);
    w.iter().map(|&x| Ok(limit_denominator(&exact_float(x)?, &cap))).collect()
}

fn sum(v: &[BigRational]) -> BigRational {
    v.iter().fold(BigRational::zero(), |a, b| a + b)
}

impl ExactProblem {
    pub fn new(alpha: Vec<BigRational>, beta: Vec<BigRational>, cost: Vec<BigRational>) -> Result<Self> {
        if alpha.is_empty() || beta.is_empty() || cost.len() != alpha.len() * beta.len() {
            return Err(OtError::InvalidInput("exact problem shape mismatch".into()));
        }
        if alpha.iter().chain(&beta).any(|w| !w.is_positive()) {
            return Err(OtError::InvalidInput("exact weights must be strictly positive".into()));
        }
        if sum(&alpha) != sum(&beta) {
            return Err(OtError::Infeasible {
                defect: to_f64(&(sum(&alpha) - sum(&beta))).abs(),
            });
        }
        Ok(Self { alpha, beta, cost })
    }

    /// Converts coordinates and explicit costs exactly. Each weight is first
    /// snapped to the nearest fraction with denominator at most 10^6 (so `1/3`
    /// in binary floating point becomes `1/3`); if the snapped margins do not
    /// balance the exact binary values are used instead. Only `p = 2`,
    /// correlation and explicit costs have rational entries.
    pub fn from_problem(problem: &TransportProblem) -> Result<Self> {
        let (xs, ys) = (&problem.source.points, &problem.target.points);
        let q = |pts: &[Vec<f64>]| -> Result<Vec<Vec<BigRational>>> {
            pts.iter().map(|p| p.iter().map(|&v| exact_float(v)).collect()).collect()
        };
        let cost: Vec<BigRational> = match &problem.cost {
            CostSpec::PNorm { p } if *p == 2.0 => {
                let (xq, yq) = (q(xs)?, q(ys)?);
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for x in &xq {
                    for y in &yq {
                        out.push(x.iter().zip(y).fold(BigRational::zero(), |acc, (a, b)| {
                            let d = a - b;
                            acc + &d * &d
                        }));
                    }
                }
                out
            }
            CostSpec::PNorm { p } => {
                return Err(OtError::UnsupportedCost(format!(
                    "p = {p} has irrational costs; the exact solver handles p = 2, correlation and matrices"
                )))
            }
            CostSpec::Correlation => {
                let (xq, yq) = (q(xs)?, q(ys)?);
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for x in &xq {
                    for y in &yq {
                        out.push(-x.iter().zip(y).fold(BigRational::zero(), |acc, (a, b)| acc + a * b));
                    }
                }
                out
            }
            CostSpec::Matrix { values } => values.iter().flatten().map(|&v| exact_float(v)).collect::<Result<_>>()?,
        };
        let (a, b) = (snap_weights(&problem.source.weights)?, snap_weights(&problem.target.weights)?);
        if sum(&a) == sum(&b) {
            return Self::new(a, b, cost);
        }
        Self::new(
            rational_weights(&problem.source.weights)?,
            rational_weights(&problem.target.weights)?,
            cost,
        )
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }
}

impl ExactSolution {
    pub fn to_float(&self) -> Solution {
        let (m, n) = (self.phi.len(), self.psi.len());
        Solution {
            plan: Coupling {
                m,
                n,
                entries: self.plan.iter().map(|(i, j, w)| (*i, *j, to_f64(w))).collect(),
            },
            dual: DualPair {
                phi: self.phi.iter().map(to_f64).collect(),
                psi: self.psi.iter().map(to_f64).collect(),
            },
            value: to_f64(&self.value),
            iterations: self.iterations,
        }
    }
}

/// Optimal vertex and dual in exact arithmetic; no tolerances involved.
pub fn solve_exact(problem: &ExactProblem) -> Result<ExactSolution> {
    let (m, n) = (problem.m(), problem.n());
    let cap = oracle_cap();
    if m * n > cap {
        return Err(OtError::SizeCap { cells: m * n, cap });
    }
    let cfg = SimplexConfig {
        flow_eps: BigRational::zero(),
        cost_eps: BigRational::zero(),
        rule: PivotRule::Bland,
        max_iter: 1_000_000,
    };
    let out = simplex::solve(m, n, &problem.cost, &problem.alpha, &problem.beta, &cfg)?;
    let mut plan: Vec<(usize, usize, BigRational)> =
        out.basis.into_iter().filter(|(_, _, f)| f.is_positive()).collect();
    plan.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let value = plan
        .iter()
        .fold(BigRational::zero(), |acc, (i, j, f)| acc + f * &problem.cost[i * n + j]);
    Ok(ExactSolution {
        plan,
        phi: out.u,
        psi: out.v,
        value,
        iterations: out.iterations,
    })
}
