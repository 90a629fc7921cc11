//! CSV sweeps: distances from the `t = 0` endpoint along a path.
//!
//! Columns, in order: `t, wp_marginals, wp_plans, unique, ratio` where
//! `wp_marginals = (W_p^p(rho_0, rho_t) + W_p^p(mu_0, mu_t))^(1/p)` and
//! `ratio = wp_plans^2 / wp_marginals^2` (empty when the denominator is 0).

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use otstruct::generators::disc;
use otstruct::metrics::{wp, wp_plans, PlanAsMeasure};
use otstruct::solver::solve;
use otstruct::structure::{g_gamma, primal_unique};
use otstruct::{CostSpec, Tolerances, TransportProblem};
use rayon::prelude::*;

use crate::{load_path, Global};

#[derive(Args)]
pub struct SweepArgs {
    /// Path JSON. Omit when sweeping the disc example.
    path: Option<PathBuf>,
    /// Sweep the disc example over theta in [0, theta_max] instead.
    #[arg(long)]
    disc: bool,
    #[arg(long, default_value_t = 20)]
    grid: usize,
    #[arg(long, default_value_t = 0.5)]
    theta_max: f64,
    /// Exponent of the distances; defaults to the path's `p`, or 2.
    #[arg(long)]
    p: Option<f64>,
}

struct Row {
    t: f64,
    marginals: f64,
    plans: f64,
    unique: bool,
}

fn row(base: &TransportProblem, here: &TransportProblem, t: f64, p: f64, tol: &Tolerances) -> Result<Row> {
    let (s0, s1) = (solve(base, tol)?, solve(here, tol)?);
    let unique = primal_unique(&g_gamma(here, &s1, tol)?);
    let g0 = PlanAsMeasure::from_plan(&s0.plan, &base.source.points, &base.target.points)?;
    let g1 = PlanAsMeasure::from_plan(&s1.plan, &here.source.points, &here.target.points)?;
    let m = wp(&base.source, &here.source, p, tol)?.powf(p) + wp(&base.target, &here.target, p, tol)?.powf(p);
    Ok(Row {
        t,
        marginals: m.powf(1.0 / p),
        plans: wp_plans(&g0, &g1, p, tol)?,
        unique,
    })
}

pub fn run(args: &SweepArgs, g: &Global, tol: &Tolerances) -> Result<String> {
    let (grid, problems): (Vec<f64>, Vec<TransportProblem>) = match (&args.path, args.disc) {
        (Some(path), false) => {
            let spec = load_path(path, g)?;
            spec.validate(tol)?;
            let ts = spec.grid();
            let ps = ts.iter().map(|&t| spec.at(t)).collect();
            (ts, ps)
        }
        (None, true) => {
            let steps = g.samples.unwrap_or(11).max(2);
            let ts: Vec<f64> = (0..steps).map(|k| args.theta_max * k as f64 / (steps - 1) as f64).collect();
            let ps = ts.iter().map(|&t| disc(args.grid, t)).collect();
            (ts, ps)
        }
        _ => bail!(otstruct::OtError::InvalidInput("give either a path file or --disc".into())),
    };
    let p = args.p.unwrap_or(match problems[0].cost {
        CostSpec::PNorm { p } => p,
        _ => 2.0,
    });
    let rows: Vec<Row> = grid
        .par_iter()
        .zip(&problems)
        .map(|(&t, here)| row(&problems[0], here, t, p, tol))
        .collect::<Result<_>>()?;
    let mut out = String::from("t,wp_marginals,wp_plans,unique,ratio\n");
    for r in rows {
        let ratio = if r.marginals > 0.0 {
            format!("{}", (r.plans * r.plans) / (r.marginals * r.marginals))
        } else {
            String::new()
        };
        out += &format!("{},{},{},{},{}\n", r.t, r.marginals, r.plans, r.unique, ratio);
    }
    Ok(out)
}
