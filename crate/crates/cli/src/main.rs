use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use otstruct::analysis::analyze_with;
use otstruct::generators;
use otstruct::homotopy::{stability_check, track, PathSpec};
use otstruct::metrics::{
    map_lp_distance_plans, tau_c_eps, wp_plans, wp_solution, DistanceKind, DistanceReport, PlanAsMeasure,
};
use otstruct::solver::{solve, solve_exact, ExactProblem, Solution};
use otstruct::{CostSpec, DiscreteMeasure, OtError, Tolerances, TransportProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod sweep;

#[derive(Parser)]
#[command(name = "otstruct", version, about = "Structure of discrete optimal transport plans")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Relative tolerance for cost ties.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_tie: f64,
    /// Width to which homotopy events are bisected.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_event: f64,
    /// Override the sample count of a path.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Seed for randomized generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Solve with exact rational arithmetic (small instances only).
    #[arg(long, global = true)]
    oracle: bool,
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

impl Global {
    fn tol(&self) -> Result<Tolerances> {
        let tol = Tolerances {
            tie: self.tol_tie,
            event: self.tol_event,
            ..Tolerances::default()
        };
        tol.validate()?;
        Ok(tol)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a transport problem.
    Solve { problem: PathBuf },
    /// Uniqueness report: G_Gamma, verdicts, half-spaces and interval hull.
    Analyze { problem: PathBuf },
    /// Track the optimal plan along an affine path.
    Homotopy {
        path: PathBuf,
        /// Also compare endpoint plans against the stability bounds.
        #[arg(long)]
        stability: bool,
    },
    /// Emit a worked example as problem or path JSON.
    Example {
        #[command(subcommand)]
        which: Example,
    },
    /// CSV of distances to the t = 0 endpoint along a path.
    Sweep(sweep::SweepArgs),
    /// Distance between two measures, plans, maps, or the tau family.
    Metrics {
        kind: Kind,
        /// Measure JSON for `measures`, problem JSON otherwise.
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Anisotropy for `tau`.
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Include the optimal coupling between the two sides.
        #[arg(long)]
        witness: bool,
    },
}

#[derive(Subcommand)]
enum Example {
    /// Two sources at (-1, eps), (1, -eps); targets (0, 1), (0, -1).
    Jump {
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        eps: f64,
        /// Emit the path from `eps` to this value instead of a problem.
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
    },
    /// Gridded unit disc to a two-point target at angle theta.
    Disc {
        #[arg(long, default_value_t = 40)]
        grid: usize,
        #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
        theta: f64,
    },
    /// The four-by-three correlation instance.
    FigureCells,
    /// Two separated random clusters (uses --seed).
    TwoCluster {
        #[arg(long, default_value_t = 4)]
        max_size: usize,
    },
    /// Path with a non-unique glueing.
    Glue,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Measures,
    Plans,
    Maps,
    Tau,
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_problem(path: &PathBuf) -> Result<TransportProblem> {
    Ok(TransportProblem::from_json(&read(path)?)?)
}

fn load_path(path: &PathBuf, g: &Global) -> Result<PathSpec> {
    let mut spec = PathSpec::from_json(&read(path)?)?;
    if let Some(s) = g.samples {
        spec.samples = s;
    }
    Ok(spec)
}

fn solve_with(problem: &TransportProblem, g: &Global, tol: &Tolerances) -> Result<Solution> {
    if g.oracle {
        let exact = ExactProblem::from_problem(problem)?;
        problem.validate(tol)?;
        Ok(solve_exact(&exact)?.to_float())
    } else {
        Ok(solve(problem, tol)?)
    }
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn example(which: &Example, g: &Global) -> serde_json::Value {
    let samples = g.samples.unwrap_or(otstruct::homotopy::DEFAULT_SAMPLES);
    let problem = |p: TransportProblem| serde_json::to_value(p).expect("problem serialises");
    match which {
        Example::Jump { eps, to: None } => problem(generators::jump(*eps)),
        Example::Jump { eps, to: Some(e1) } => generators::jump_path(*eps, *e1, samples).to_json_value(),
        Example::Disc { grid, theta } => problem(generators::disc(*grid, *theta)),
        Example::FigureCells => problem(generators::figure_cells()),
        Example::TwoCluster { max_size } => {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            problem(generators::random_two_cluster(&mut rng, *max_size, CostSpec::PNorm { p: 2.0 }))
        }
        Example::Glue => generators::glue_path(samples).to_json_value(),
    }
}

fn plan_measure(p: &TransportProblem, s: &Solution) -> Result<PlanAsMeasure> {
    Ok(PlanAsMeasure::from_plan(&s.plan, &p.source.points, &p.target.points)?)
}

fn metrics(kind: Kind, a: &PathBuf, b: &PathBuf, p: f64, eps: f64, witness: bool, g: &Global) -> Result<DistanceReport> {
    let tol = g.tol()?;
    let report = |distance: f64, kind: DistanceKind, w: Option<Solution>| DistanceReport {
        distance,
        p,
        kind,
        witness: w.filter(|_| witness).map(|s| s.plan.entries),
    };
    if let Kind::Measures = kind {
        let parse = |path: &PathBuf| -> Result<DiscreteMeasure> {
            serde_json::from_str(&read(path)?).map_err(|e| OtError::InvalidInput(format!("bad measure JSON: {e}")).into())
        };
        let (mu0, mu1) = (parse(a)?, parse(b)?);
        let s = wp_solution(&mu0, &mu1, p, &tol)?;
        return Ok(report(s.value.max(0.0).powf(1.0 / p), DistanceKind::Measures, Some(s)));
    }
    let (pa, pb) = (load_problem(a)?, load_problem(b)?);
    let (sa, sb) = (solve_with(&pa, g, &tol)?, solve_with(&pb, g, &tol)?);
    let (ga, gb) = (plan_measure(&pa, &sa)?, plan_measure(&pb, &sb)?);
    Ok(match kind {
        Kind::Plans => {
            let d = wp_plans(&ga, &gb, p, &tol)?;
            let w = if witness { Some(wp_solution(&ga.to_measure(), &gb.to_measure(), p, &tol)?) } else { None };
            report(d, DistanceKind::Plans, w)
        }
        Kind::Maps => {
            if pa.source != pb.source {
                bail!(OtError::InvalidInput("maps need a common source measure".into()));
            }
            let d = map_lp_distance_plans(&sa.plan, &sb.plan, &pa.source.weights, &pa.target.points, &pb.target.points, p)?;
            report(d, DistanceKind::Maps, None)
        }
        Kind::Tau => report(tau_c_eps(&ga, &gb, eps, &tol)?, DistanceKind::Tau, None),
        Kind::Measures => unreachable!(),
    })
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let tol = g.tol()?;
    let text = match &cli.command {
        Command::Solve { problem } => json(&solve_with(&load_problem(problem)?, g, &tol)?.to_json_value())?,
        Command::Analyze { problem } => {
            let p = load_problem(problem)?;
            let base = solve_with(&p, g, &tol)?;
            json(&analyze_with(&p, base, &tol)?)?
        }
        Command::Homotopy { path, stability } => {
            let spec = load_path(path, g)?;
            let mut v = serde_json::to_value(track(&spec, &tol)?)?;
            if *stability {
                v["stability"] = serde_json::to_value(stability_check(&spec, &tol)?)?;
            }
            json(&v)?
        }
        Command::Example { which } => json(&example(which, g))?,
        Command::Sweep(args) => sweep::run(args, g, &tol)?,
        Command::Metrics { kind, a, b, p, eps, witness } => json(&metrics(*kind, a, b, *p, *eps, *witness, g)?)?,
    };
    emit(g, &text)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<serde_json::Error>().is_some() {
        return 2;
    }
    match err.downcast_ref::<OtError>() {
        Some(OtError::Infeasible { .. }) => 3,
        Some(
            OtError::InvalidInput(_)
            | OtError::DimensionMismatch { .. }
            | OtError::NonFiniteCost { .. }
            | OtError::UnsupportedCost(_)
            | OtError::SizeCap { .. }
            | OtError::MarginalMismatch(_)
            | OtError::NotAMap(_)
            | OtError::ChainNotDistinct(_)
            | OtError::OutsideSlack { .. },
        ) => 2,
        Some(_) => 1,
        None if err.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
