//! Instances reproducing the worked examples, plus seeded random families.

use rand::Rng;

use crate::homotopy::PathSpec;
use crate::measure::DiscreteMeasure;
use crate::problem::{pnorm_cost, CostSpec, TransportProblem};

fn p2() -> CostSpec {
    CostSpec::PNorm { p: 2.0 }
}

fn jump_source(eps: f64) -> Vec<Vec<f64>> {
    vec![vec![-1.0, eps], vec![1.0, -eps]]
}

fn jump_target() -> Vec<Vec<f64>> {
    vec![vec![0.0, 1.0], vec![0.0, -1.0]]
}

/// Two sources at `(-1, eps), (1, -eps)`, two targets at `(0, +-1)`, mass 1/2
/// each, quadratic cost. Unique plan unless `eps == 0`.
pub fn jump(eps: f64) -> TransportProblem {
    TransportProblem {
        source: DiscreteMeasure {
            points: jump_source(eps),
            weights: vec![0.5; 2],
        },
        target: DiscreteMeasure {
            points: jump_target(),
            weights: vec![0.5; 2],
        },
        cost: p2(),
    }
}

/// Linear path of the jump family from `eps0` to `eps1`.
pub fn jump_path(eps0: f64, eps1: f64, samples: usize) -> PathSpec {
    PathSpec {
        x0: jump_source(eps0),
        x1: jump_source(eps1),
        y0: jump_target(),
        y1: jump_target(),
        alpha: vec![0.5; 2],
        beta: vec![0.5; 2],
        cost: p2(),
        samples,
    }
}

/// Centres of the `grid x grid` cells of side `2 / grid` covering `[-1, 1]^2`
/// whose centre lies in the closed unit disc, uniform weights.
pub fn disc_source(grid: usize) -> DiscreteMeasure {
    let h = 2.0 / grid as f64;
    let mut points = Vec::new();
    for a in 0..grid {
        for b in 0..grid {
            let p = vec![-1.0 + (a as f64 + 0.5) * h, -1.0 + (b as f64 + 0.5) * h];
            if p[0] * p[0] + p[1] * p[1] <= 1.0 {
                points.push(p);
            }
        }
    }
    let w = 1.0 / points.len() as f64;
    DiscreteMeasure {
        weights: vec![w; points.len()],
        points,
    }
}

/// `x_theta = (sin theta, cos theta)`.
pub fn disc_direction(theta: f64) -> Vec<f64> {
    vec![theta.sin(), theta.cos()]
}

/// `mu_theta`: half the mass at `x_theta`, half at `x_{theta + pi}`.
pub fn disc_target(theta: f64) -> DiscreteMeasure {
    DiscreteMeasure {
        points: vec![disc_direction(theta), disc_direction(theta + std::f64::consts::PI)],
        weights: vec![0.5; 2],
    }
}

/// Uniform disc discretisation transported to the rotating two-point target.
pub fn disc(grid: usize, theta: f64) -> TransportProblem {
    TransportProblem {
        source: disc_source(grid),
        target: disc_target(theta),
        cost: p2(),
    }
}

/// Four sources at `(+-1, +-1)`, three targets `(0,1), (0,0), (1,0)`,
/// correlation cost. Dual unique, primal non-unique.
pub fn figure_cells() -> TransportProblem {
    TransportProblem {
        source: DiscreteMeasure {
            points: vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![-1.0, -1.0]],
            weights: vec![0.25; 4],
        },
        target: DiscreteMeasure {
            points: vec![vec![0.0, 1.0], vec![0.0, 0.0], vec![1.0, 0.0]],
            weights: vec![1.0 / 3.0; 3],
        },
        cost: CostSpec::Correlation,
    }
}

/// Two one-point clusters: sources `0, v`, targets `0, w`, mass 1/2 each,
/// quadratic cost.
pub fn two_cluster(v: &[f64], w: &[f64]) -> TransportProblem {
    let zero = vec![0.0; v.len()];
    TransportProblem {
        source: DiscreteMeasure {
            points: vec![zero.clone(), v.to_vec()],
            weights: vec![0.5; 2],
        },
        target: DiscreteMeasure {
            points: vec![zero, w.to_vec()],
            weights: vec![0.5; 2],
        },
        cost: p2(),
    }
}

/// Sources `A, B`; middle measure `(C, D, D)` moving to `(E, F, G)`.
/// The letters are the figure's labels; the figure gives no numbers, so the
/// coordinates are read off its drawing.
pub const GLUE_A: [f64; 2] = [-3.0, 1.4];
pub const GLUE_B: [f64; 2] = [-3.0, -1.4];
pub const GLUE_C: [f64; 2] = [-1.3, 0.9];
pub const GLUE_D: [f64; 2] = [-1.3, -1.1];
pub const GLUE_E: [f64; 2] = [3.0, 1.8];
pub const GLUE_F: [f64; 2] = [3.0, 0.0];
pub const GLUE_G: [f64; 2] = [3.0, -1.9];

pub fn glue_path(samples: usize) -> PathSpec {
    let v = |p: [f64; 2]| p.to_vec();
    PathSpec {
        x0: vec![v(GLUE_A), v(GLUE_B)],
        x1: vec![v(GLUE_A), v(GLUE_B)],
        y0: vec![v(GLUE_C), v(GLUE_D), v(GLUE_D)],
        y1: vec![v(GLUE_E), v(GLUE_F), v(GLUE_G)],
        alpha: vec![0.75, 0.25],
        beta: vec![0.5, 0.25, 0.25],
        cost: p2(),
        samples,
    }
}

/// Positive weights `k_i / K` with small integers `k_i`, so that ties between
/// partial sums (degenerate vertices) are common.
pub fn small_rational_weights<R: Rng>(rng: &mut R, n: usize, max_numer: u32) -> Vec<f64> {
    let k: Vec<u32> = (0..n).map(|_| rng.random_range(1..=max_numer)).collect();
    let total: u32 = k.iter().sum();
    k.iter().map(|&v| v as f64 / total as f64).collect()
}

/// Random weights with generic partial sums.
pub fn generic_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let k: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = k.iter().sum();
    let mut w: Vec<f64> = k.iter().map(|v| v / total).collect();
    // put the rounding defect on the largest entry
    let defect = 1.0 - w.iter().sum::<f64>();
    let big = (0..n).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap_or(0);
    w[big] += defect;
    w
}

/// Integer coordinates in `[-r, r]^d`; many exact ties in the cost matrix.
pub fn integer_points<R: Rng>(rng: &mut R, n: usize, d: usize, r: i32) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-r..=r) as f64).collect())
        .collect()
}

pub fn uniform_points<R: Rng>(rng: &mut R, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

/// Small instance with rational data and frequent degeneracy.
pub fn random_rational<R: Rng>(rng: &mut R, m: usize, n: usize, cost: CostSpec) -> TransportProblem {
    TransportProblem {
        source: DiscreteMeasure {
            points: integer_points(rng, m, 2, 2),
            weights: small_rational_weights(rng, m, 4),
        },
        target: DiscreteMeasure {
            points: integer_points(rng, n, 2, 2),
            weights: small_rational_weights(rng, n, 4),
        },
        cost,
    }
}

/// Generic continuous instance in the unit square.
pub fn random_generic<R: Rng>(rng: &mut R, m: usize, n: usize, cost: CostSpec) -> TransportProblem {
    TransportProblem {
        source: DiscreteMeasure {
            points: uniform_points(rng, m, 2, 0.0, 1.0),
            weights: generic_weights(rng, m),
        },
        target: DiscreteMeasure {
            points: uniform_points(rng, n, 2, 0.0, 1.0),
            weights: generic_weights(rng, n),
        },
        cost,
    }
}

/// Two separated clusters with matched mass, so `G_Gamma` splits in two.
/// Cluster B is cluster-A-like data shifted by `(10, 0)`.
pub fn random_two_cluster<R: Rng>(rng: &mut R, max_size: usize, cost: CostSpec) -> TransportProblem {
    let ka = rng.random_range(1..=max_size);
    let la = rng.random_range(1..=max_size);
    let kb = rng.random_range(1..=max_size);
    let lb = rng.random_range(1..=max_size);
    let share = rng.random_range(0.3..0.7);
    let shifted = |pts: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        pts.into_iter().map(|p| vec![p[0] + 10.0, p[1]]).collect()
    };
    let scale = |w: Vec<f64>, s: f64| -> Vec<f64> { w.into_iter().map(|v| v * s).collect() };
    let mut xs = uniform_points(rng, ka, 2, 0.0, 1.0);
    xs.extend(shifted(uniform_points(rng, kb, 2, 0.0, 1.0)));
    let mut ys = uniform_points(rng, la, 2, 0.0, 1.0);
    ys.extend(shifted(uniform_points(rng, lb, 2, 0.0, 1.0)));
    let mut alpha = scale(generic_weights(rng, ka), share);
    alpha.extend(scale(generic_weights(rng, kb), 1.0 - share));
    let mut beta = scale(generic_weights(rng, la), share);
    beta.extend(scale(generic_weights(rng, lb), 1.0 - share));
    TransportProblem {
        source: DiscreteMeasure { points: xs, weights: alpha },
        target: DiscreteMeasure { points: ys, weights: beta },
        cost,
    }
}

/// Moves each point by a small random step, shrinking the steps until the
/// identity pairing is `p`-optimal, so straight lines are a `W_p` geodesic.
fn geodesic_endpoint<R: Rng>(rng: &mut R, x0: &[Vec<f64>], w: &[f64], p: f64, step: f64) -> Vec<Vec<f64>> {
    let tol = crate::tolerance::Tolerances::default();
    let mut s = step;
    loop {
        let x1: Vec<Vec<f64>> = x0
            .iter()
            .map(|x| x.iter().map(|v| v + rng.random_range(-s..s)).collect())
            .collect();
        let identity: f64 = x0.iter().zip(&x1).zip(w).map(|((a, b), wi)| wi * pnorm_cost(a, b, p)).sum();
        let a = DiscreteMeasure { points: x0.to_vec(), weights: w.to_vec() };
        let b = DiscreteMeasure { points: x1.clone(), weights: w.to_vec() };
        if let Ok(v) = crate::metrics::wp(&a, &b, p, &tol) {
            if identity - v.powf(p) <= 1e-12 * (1.0 + identity) {
                return x1;
            }
        }
        s *= 0.5;
    }
}

/// Random affine path whose source and target motions are `W_p` geodesics,
/// with cost `|x - y|^p`.
pub fn random_geodesic_path<R: Rng>(rng: &mut R, m: usize, n: usize, p: f64, step: f64, samples: usize) -> PathSpec {
    let alpha = generic_weights(rng, m);
    let beta = generic_weights(rng, n);
    let x0 = uniform_points(rng, m, 2, 0.0, 1.0);
    let y0 = uniform_points(rng, n, 2, 0.0, 1.0);
    let x1 = geodesic_endpoint(rng, &x0, &alpha, p, step);
    let y1 = geodesic_endpoint(rng, &y0, &beta, p, step);
    PathSpec {
        x0,
        x1,
        y0,
        y1,
        alpha,
        beta,
        cost: CostSpec::PNorm { p },
        samples,
    }
}
