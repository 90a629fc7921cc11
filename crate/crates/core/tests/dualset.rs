use nalgebra::DMatrix;
use otstruct::dualset::{
    assignable_sets, halfspaces, is_dual_vertex, is_optimal_potential, sample_vertices, HalfSpaceSystem,
};
use otstruct::generators::{random_generic, random_rational};
use otstruct::problem::dot;
use otstruct::solver::{solve, DualPair, Solution};
use otstruct::structure::{g_gamma, tight_graph};
use otstruct::{CostSpec, Tolerances, TransportProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn setup(p: &TransportProblem) -> (Solution, HalfSpaceSystem) {
    let s = solve(p, &tol()).unwrap();
    let g = g_gamma(p, &s, &tol()).unwrap();
    (s, halfspaces(p, &assignable_sets(&g).unwrap()).unwrap())
}

#[test]
fn membership_is_translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let p = random_rational(&mut rng, 4, 3, CostSpec::PNorm { p: 2.0 });
        let (s, sys) = setup(&p);
        let phi: Vec<f64> = s.dual.phi.iter().map(|v| v + rng.random_range(-0.01..0.01)).collect();
        let lambda = rng.random_range(-50.0..50.0);
        let shifted: Vec<f64> = phi.iter().map(|v| v + lambda).collect();
        assert!((sys.violation(&phi) - sys.violation(&shifted)).abs() < 1e-9);
    }
}

#[test]
fn correlation_bounds_are_inner_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let p = random_rational(&mut rng, 4, 4, CostSpec::Correlation);
        let s = solve(&p, &tol()).unwrap();
        let sets = assignable_sets(&g_gamma(&p, &s, &tol()).unwrap()).unwrap();
        let sys = halfspaces(&p, &sets).unwrap();
        let (xs, ys) = (&p.source.points, &p.target.points);
        for &(i, k, h) in &sys.constraints {
            let diff: Vec<f64> = xs[i].iter().zip(&xs[k]).map(|(a, b)| a - b).collect();
            let expect = -sets.s[i].iter().map(|&j| dot(&diff, &ys[j])).fold(f64::INFINITY, f64::min);
            assert_eq!(h, expect);
        }
    }
}

/// Vertex of `D(C) ∩ {phi_0 = 0}` by rank: the active constraints (tight
/// cells plus the normalisation) must have rank `M + N`.
fn vertex_by_rank(p: &TransportProblem, d: &DualPair) -> bool {
    let c = p.cost_matrix().unwrap();
    let (m, n) = (p.m(), p.n());
    let thr = tol().tie * c.scale();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut norm = vec![0.0; m + n];
    norm[0] = 1.0;
    rows.push(norm);
    for i in 0..m {
        for j in 0..n {
            if (c.get(i, j) - d.phi[i] - d.psi[j]).abs() <= thr {
                let mut r = vec![0.0; m + n];
                r[i] = 1.0;
                r[m + j] = 1.0;
                rows.push(r);
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), m + n, |r, k| rows[r][k]);
    a.rank(1e-9) == m + n
}

#[test]
fn balinski_vertices_match_rank_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut vertices = 0;
    let mut non_vertices = 0;
    for k in 0..150 {
        let p = if k % 2 == 0 {
            random_rational(&mut rng, 3, 4, CostSpec::PNorm { p: 2.0 })
        } else {
            random_generic(&mut rng, 4, 3, CostSpec::Correlation)
        };
        let c = p.cost_matrix().unwrap();
        let vertex = otstruct::solver::solve_matrix(&c, &p.source.weights, &p.target.weights, &tol()).unwrap().dual;
        let centred = solve(&p, &tol()).unwrap().dual;
        let slack = DualPair {
            phi: vertex.phi.clone(),
            psi: vertex.psi.iter().enumerate().map(|(j, v)| if j == 0 { v - 0.25 } else { *v }).collect(),
        };
        for d in [vertex, centred, slack] {
            let ours = is_dual_vertex(&p, &d, &tol()).unwrap();
            assert_eq!(ours, vertex_by_rank(&p, &d));
            assert_eq!(ours, tight_graph(&p, &d, &tol()).unwrap().is_connected());
            if ours {
                vertices += 1;
            } else {
                non_vertices += 1;
            }
        }
    }
    assert!(vertices > 100 && non_vertices > 100, "{vertices} vertices, {non_vertices} non-vertices");
}

#[test]
fn sampled_phi_vertices_are_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let p = random_rational(&mut rng, 4, 4, CostSpec::PNorm { p: 2.0 });
        let (s, sys) = setup(&p);
        for phi in sample_vertices(&sys, 5, &mut rng, &tol()).unwrap() {
            assert!(sys.contains(&phi, &tol()));
            assert!(is_optimal_potential(&p, &phi, s.value, &tol()).unwrap());
        }
    }
}
