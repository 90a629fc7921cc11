mod common;

use common::{oracle, RationalInstance};
use otstruct::dualset::{assignable_sets, halfspaces, phi_interval_hull};
use otstruct::generators::{random_generic, random_rational};
use otstruct::solver::{face_range, solve, Coupling};
use otstruct::structure::{
    dual_unique, g_gamma, min_cycle_gap, primal_unique, support_graph, tight_graph, uniqueness_report,
};
use otstruct::{CostSpec, Tolerances, TransportProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn tie_heavy(rng: &mut ChaCha8Rng, max: usize) -> TransportProblem {
    let m = rng.random_range(1..=max);
    let n = rng.random_range(1..=max);
    let cost = if rng.random_bool(0.5) { CostSpec::PNorm { p: 2.0 } } else { CostSpec::Correlation };
    random_rational(rng, m, n, cost)
}

#[test]
fn g_gamma_is_sandwiched() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let p = tie_heavy(&mut rng, 6);
        let s = solve(&p, &tol()).unwrap();
        let g = g_gamma(&p, &s, &tol()).unwrap();
        assert!(support_graph(&s.plan).is_subgraph_of(&g));
        assert!(g.is_subgraph_of(&tight_graph(&p, &s.dual, &tol()).unwrap()));
    }
}

#[test]
fn g_gamma_matches_oracle_union() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..150 {
        let p = tie_heavy(&mut rng, 4);
        let o = oracle(&RationalInstance::from_problem(&p));
        let s = solve(&p, &tol()).unwrap();
        let r = uniqueness_report(&p, &s, &tol()).unwrap();
        let ours: Vec<(usize, usize)> = r.g_gamma.edges.clone();
        let theirs: Vec<(usize, usize)> = o.union_support.iter().copied().collect();
        assert_eq!(ours, theirs, "instance {k}");
        assert_eq!(r.primal_unique, o.optimal_vertices.len() == 1, "instance {k}");
        assert_eq!(r.dual_unique, o.optimal_duals.len() == 1, "instance {k}");
    }
}

#[test]
fn primal_uniqueness_matches_face_rigidity() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let p = tie_heavy(&mut rng, 4);
        let s = solve(&p, &tol()).unwrap();
        let g = g_gamma(&p, &s, &tol()).unwrap();
        let tight = tight_graph(&p, &s.dual, &tol()).unwrap();
        let mut rigid = true;
        for &(i, j) in &tight.edges {
            let (lo, hi) = face_range(&p, &s, (i, j), &tol()).unwrap();
            let w = s.plan.get(i, j);
            if w == 0.0 && hi > tol().mass {
                rigid = false;
            }
            if w > 0.0 && (hi - lo) > tol().mass {
                rigid = false;
            }
        }
        assert_eq!(primal_unique(&g), rigid);
    }
}

#[test]
fn chain_gap_certifies_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut suboptimal_seen = 0;
    for _ in 0..150 {
        let p = tie_heavy(&mut rng, 5);
        let s = solve(&p, &tol()).unwrap();
        let c = p.cost_matrix().unwrap();
        let max_len = p.m().min(p.n()).max(2);
        let (gap, _) = min_cycle_gap(&p, &s.plan, max_len).unwrap();
        assert!(gap >= -tol().tie * c.scale());
        // a feasible but non-optimal coupling: the product plan
        let prod = Coupling::new(
            p.m(),
            p.n(),
            (0..p.m())
                .flat_map(|i| (0..p.n()).map(move |j| (i, j)))
                .map(|(i, j)| (i, j, p.source.weights[i] * p.target.weights[j]))
                .collect(),
        )
        .unwrap();
        let (pgap, _) = min_cycle_gap(&p, &prod, max_len).unwrap();
        let optimal = prod.cost(&c) - s.value <= tol().tie * c.scale();
        assert_eq!(pgap >= -tol().tie * c.scale(), optimal);
        if !optimal {
            suboptimal_seen += 1;
        }
    }
    assert!(suboptimal_seen > 20);
}

#[test]
fn dual_uniqueness_matches_point_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for k in 0..200 {
        let p = if k % 2 == 0 {
            tie_heavy(&mut rng, 5)
        } else {
            random_generic(&mut rng, 1 + k % 5, 1 + (k / 2) % 5, CostSpec::PNorm { p: 2.0 })
        };
        let s = solve(&p, &tol()).unwrap();
        let g = g_gamma(&p, &s, &tol()).unwrap();
        let sys = halfspaces(&p, &assignable_sets(&g).unwrap()).unwrap();
        let hull = phi_interval_hull(&sys, &tol()).unwrap();
        assert_eq!(dual_unique(&g).unwrap(), hull.all_pinned(), "instance {k}");
    }
}

#[test]
fn unique_instances_have_g_gamma_equal_to_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for _ in 0..100 {
        let p = random_generic(&mut rng, 5, 4, CostSpec::PNorm { p: 2.0 });
        let s = solve(&p, &tol()).unwrap();
        let g = g_gamma(&p, &s, &tol()).unwrap();
        assert!(primal_unique(&g));
        assert_eq!(g.edges, support_graph(&s.plan).edges);
        // the centred dual is strictly complementary here
        assert_eq!(tight_graph(&p, &s.dual, &tol()).unwrap().edges, g.edges);
    }
}
