use std::f64::consts::PI;
use std::time::Instant;

use hypervol::catalog::{lookup, prism_235};
use hypervol::glue::*;
use hypervol::graph::*;

fn plan_of(g: &PlanarTrivalentGraph) -> DecompositionPlan {
    let trace = reduce(g, &Strategy::Default).unwrap();
    plan_from_trace(g, &trace).unwrap()
}

fn catalog_plan(name: &str) -> DecompositionPlan {
    let g = PlanarTrivalentGraph::from_file(&lookup(name).unwrap().polyhedron).unwrap();
    plan_of(&g)
}

// Length of the prism perpendicular, from an independent bisection of the angle sum.
const PRISM_LENGTH: f64 = 0.5067207574113386;

#[test]
fn prism_volume_and_angles() {
    let plan = plan_of(&prism_235());
    let t0 = Instant::now();
    let sol = solve(&plan, &SolveOptions::default()).unwrap();
    assert!(t0.elapsed().as_secs_f64() < 1.0);
    assert!((sol.volume - 2.63200).abs() < 1e-4, "{}", sol.volume);
    assert!((sol.lengths[0].length - PRISM_LENGTH).abs() < 1e-9);
    assert_eq!(sol.lengths[0].faces, (6, 7));
    for t in &sol.tetrahedra {
        let a = t.angles.iter().flatten().next().unwrap();
        assert!((a - 2.0 * PI / 5.0).abs() < 1e-8);
    }
    assert!(sol.max_residual() <= 1e-10);
    assert!(sol.multiplicity_note.is_empty());
    assert!(sol.jacobian_check < 1e-5, "{}", sol.jacobian_check);
    assert!(width_uniform_certificate(&sol, 1e-10).clean);
}

#[test]
fn potential_is_critical_at_solution() {
    let plan = plan_of(&prism_235());
    let sol = solve(&plan, &SolveOptions::default()).unwrap();
    let x = sol.length_vector();
    let grad = potential_gradient_fd(&plan, &x, 1e-5).unwrap();
    assert!(grad[0].abs() < 1e-6, "{grad:?}");
    let phi = potential(&plan, &x).unwrap();
    assert!((phi - sol.volume).abs() < 1e-9);
    // Away from the root the gradient is minus the residual.
    let y = [0.8];
    let g = potential_gradient_fd(&plan, &y, 1e-5).unwrap()[0];
    let r = residual(&plan, &y).unwrap()[0];
    assert!((g + r).abs() < 1e-7, "{g} {r}");
}

#[test]
fn prism_residual_changes_sign_once() {
    let plan = plan_of(&prism_235());
    let (lo, hi) = realizable_interval(&plan, &[0.5], 0, 5.0).unwrap();
    assert!(lo < 0.1 && hi > 4.0, "{lo} {hi}");
    let n = 400;
    let vals: Vec<f64> = (1..n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .map(|l| residual(&plan, &[l]).unwrap()[0])
        .collect();
    let changes = vals
        .windows(2)
        .filter(|w| w[0].signum() != w[1].signum())
        .count();
    assert_eq!(changes, 1);
    let below = residual(&plan, &[PRISM_LENGTH - 0.01]).unwrap()[0];
    let above = residual(&plan, &[PRISM_LENGTH + 0.01]).unwrap()[0];
    assert!(below * above < 0.0);
}

#[test]
fn analytic_jacobian_matches_differences() {
    let plan = catalog_plan("dodecahedron-right-angled");
    let x: Vec<f64> = (0..plan.length_variables.len())
        .map(|i| 0.9 + 0.05 * i as f64)
        .collect();
    let ev = evaluate_plan(&plan, &x).unwrap();
    let fd = jacobian_fd(&plan, &x, 1e-6).unwrap();
    assert!((&fd - &ev.jacobian).abs().max() < 1e-6);
    assert!((&ev.jacobian - ev.jacobian.transpose()).abs().max() < 1e-9);
}

#[test]
fn dodecahedra_volumes() {
    for (name, expected) in [
        ("dodecahedron-right-angled", 4.30621),
        ("dodecahedron-pi3", 20.5802),
    ] {
        let plan = catalog_plan(name);
        assert_eq!(plan.tetrahedra.len(), 16);
        let t0 = Instant::now();
        let sol = solve(&plan, &SolveOptions::default()).unwrap();
        assert!(t0.elapsed().as_secs_f64() < 30.0);
        assert!(
            (sol.volume - expected).abs() < 1e-3,
            "{name}: {}",
            sol.volume
        );
        assert!(sol.max_residual() <= 1e-10);
    }
}

#[test]
fn seeded_multistart_is_deterministic() {
    let plan = catalog_plan("dodecahedron-right-angled");
    let opts = SolveOptions {
        seed: 7,
        max_starts: 16,
        ..SolveOptions::default()
    };
    let a = solve(&plan, &opts).unwrap();
    let b = solve(&plan, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(starting_points(3, &opts), starting_points(3, &opts));
}

#[test]
fn wrong_dimension_is_an_error() {
    let plan = plan_of(&prism_235());
    assert!(matches!(
        residual(&plan, &[0.5, 0.5]),
        Err(GlueError::Dimension { .. })
    ));
}

#[test]
fn right_angled_prism_is_infeasible() {
    // With all angles π/2 the top and bottom pentagons are not ultra-parallel in any
    // realizable way that closes: the prism with right angles is a Euclidean prism.
    let mut g = prism_235();
    for e in g.edge_ids().collect::<Vec<_>>() {
        g.set_angle(e, PiRational { p: 1, q: 2 }).unwrap();
    }
    let plan = plan_of(&g);
    assert!(solve(&plan, &SolveOptions::default()).is_err());
}
