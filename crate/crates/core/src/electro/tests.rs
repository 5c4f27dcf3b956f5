use std::f64::consts::{PI, SQRT_2};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::{random_admissible, regular_polygon, rhomboid, shape_distance};

fn quick(restarts: usize) -> OptimizerOptions {
    OptimizerOptions {
        restarts,
        ..Default::default()
    }
}

#[test]
fn coulomb_small_configurations() {
    let sq = regular_polygon(4, 4.0, 2).unwrap();
    assert!((coulomb_energy(&sq, 1.0).unwrap() - (8.0 + 2.0 * SQRT_2)).abs() < 1e-12);
    let tri = regular_polygon(3, 3.0, 2).unwrap();
    assert!((coulomb_energy(&tri, 1.0).unwrap() - 6.0).abs() < 1e-12);
    let e2 = coulomb_energy(&sq, 2.0).unwrap();
    assert!((e2 - 4.0 * coulomb_energy(&sq, 1.0).unwrap()).abs() < 1e-12);
    assert!(coulomb_energy(&sq, 0.0).is_err());
}

#[test]
fn coulomb_forms_agree_on_random_configurations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..12 {
        let cfg = random_admissible(&mut rng, n, n as f64, 3, 0.9).unwrap();
        let a = coulomb_energy_pairs(&cfg, 1.3).unwrap();
        let b = coulomb_energy_regrouped(&cfg, 1.3).unwrap();
        assert!((a - b).abs() <= 1e-10 * a, "N={n}");
    }
}

#[test]
fn coincident_beads_rejected() {
    let cfg =
        PointConfiguration::new(2, 3.0, &[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    assert!(coulomb_energy(&cfg, 1.0).is_err());
}

#[test]
fn mean_chord_values() {
    let sq = regular_polygon(4, 4.0, 2).unwrap();
    assert!((f_m(&sq, 1).unwrap() - 1.0).abs() < 1e-14);
    assert!((f_m(&sq, 2).unwrap() - SQRT_2).abs() < 1e-14);
    let hex = regular_polygon(6, 6.0, 2).unwrap();
    assert!((f_m(&hex, 2).unwrap() - 3f64.sqrt()).abs() < 1e-14);
    assert!(f_m(&hex, 4).is_err());
}

fn check_gradient<O: Objective>(obj: &O, coords: &[f64], tol: f64) {
    let mut grad = vec![0.0; coords.len()];
    obj.gradient(coords, &mut grad).unwrap();
    let mut probe = coords.to_vec();
    for i in 0..coords.len() {
        let h = 1e-6;
        probe[i] = coords[i] + h;
        let p = obj.value(&probe).unwrap();
        probe[i] = coords[i] - h;
        let q = obj.value(&probe).unwrap();
        probe[i] = coords[i];
        let fd = (p - q) / (2.0 * h);
        assert!(
            (fd - grad[i]).abs() < tol * (1.0 + fd.abs()),
            "{i}: {fd} vs {}",
            grad[i]
        );
    }
}

#[test]
fn analytic_gradients_match_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = random_admissible(&mut rng, 6, 6.0, 3, 0.8).unwrap();
    check_gradient(&MeanChord { n: 6, dim: 3, m: 2 }, cfg.coords(), 1e-7);
    check_gradient(&MeanChord { n: 6, dim: 3, m: 3 }, cfg.coords(), 1e-7);
    check_gradient(
        &NegativeCoulomb {
            n: 6,
            dim: 3,
            q: 0.7,
        },
        cfg.coords(),
        1e-6,
    );
}

#[test]
fn closed_form_multipliers() {
    assert!((lagrange_closed_form(6, 2).unwrap() - 3f64.sqrt() / 6.0).abs() < 1e-15);
    assert!((lagrange_closed_form(4, 2).unwrap() - SQRT_2 / 4.0).abs() < 1e-15);
    for n in 2..20 {
        assert!((lagrange_closed_form(n, 1).unwrap() - 1.0 / n as f64).abs() < 1e-15);
    }
    let s = |x: f64| x.sin();
    let sigma = s(PI / 3.0).powi(2) / s(PI / 6.0).powi(2);
    assert!((sigma - 3.0).abs() < 1e-12);
}

#[test]
fn polygon_is_stationary_with_closed_form_multipliers() {
    for n in 3..10 {
        for m in 1..=n / 2 {
            let poly = regular_polygon(n, 1.0, 2).unwrap();
            let problem = Problem::new(n, 2, 1.0).unwrap();
            let lam = vec![lagrange_closed_form(n, m).unwrap(); n];
            let g = problem
                .lagrangian_gradient(&MeanChord { n, dim: 2, m }, poly.coords(), &lam)
                .unwrap();
            assert!(crate::linalg::norm(&g) < 1e-13, "N={n}, m={m}");
        }
    }
}

#[test]
fn gauge_counts() {
    assert_eq!(Problem::new(5, 2, 5.0).unwrap().free_count(), 7);
    assert_eq!(Problem::new(5, 3, 5.0).unwrap().free_count(), 9);
    assert_eq!(Problem::new(2, 3, 2.0).unwrap().free_count(), 1);
    assert!(Problem::new(1, 2, 1.0).is_err());
}

#[test]
fn maximize_fm_square() {
    let (cfg, rep) = maximize_fm(4, 4.0, 2, 2, &quick(4)).unwrap();
    assert!(rep.converged, "{rep:?}");
    assert!((rep.objective - SQRT_2).abs() < 1e-9);
    assert!(rep.slacks.iter().all(|z| z.abs() < 1e-8));
    let poly = regular_polygon(4, 4.0, 2).unwrap();
    assert!(shape_distance(&cfg, &poly).unwrap() < 1e-6);
    for l in &rep.multipliers {
        assert!((l - SQRT_2 / 4.0).abs() < 1e-6 * SQRT_2 / 4.0);
    }
}

#[test]
fn maximize_fm_triangle_and_hexagon() {
    let (cfg, rep) = maximize_fm(3, 3.0, 2, 1, &quick(2)).unwrap();
    assert!((rep.objective - 1.0).abs() < 1e-9);
    assert!(shape_distance(&cfg, &regular_polygon(3, 3.0, 2).unwrap()).unwrap() < 1e-6);
    let (cfg, rep) = maximize_fm(6, 6.0, 2, 2, &quick(4)).unwrap();
    assert!(rep.converged);
    assert!(shape_distance(&cfg, &regular_polygon(6, 6.0, 2).unwrap()).unwrap() < 1e-4);
}

#[test]
fn maximize_fm_is_deterministic() {
    let a = maximize_fm(5, 5.0, 2, 2, &quick(3)).unwrap();
    let b = maximize_fm(5, 5.0, 2, 2, &quick(3)).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
}

#[test]
fn minimize_coulomb_small() {
    let (cfg, rep) = minimize_coulomb(3, 3.0, 2, 1.0, &quick(2)).unwrap();
    assert!((coulomb_energy(&cfg, 1.0).unwrap() - 6.0).abs() < 1e-8);
    assert!((rep.objective + 6.0).abs() < 1e-8);
    let (cfg, _) = minimize_coulomb(4, 4.0, 2, 1.0, &quick(4)).unwrap();
    assert!((coulomb_energy(&cfg, 1.0).unwrap() - (8.0 + 2.0 * SQRT_2)).abs() < 1e-8);
    let (cfg, rep) = minimize_coulomb(5, 5.0, 3, 1.0, &quick(4)).unwrap();
    assert!(rep.converged);
    assert!(shape_distance(&cfg, &regular_polygon(5, 5.0, 3).unwrap()).unwrap() < 1e-4);
}

#[test]
fn ground_state_optimizer() {
    let (cfg, _) = maximize_ground_state(3, 3.0, 0.0, 2, &quick(2)).unwrap();
    assert!(shape_distance(&cfg, &regular_polygon(3, 3.0, 2).unwrap()).unwrap() < 1e-3);
    // Strong coupling: ε₁ varies by ~1e-9 relative across shapes.
    let tight = OptimizerOptions {
        outer_tol: 1e-12,
        inner_tol: 1e-14,
        max_outer: 20,
        ..quick(2)
    };
    let (cfg, _) = maximize_ground_state(4, 4.0, -1.0, 3, &tight).unwrap();
    assert!(shape_distance(&cfg, &regular_polygon(4, 4.0, 3).unwrap()).unwrap() < 1e-3);
}

#[test]
fn ground_state_ascent_from_perturbed_polygon() {
    let poly = regular_polygon(5, 5.0, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = random_admissible(&mut rng, 5, 5.0, 2, 1.0).unwrap();
    let coords: Vec<f64> = poly
        .coords()
        .iter()
        .zip(noise.coords())
        .map(|(p, e)| 0.9 * p + 0.05 * e)
        .collect();
    let start = PointConfiguration::from_flat(2, 5.0, coords).unwrap();
    assert!(start.is_admissible());
    let objective = GroundStateEnergy {
        dim: 2,
        length: 5.0,
        alpha: 0.0,
        step: 5e-6,
    };
    let e0 = objective.value(start.coords()).unwrap();
    let problem = Problem::new(5, 2, 5.0).unwrap();
    let (cfg, rep) = optimize_from(&problem, &objective, &start, &quick(1)).unwrap();
    let target = ground_energy(&poly, 0.0, 2).unwrap();
    assert!(rep.trace[0] > e0);
    assert!((rep.objective - target).abs() < 1e-6 * target.abs());
    assert!(shape_distance(&cfg, &poly).unwrap() < 1e-3);
}

#[test]
fn no_bound_state_is_an_error() {
    let err = maximize_ground_state(3, 3.0, 5.0, 3, &quick(1)).unwrap_err();
    assert!(matches!(err, Error::NoBoundState));
}

#[test]
fn invalid_options_rejected() {
    let opts = OptimizerOptions {
        restarts: 0,
        ..Default::default()
    };
    assert!(maximize_fm(4, 4.0, 2, 2, &opts).is_err());
    assert!(maximize_fm(4, 4.0, 2, 3, &quick(1)).is_err());
}

#[test]
fn projected_hessian_pentagon_negative() {
    let ev = projected_hessian(5, 2, DEFAULT_HESSIAN_STEP).unwrap();
    assert_eq!(ev.len(), 2);
    assert!(ev.iter().all(|&e| e < -1e-3), "{ev:?}");
}

#[test]
fn rhomboid_direction_curvature() {
    let (hess, poly) = lagrangian_hessian(4, 2, 2, 4.0, 1e-4).unwrap();
    // Polygon vertices sit at (a,0), (0,b), (−a,0), (0,−b) with a = cos φ,
    // b = sin φ and interior angle θ = 2φ.
    let phi = PI / 4.0;
    let v = [
        -phi.sin(),
        0.0,
        0.0,
        phi.cos(),
        phi.sin(),
        0.0,
        0.0,
        -phi.cos(),
    ]
    .map(|x| 0.5 * x);
    assert!((poly.point(1)[1] - phi.sin()).abs() < 1e-12);
    let quad: f64 = (0..8)
        .map(|r| (0..8).map(|c| v[r] * hess[r * 8 + c] * v[c]).sum::<f64>())
        .sum();
    assert!((quad + SQRT_2 / 4.0).abs() < 1e-7, "{quad}");
    // The same curvature from the family itself.
    let f = |t: f64| f_m(&rhomboid(t, 1.0).unwrap(), 2).unwrap();
    let h = 1e-4;
    let second = (f(PI / 2.0 + h) - 2.0 * f(PI / 2.0) + f(PI / 2.0 - h)) / (h * h);
    assert!((second + SQRT_2 / 4.0).abs() < 1e-6);
}

#[test]
fn rigid_motions_are_null_directions() {
    for (n, m, dim) in [(5, 2, 2), (6, 3, 2), (4, 2, 3)] {
        let (hess, poly) = lagrangian_hessian(n, m, dim, 1.0, 1e-4).unwrap();
        let size = n * dim;
        for v in rigid_motions(&poly) {
            let hv: Vec<f64> = (0..size)
                .map(|r| (0..size).map(|c| hess[r * size + c] * v[c]).sum())
                .collect();
            assert!(crate::linalg::norm(&hv) < 1e-6, "N={n} m={m} dim={dim}");
        }
    }
}

#[test]
fn tiny_step_detected() {
    let err = projected_hessian(6, 2, 1e-12).unwrap_err();
    assert!(matches!(err, Error::StepSize { .. }), "{err:?}");
}

#[test]
fn chebyshev_examples() {
    let seven = chebyshev_check(7).unwrap();
    let e = seven.iter().find(|c| c.m == 3 && c.r == 2).unwrap();
    assert!((e.lhs - 0.76223).abs() < 1e-5);
    assert!((e.rhs - 0.18825).abs() < 1e-5);
    assert!((e.margin - 0.57398).abs() < 1e-5);
    let eight = chebyshev_check(8).unwrap();
    let e = eight.iter().find(|c| c.m == 4 && c.r == 2).unwrap();
    assert!((e.margin - SQRT_2 / 2.0).abs() < 1e-12);
    assert!(chebyshev_check(5).unwrap().is_empty());
}

#[test]
fn chebyshev_u_identity() {
    for k in 0..12 {
        for t in [0.1, 0.7, 1.3, 2.9] {
            let expect = ((k + 1) as f64 * t).sin() / t.sin();
            assert!((chebyshev_u(k, t.cos()) - expect).abs() < 1e-10);
        }
    }
}

#[test]
fn restart_seeds_distinct() {
    let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|k| restart_seed(42, k)).collect();
    assert_eq!(seeds.len(), 1000);
}
