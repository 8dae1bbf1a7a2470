use std::f64::consts::TAU;

use discon_core::mesh::hex_patch;
use discon_core::mobius::{to_c, Mobius};
use discon_core::packing::{
    angle_sums, euclidean_angle, hexagonal_constant, hyperbolic_angle, layout, solve_euclidean,
    solve_maximal_hyperbolic,
};
use discon_core::{build_triangulation, hex_fill, Domain, PackingError, PackingLabel, Point, SolverConfig, Triangulation};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn flower() -> Triangulation {
    let tris: Vec<[usize; 3]> = (0..6).map(|i| [0, 1 + i, 1 + (i + 1) % 6]).collect();
    build_triangulation(&tris).unwrap()
}

fn cfg(tol: f64) -> SolverConfig {
    SolverConfig { tol, max_sweeps: 1_000_000, initial: None }
}

/// Center radius closing up petals `p` by bisection on the angle sum.
fn flower_center(p: &[f64]) -> f64 {
    let sum = |r: f64| (0..p.len()).map(|i| euclidean_angle(r, p[i], p[(i + 1) % p.len()])).sum::<f64>();
    let (mut lo, mut hi) = (1e-6f64, 1e6f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if sum(mid) > TAU {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

#[test]
fn euclidean_flower_matches_bisection() {
    let t = flower();
    let petals = [1.0, 1.0, 1.0, 1.0, 1.0, 2.0];
    assert_eq!(t.boundary_vertices(), vec![1, 2, 3, 4, 5, 6]);
    let (label, stats) = solve_euclidean(&t, &petals, &cfg(1e-14)).unwrap();
    assert!(stats.residual <= 1e-14);
    let want = flower_center(&petals);
    assert!((label.values[0] - want).abs() <= 1e-12 * want, "{} vs {want}", label.values[0]);
    let lay = layout(&t, &label, 0, 1, 1e-12).unwrap();
    assert!(lay.tangency_error(&t) <= 1e-11);
}

#[test]
fn uniform_flower_has_unit_center() {
    let t = flower();
    let (label, _) = solve_euclidean(&t, &[1.0; 6], &cfg(1e-14)).unwrap();
    assert!((label.values[0] - 1.0).abs() < 1e-13);
}

#[test]
fn euclidean_solver_rejects_bad_boundary() {
    let t = flower();
    assert!(matches!(solve_euclidean(&t, &[1.0; 5], &cfg(TOL)), Err(PackingError::BadInput(_))));
    assert!(matches!(solve_euclidean(&t, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0], &cfg(TOL)), Err(PackingError::BadInput(_))));
}

#[test]
fn solver_reports_non_convergence() {
    let t = hex_patch(6).triangulation;
    let err = solve_maximal_hyperbolic(&t, &SolverConfig { tol: 1e-14, max_sweeps: 2, initial: None }).unwrap_err();
    assert!(matches!(err, PackingError::NoConvergence { sweeps: 2, .. }));
}

#[test]
fn layout_rejects_boundary_anchor() {
    let t = flower();
    let (label, _) = solve_euclidean(&t, &[1.0; 6], &cfg(TOL)).unwrap();
    assert!(matches!(layout(&t, &label, 1, 0, TOL), Err(PackingError::BadInput(_))));
    assert!(matches!(layout(&t, &label, 0, 0, TOL), Err(PackingError::BadInput(_))));
}

#[test]
fn maximal_packing_of_disk_carrier() {
    let fill = hex_fill(&Domain::unit_disk(), 12, Point::zeros()).unwrap();
    let t = &fill.triangulation;
    let (label, stats) = solve_maximal_hyperbolic(t, &cfg(TOL)).unwrap();
    assert!(stats.residual <= TOL);
    assert!(angle_sums(t, &label).max_interior_abs() <= TOL);
    let c = fill.anchor_vertex;
    let lay = layout(t, &label, c, t.neighbors(c)[0], TOL).unwrap();
    assert!(lay.tangency_error(t) <= 10.0 * TOL);
    assert!(lay.horocycle_error(&t.boundary_vertices()) <= 1e-10);
    assert!(lay.realization.positions[c].norm() == 0.0);
    lay.realization.validate(t).unwrap();

    let (finer, _) = solve_maximal_hyperbolic(t, &cfg(TOL / 10.0)).unwrap();
    let lay2 = layout(t, &finer, c, t.neighbors(c)[0], TOL / 10.0).unwrap();
    let worst = (0..t.vertex_count()).map(|v| (lay.radii[v] - lay2.radii[v]).abs()).fold(0.0, f64::max);
    assert!(worst < TOL * 100.0, "radii moved by {worst:e}");
}

#[test]
fn relayout_differs_by_a_disk_automorphism() {
    let fill = hex_fill(&Domain::square(1.0), 8, Point::zeros()).unwrap();
    let t = &fill.triangulation;
    let (label, _) = solve_maximal_hyperbolic(t, &cfg(TOL)).unwrap();
    let interior = t.interior_vertices();
    let (a, b) = (interior[0], interior[interior.len() / 2]);
    let la = layout(t, &label, a, t.neighbors(a)[0], TOL).unwrap();
    let lb = layout(t, &label, b, t.neighbors(b)[0], TOL).unwrap();
    let (ma, mb) = (la.markers.unwrap(), lb.markers.unwrap());
    let pick = [interior[1], interior[2], a];
    let m = Mobius::from_three_points(pick.map(|v| to_c(&ma[v])), pick.map(|v| to_c(&mb[v])));
    let worst = (0..t.vertex_count()).map(|v| (m.apply(to_c(&ma[v])) - to_c(&mb[v])).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "residual {worst:e}");
}

#[test]
fn hexagonal_constants_decrease() {
    let ms_range = 2..=8;
    let s: Vec<f64> = ms_range.clone().map(|m| hexagonal_constant(m, &cfg(1e-13)).unwrap()).collect();
    assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
    let ms: Vec<f64> = ms_range.zip(&s).map(|(m, x)| m as f64 * x).collect();
    assert!(ms.iter().all(|&x| x <= ms[0]), "{ms:?}");
}

proptest! {
    #[test]
    fn euclidean_angle_monotone(r in prop::array::uniform3(0.01..10.0f64), h in 1e-4..1e-2f64) {
        let a = euclidean_angle(r[0], r[1], r[2]);
        prop_assert!(euclidean_angle(r[0] * (1.0 + h), r[1], r[2]) < a);
        prop_assert!(euclidean_angle(r[0], r[1] * (1.0 + h), r[2]) > a);
        prop_assert!(euclidean_angle(r[0], r[1], r[2] * (1.0 + h)) > a);
    }

    #[test]
    fn hyperbolic_angle_monotone(s in prop::array::uniform3(0.01..0.99f64), h in 1e-4..1e-2f64) {
        let a = hyperbolic_angle(s[0], s[1], s[2]);
        prop_assert!(hyperbolic_angle(s[0] * (1.0 + h), s[1], s[2]) > a);
        prop_assert!(hyperbolic_angle(s[0], s[1] * (1.0 + h), s[2]) < a);
        prop_assert!(hyperbolic_angle(s[0], s[1], s[2] * (1.0 + h)) < a);
    }

    #[test]
    fn euclidean_flower_closes(petals in prop::array::uniform6(0.1..5.0f64)) {
        let t = flower();
        let (label, _) = solve_euclidean(&t, &petals, &cfg(1e-13)).unwrap();
        let want = flower_center(&petals);
        prop_assert!((label.values[0] - want).abs() <= 1e-11 * want);
    }

    #[test]
    fn label_angle_agrees_with_tangency_angle(s in prop::array::uniform3(0.01..0.99f64)) {
        let lab = PackingLabel::hyperbolic_s(s.to_vec());
        let r = [lab.radius(0), lab.radius(1), lab.radius(2)];
        let a = discon_core::packing::tangency_angle(r[0], r[1], r[2], lab.geometry);
        prop_assert!((lab.angle(0, 1, 2) - a).abs() < 1e-12);
    }
}
