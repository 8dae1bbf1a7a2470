use discon_core::mesh::io::{read_mesh_json, write_mesh_json};
use discon_core::mesh::{equilateral_torus, generations, hex_patch};
use discon_core::{
    build_triangulation, combinatorial_distance, generation_of, hex_fill, CombinatorialDisk, Domain, MeshError, Point,
};
use proptest::prelude::*;

fn carrier_area(fill: &discon_core::HexFill) -> f64 {
    let t = &fill.triangulation;
    (0..t.triangles().len()).map(|k| 0.5 * fill.realization.signed_area2(t, k).abs()).sum()
}

#[test]
fn rejects_bad_triples() {
    assert!(matches!(build_triangulation(&[]), Err(MeshError::Empty)));
    assert!(matches!(build_triangulation(&[[0, 0, 1]]), Err(MeshError::DegenerateTriple(0))));
    let fan = [[0, 1, 2], [0, 1, 3], [0, 1, 4]];
    assert!(matches!(build_triangulation(&fan), Err(MeshError::NonManifoldEdge(0, 1, 3))));
}

#[test]
fn distance_between_components_fails() {
    let t = build_triangulation(&[[0, 1, 2], [3, 4, 5]]).unwrap();
    assert!(!t.is_connected());
    assert!(matches!(combinatorial_distance(&t, 0, 4), Err(MeshError::Disconnected(0, 4))));
}

#[test]
fn torus_has_no_boundary() {
    let t = equilateral_torus(5, 6).unwrap().triangulation;
    assert!(t.is_closed());
    assert_eq!(t.euler_characteristic(), 0);
    assert_eq!(t.boundary_components(), 0);
}

#[test]
fn hex_patch_generations_match_hex_norm() {
    for m in 1..6 {
        let p = hex_patch(m);
        let t = &p.triangulation;
        assert_eq!(t.vertex_count(), 3 * m * (m + 1) + 1);
        assert_eq!(generation_of(t, p.anchor_vertex), m);
        for v in 0..t.vertex_count() {
            let (i, j) = p.lattice[v];
            let hex = i.abs().max(j.abs()).max((i + j).abs()) as usize;
            assert_eq!(generation_of(t, v), m - hex);
        }
    }
}

#[test]
fn combinatorial_disks_in_a_patch() {
    let p = hex_patch(4);
    let t = &p.triangulation;
    for k in 0..=4 {
        let d = CombinatorialDisk::new(t, p.anchor_vertex, k).expect("closed disk");
        assert_eq!(d.vertex_set.len(), 3 * k * (k + 1) + 1);
    }
    assert!(CombinatorialDisk::new(t, p.anchor_vertex, 5).is_none());
}

#[test]
fn carriers_exhaust_the_disk() {
    let omega = Domain::unit_disk();
    let areas: Vec<f64> = [4, 8, 16, 32, 64]
        .iter()
        .map(|&n| carrier_area(&hex_fill(&omega, n, Point::zeros()).unwrap()))
        .collect();
    assert!(areas.windows(2).all(|w| w[1] > w[0]), "{areas:?}");
    let gap = std::f64::consts::PI - areas[4];
    assert!(gap > 0.0 && gap < 8.0 * std::f64::consts::PI / 64.0, "gap {gap}");
}

#[test]
fn finer_carriers_contain_coarser_anchor_cells() {
    let omega = Domain::square(1.0);
    let coarse = hex_fill(&omega, 8, Point::zeros()).unwrap();
    let fine = hex_fill(&omega, 16, Point::zeros()).unwrap();
    let fine_pos = &fine.realization.positions;
    for p in &coarse.realization.positions {
        assert!(fine_pos.iter().any(|q| (q - p).norm() < 1e-12), "{p:?} missing");
    }
}

fn disk_params() -> impl Strategy<Value = (f64, f64, f64, usize, f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64, 0.6..2.0f64, 2usize..16, 0.0..0.5f64, 0.0..std::f64::consts::TAU)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hex_fill_is_a_valid_disk((cx, cy, r, n, rho, phi) in disk_params()) {
        let c = Point::new(cx, cy);
        let omega = Domain::Disk { center: c, radius: r };
        let anchor = c + Point::new(phi.cos(), phi.sin()) * (rho * r);
        let Ok(fill) = hex_fill(&omega, n, anchor) else { return Ok(()) };
        let t = &fill.triangulation;
        prop_assert!(t.is_disk());
        prop_assert_eq!(t.euler_characteristic(), 1);
        fill.realization.validate(t).unwrap();
        let s = 2.0 / n as f64;
        for &[a, b] in t.edges() {
            let d = (fill.realization.positions[a] - fill.realization.positions[b]).norm();
            prop_assert!((d - s).abs() <= 1e-12 * s.max(1.0));
        }
        for p in &fill.realization.positions {
            prop_assert!(omega.contains_closed_disk(p, fill.radius));
        }
    }

    #[test]
    fn generations_are_one_lipschitz((cx, cy, r, n, _rho, _phi) in disk_params()) {
        let c = Point::new(cx, cy);
        let Ok(fill) = hex_fill(&Domain::Disk { center: c, radius: r }, n, c) else { return Ok(()) };
        let t = &fill.triangulation;
        let g = generations(t);
        for v in 0..t.vertex_count() {
            prop_assert_eq!(g[v] == 0, t.is_boundary(v));
        }
        for &[a, b] in t.edges() {
            prop_assert!(g[a].abs_diff(g[b]) <= 1);
        }
    }

    #[test]
    fn mesh_json_round_trips((cx, cy, r, n, _rho, _phi) in disk_params()) {
        let c = Point::new(cx, cy);
        let Ok(fill) = hex_fill(&Domain::Disk { center: c, radius: r }, n, c) else { return Ok(()) };
        let t = &fill.triangulation;
        let radii = vec![fill.radius; t.vertex_count()];
        let text = write_mesh_json(t, &fill.realization, Some(&radii), None);
        let back = read_mesh_json(&text).unwrap();
        prop_assert_eq!(back.triangulation.triangles(), t.triangles());
        prop_assert_eq!(&back.realization.positions, &fill.realization.positions);
        prop_assert_eq!(back.radii.as_deref(), Some(&radii[..]));
        prop_assert_eq!(write_mesh_json(&back.triangulation, &back.realization, back.radii.as_deref(), None), text);
    }
}
