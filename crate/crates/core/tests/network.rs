mod common;

use std::f64::consts::PI;

use common::*;
use specnet_core::network::ScanConfig;
use specnet_core::*;

#[test]
fn airy_has_three_walls_and_no_collisions() {
    let state = build_network(&airy(6.0), NetworkConfig::default().with_cutoff(6.0)).unwrap();
    assert_eq!(state.walls.len(), 3);
    assert!(state.collisions.is_empty());
    assert!(state.obstructions.is_empty());
    assert_eq!(state.open_trees.len(), 3);
}

#[test]
fn saddle_is_a_closed_tree_of_mass_pi() {
    let state = build_network(
        &two_point(6.0),
        NetworkConfig::default().with_theta(0.25).with_cutoff(6.0),
    )
    .unwrap();
    let closed = &state.obstructions.closed_trees;
    assert_eq!(closed.len(), 1);
    assert!((closed[0].mass - PI).abs() < 1e-4, "mass {}", closed[0].mass);
    assert!(state.obstructions.suggested_theta_step > 0.0);

    let clear = build_network(
        &two_point(6.0),
        NetworkConfig::default().with_theta(0.28).with_cutoff(6.0),
    )
    .unwrap();
    assert!(clear.obstructions.is_empty());
}

#[test]
fn scan_finds_an_unobstructed_phase() {
    let cfg = NetworkConfig::default().with_cutoff(6.0);
    let (theta, probes) = find_unobstructed_theta(&two_point(6.0), 0.25, 0.05, cfg, ScanConfig::default()).unwrap();
    assert!(probes[0].obstructed);
    assert!((theta - 0.25).abs() > 1e-3);
    let state = build_network(&two_point(6.0), cfg.with_theta(theta)).unwrap();
    assert!(state.obstructions.is_empty());
}

#[test]
fn closed_tree_counts() {
    let cfg = NetworkConfig::default();
    assert_eq!(count_closed_trees(&two_point(6.0), 0.25, 4.0, cfg).unwrap(), 1);
    assert_eq!(count_closed_trees(&two_point(6.0), 0.25, 1.0, cfg).unwrap(), 0);
}

#[test]
fn zero_cutoff_gives_the_initial_graph() {
    let cfg = NetworkConfig::default().with_theta(0.07).with_cutoff(0.0);
    let built = build_network(&cubic(6.0), cfg).unwrap();
    let initial = initial_graph(&cubic(6.0), cfg).unwrap();
    assert_eq!(built.walls.len(), initial.walls.len());
    assert!(built.scattered_walls().next().is_none());
}

#[test]
fn raising_the_cutoff_extends_the_network() {
    let data = cubic(6.0);
    let cfg = NetworkConfig::default().with_theta(0.07);
    let low = build_network(&data, cfg.with_cutoff(9.0)).unwrap();
    let high = build_network(&data, cfg.with_cutoff(10.0)).unwrap();
    assert!(low.walls.len() <= high.walls.len());
    for (a, b) in low.walls.iter().zip(&high.walls) {
        assert_eq!(a.sheets, b.sheets);
        assert_eq!(a.source, b.source);
        // the low wall is a prefix of the high one
        for (p, q) in a.points.iter().zip(&b.points).take(a.len().saturating_sub(2)) {
            assert!((p - q).norm() < 1e-12);
        }
    }
    assert!(low.collisions.iter().filter(|c| c.scattered).all(|c| c.mass < 9.0));
}

#[test]
fn cubic_scattering_matches_independent_quadrature() {
    let theta = 0.07;
    let state = build_network(
        &cubic(6.0),
        NetworkConfig::default().with_theta(theta).with_cutoff(10.0),
    )
    .unwrap();
    let scattered: Vec<_> = state.collisions.iter().filter(|c| c.scattered).collect();
    assert!(!scattered.is_empty());
    for col in scattered {
        let mut sum = 0.0;
        for p in &col.participants {
            let w = &state.walls[p.wall];
            let WallSource::TurningPointRay { turning_point, .. } = w.source else {
                panic!("first collisions involve initial walls only");
            };
            let origin = state.turning_points[turning_point].position;
            let m = independent_mass(&cubic_symbol, theta, origin, w, p.segment, col.point);
            assert!((m - p.mass).abs() <= 1e-6 * m, "participant {m} vs {}", p.mass);
            sum += m;
        }
        assert!((col.mass - sum).abs() <= 1e-6 * sum);
        for &child in &col.children {
            let w = &state.walls[child];
            assert!((w.start_mass() - sum).abs() <= 1e-6 * sum);
            let (i, j) = w.sheets;
            let roots = {
                let mut r = dk_roots(&cubic_symbol(w.points[0]));
                r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                r
            };
            assert!((roots[i] - w.sheet_values[0].0).norm() < 1e-8);
            assert!((roots[j] - w.sheet_values[0].1).norm() < 1e-8);
            assert!(composite_residual(&cubic_symbol, theta, w) < 1e-6);
        }
    }
}

#[test]
fn child_mass_is_additive() {
    let state = build_network(&cubic(6.0), NetworkConfig::default().with_theta(0.07).with_cutoff(10.0)).unwrap();
    for w in state.scattered_walls() {
        let tree = &state.trees[w.id];
        let parents: f64 = tree
            .parents
            .iter()
            .map(|&p| {
                let WallSource::ScatteredAt { collision } = w.source else {
                    unreachable!()
                };
                state.collisions[collision]
                    .participants
                    .iter()
                    .find(|q| q.tree == p)
                    .unwrap()
                    .mass
            })
            .sum();
        assert!((w.start_mass() - parents).abs() <= 1e-9 * parents);
        assert!(w.mass_profile.windows(2).all(|m| m[1] >= m[0]));
    }
}

#[test]
fn quadratic_networks_match_the_closed_form_tracer() {
    let r = 6.0;
    let cutoff = 4.0;
    type Disc = fn(C64) -> C64;
    let cases: [(specnet_core::SpectralData, Disc, Vec<C64>); 3] = [
        (airy(r), |z| z * 4.0, vec![c(0.0, 0.0)]),
        (two_point(r), |z| (z * z - 1.0) * 4.0, vec![c(-1.0, 0.0), c(1.0, 0.0)]),
        (shifted(r), |z| z * z + 4.0, vec![c(0.0, -2.0), c(0.0, 2.0)]),
    ];
    for (data, disc, tps) in cases {
        for theta in [0.1, 0.4, 0.65] {
            let state = build_network(&data, NetworkConfig::default().with_theta(theta).with_cutoff(cutoff)).unwrap();
            assert!(state.collisions.is_empty());
            let oracle = closed_form_walls(&disc, &tps, theta, cutoff, r);
            let ours: Vec<Vec<C64>> = state.walls.iter().map(|w| w.points.clone()).collect();
            // the network starts at the seed radius
            let d = hausdorff_in_disk(&ours, &oracle, 0.99 * r, &tps, 2.0 * state.config.trace.seed_radius);
            assert!(d < 1e-4, "theta {theta}: distance {d}");
        }
    }
}

#[test]
fn builds_are_deterministic() {
    let cfg = NetworkConfig::default().with_theta(0.07).with_cutoff(10.0);
    let a = build_network(&cubic(6.0), cfg).unwrap();
    let b = build_network(&cubic(6.0), cfg).unwrap();
    assert_eq!(a.walls, b.walls);
    assert_eq!(a.collisions, b.collisions);
}
