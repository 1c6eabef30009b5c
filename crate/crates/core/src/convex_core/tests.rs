use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;

use super::*;
use crate::geometry::{ConvexDomain, Mesh};

fn line(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0).unwrap(), n).unwrap())
}

fn disk(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::grid(&ConvexDomain::unit_ball(2), n).unwrap())
}

#[test]
fn abs_has_atom_two() {
    let m = line(3);
    let u = ConvexFn::from_fn(m, |x| x[0].abs()).unwrap();
    let mu = ma_measure(&u).unwrap();
    assert_eq!(mu.atoms(), &[0.0, 2.0, 0.0]);
}

#[test]
fn nonconvex_reports_triple() {
    let m = line(3);
    let err = ConvexFn::new(m, vec![0.0, 1.0, 0.0]).unwrap_err();
    assert!(matches!(err, MaError::Convexity { ref nodes, .. } if nodes == &vec![0, 1, 2]));
}

#[test]
fn disk_cone_has_mass_pi() {
    let m = disk(33);
    let u = ConvexFn::from_fn(m, |x| (x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0).unwrap();
    let rep = ma_measure_report(&u).unwrap();
    assert!(!rep.clipped);
    let total = rep.measure.total();
    // the cell of the vertex is the polygon spanned by the boundary nodes' slopes
    assert!((total - PI).abs() < 0.02 * PI, "{total}");
    let e = energy(&u).unwrap();
    assert!(e <= total && (e - PI).abs() < 0.03 * PI, "{e}");
}

#[test]
fn radial_parabola_has_mass_pi() {
    let m = Arc::new(Mesh::radial(&ConvexDomain::unit_ball(2), 201).unwrap());
    let h: f64 = 1.0 / 200.0;
    let u = ConvexFn::from_fn(m.clone(), |r| 0.5 * (r[0] * r[0] - 1.0)).unwrap();
    let mu = ma_measure(&u).unwrap();
    // slopes sit at cell midpoints, so each atom is the area of the dual shell
    assert_relative_eq!(mu.total(), PI * (1.0 - 0.5 * h).powi(2), max_relative = 1e-12);
    for i in 1..m.len() - 1 {
        let r = m.node(i)[0];
        assert_relative_eq!(mu.atoms()[i], 2.0 * PI * r * h, max_relative = 1e-9);
    }
}

#[test]
fn cone_energy_and_scaling() {
    let m = line(101);
    let u = ConvexFn::from_fn(m, |x| x[0].abs() - 1.0).unwrap();
    assert_relative_eq!(energy(&u).unwrap(), 2.0, max_relative = 1e-14);
    assert_relative_eq!(energy(&u.scaled(2.0)).unwrap(), 8.0, max_relative = 1e-14);
}

#[test]
fn energy_needs_zero_boundary() {
    let m = line(5);
    let u = ConvexFn::from_fn(m, |x| x[0] * x[0]).unwrap();
    assert!(matches!(energy(&u), Err(MaError::Contract(_))));
}

#[test]
fn mixed_of_equal_functions_is_ma() {
    let m = disk(17);
    let u = ConvexFn::from_fn(m, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]) - 0.5).unwrap();
    let mixed = mixed_ma_measure(&[u.clone(), u.clone()]).unwrap();
    let mu = ma_measure(&u).unwrap();
    for (a, b) in mixed.measure.atoms().iter().zip(mu.atoms()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn mixed_with_affine_vanishes() {
    let m = disk(17);
    let u = ConvexFn::from_fn(m.clone(), |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
    let v = ConvexFn::from_fn(m, |x| 0.3 * x[0] - 0.2 * x[1] + 1.0).unwrap();
    let mixed = mixed_ma_measure(&[u, v]).unwrap();
    assert!(mixed.measure.total() < 1e-10);
}

#[test]
fn mixed_energy_cone_against_parabola() {
    let m = disk(65);
    let cone = ConvexFn::from_fn(m.clone(), |x| (x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0).unwrap();
    let par = ConvexFn::from_fn(m, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]) - 0.5).unwrap();
    let e = mixed_energy(&cone, &[par.clone(), par]).unwrap();
    assert!((e - PI / 3.0).abs() < 0.02, "{e}");
}

#[test]
fn envelope_of_hat() {
    let m = line(3);
    let env = convex_envelope(&m, &[0.0, 1.0, 0.0]).unwrap();
    assert_eq!(env.values(), &[0.0, 0.0, 0.0]);
}

#[test]
fn envelope_2d_is_idempotent_and_below() {
    let m = disk(17);
    let f: Vec<f64> = (0..m.len())
        .map(|i| {
            let x = m.node(i);
            (3.0 * x[0]).sin() + x[1] * x[1]
        })
        .collect();
    let e1 = convex_envelope(&m, &f).unwrap();
    for (a, b) in e1.values().iter().zip(&f) {
        assert!(a <= &(b + 1e-12));
    }
    let e2 = convex_envelope(&m, e1.values()).unwrap();
    for (i, (a, b)) in e1.values().iter().zip(e2.values()).enumerate() {
        assert!((a - b).abs() < 1e-9, "node {i}: {a} vs {b}, boundary {}", m.is_boundary(i));
    }
    assert!(e1.check_convexity().is_ok());
}

#[test]
fn radial_envelope_keeps_convex_profile() {
    let m = Arc::new(Mesh::radial(&ConvexDomain::unit_ball(2), 41).unwrap());
    let f: Vec<f64> = (0..m.len()).map(|i| m.node(i)[0].powi(2)).collect();
    let e = convex_envelope(&m, &f).unwrap();
    for (a, b) in e.values().iter().zip(&f) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn decompose_bump_1d() {
    let m = line(201);
    let phi: Vec<f64> = (0..m.len()).map(|i| (0.25 - m.node(i)[0].powi(2)).max(0.0)).collect();
    let (p1, p2) = lipschitz_decompose(&m, &phi, 0.3).unwrap();
    for i in 0..m.len() {
        assert!((p1.value(i) - p2.value(i) - phi[i]).abs() < 1e-12);
    }
    assert!(p1.has_zero_boundary() && p2.has_zero_boundary());
}

#[test]
fn decompose_rejects_boundary_support() {
    let m = line(11);
    let phi = vec![1.0; 11];
    assert!(matches!(lipschitz_decompose(&m, &phi, 0.1), Err(MaError::Precondition(_))));
}

#[test]
fn canonical_single_atom() {
    let m = line(5);
    let nu = DiscreteMeasure::from_atoms(m, &[(2, 1.0)]).unwrap();
    let c = canonical_approximation(&nu, 1).unwrap();
    assert_relative_eq!(c.total(), 1.0, max_relative = 1e-12);
    let nonzero = c.cells().iter().filter(|m| **m > 0.0).count();
    assert_eq!(nonzero, 2);
}

#[test]
fn canonical_preserves_lebesgue_on_square() {
    let m = Arc::new(Mesh::grid(&ConvexDomain::unit_square(), 9).unwrap());
    let cells: Vec<f64> = m.cells().iter().map(|c| c.volume).collect();
    let nu = DiscreteMeasure::new(m.clone(), vec![0.0; m.len()], cells).unwrap();
    for lvl in 0..4 {
        let c = canonical_approximation(&nu, lvl).unwrap();
        assert_relative_eq!(c.total(), nu.total(), max_relative = 1e-12);
    }
    assert!(canonical_approximation(&nu, -1).is_err());
}
