use std::sync::Arc;

use approx::assert_relative_eq;

use super::*;
use crate::geometry::ConvexDomain;
use crate::measures::MeasureSpec;

fn line(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0).unwrap(), n).unwrap())
}

fn cone(mesh: &Arc<Mesh>) -> ConvexFn {
    ConvexFn::from_fn(mesh.clone(), |x| x[0].abs() - 1.0).unwrap()
}

fn parabola(mesh: &Arc<Mesh>) -> ConvexFn {
    ConvexFn::from_fn(mesh.clone(), |x| 0.5 * (x[0] * x[0] - 1.0)).unwrap()
}

#[test]
fn aleksandrov_cone_at_center() {
    let mesh = line(21);
    let r = check_aleksandrov(&cone(&mesh), 10).unwrap();
    assert_relative_eq!(r.lhs, 1.0);
    assert_relative_eq!(r.rhs, 2.0);
    assert!(r.pass);
}

#[test]
fn boundary_node_is_rejected() {
    let mesh = line(21);
    assert!(matches!(check_aleksandrov(&cone(&mesh), 0), Err(MaError::Parameter(_))));
}

#[test]
fn cauchy_schwarz_equal_functions_is_equality() {
    let mesh = line(41);
    let u = parabola(&mesh);
    let r = check_cauchy_schwarz(&[u.clone(), u]).unwrap();
    assert!(r.slack.abs() < 1e-12);
}

#[test]
fn ibp_cone_parabola_is_exact() {
    let mesh = line(41);
    let r = check_ibp(&[cone(&mesh), parabola(&mesh)]).unwrap();
    assert!(r.pass);
    assert!((r.lhs - r.rhs).abs() < 1e-12);
}

#[test]
fn blocki_i_exact_pair() {
    let mesh = line(21);
    let c = cone(&mesh);
    let r = check_blocki_i(&c.scaled(2.0), &c, &[c.clone()]).unwrap();
    // ∫(w−v) dμ_cone = 2 and ∫|cone|(dμ_{2cone} − dμ_cone) = 2.
    assert_relative_eq!(r.lhs, 2.0, epsilon = 1e-12);
    assert_relative_eq!(r.rhs, 2.0, epsilon = 1e-12);
    assert!(r.pass);
}

#[test]
fn blocki_rejects_unordered_pair() {
    let mesh = line(21);
    let c = cone(&mesh);
    assert!(matches!(
        check_blocki_i(&c, &c.scaled(2.0), &[c.clone()]),
        Err(MaError::Precondition(_))
    ));
}

#[test]
fn aj_requires_measure_order() {
    let mesh = line(21);
    let c = cone(&mesh);
    assert!(check_aj(&c, &c.scaled(2.0), 10, 0.5).is_err());
    let zero = ConvexFn::zero(mesh.clone());
    for alpha in [0.0, 0.5, 1.0] {
        assert!(check_aj(&c, &zero, 10, alpha).unwrap().pass);
    }
}

#[test]
fn comparison_scaled_pair() {
    let mesh = line(41);
    let u = parabola(&mesh);
    let nu = crate::measures::from_convex(&u, 0.5).unwrap();
    let r = check_comparison(&u.scaled(0.5), &u.scaled(1.5), 0.5, &nu).unwrap();
    assert!(r.pass);
    assert!(check_comparison(&u.scaled(1.5), &u.scaled(0.5), 0.5, &nu).is_err());
}

#[test]
fn domination_cone_and_chord() {
    let mesh = line(21);
    let c = cone(&mesh);
    let r = check_domination(&c, &c).unwrap().unwrap();
    assert!(r.pass);
    let below = check_domination(&c.scaled(2.0), &c).unwrap();
    assert!(below.is_none());
}

#[test]
fn envelope_homogeneity() {
    let mesh = line(101);
    let c = cone(&mesh);
    let r = check_envelope_derivative(&c, &c, &ENVELOPE_STEPS).unwrap();
    assert_relative_eq!(r.lhs, 4.0, epsilon = 1e-8);
    assert_relative_eq!(r.rhs, 4.0, epsilon = 1e-12);
}

#[test]
fn envelope_negative_side_with_steeper_cone() {
    let mesh = line(101);
    let c = cone(&mesh);
    let r = check_envelope_derivative(&c, &c.scaled(2.0), &ENVELOPE_STEPS).unwrap();
    assert!(r.pass);
}

#[test]
fn mixed_inequality_rejects_unmet_hypothesis() {
    let mesh = line(21);
    let nu = crate::measures::realize(&MeasureSpec::Lebesgue, &mesh).unwrap();
    let f = vec![100.0; mesh.len()];
    assert!(matches!(
        check_mixed_inequality(&[parabola(&mesh)], &[f], &nu),
        Err(MaError::Precondition(_))
    ));
}

#[test]
fn equality_cases_hold() {
    for r in equality_cases().unwrap() {
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn hardy_collar_tends_to_one_half() {
    let dom = ConvexDomain::interval(-1.0, 1.0).unwrap();
    let density = collar_density(&MeasureSpec::hardy(2.0), &dom).unwrap();
    let probes = |m: u64| vec![hardy_probe(&dom, 1.0 / m as f64)];
    let r = check_vanishing_mass(&dom, &density, &probes, &[64]).unwrap();
    // The collar is close to m^{−2ε}/2 for ε = 1/m.
    assert!(!r.report.pass);
    assert!((0.4..0.6).contains(&r.collars[0].1), "{:?}", r.collars);
}

#[test]
fn lebesgue_collar_vanishes() {
    let dom = ConvexDomain::interval(-1.0, 1.0).unwrap();
    let density = collar_density(&MeasureSpec::Lebesgue, &dom).unwrap();
    let r = check_vanishing_mass(&dom, &density, &|m| standard_probes(&dom, m), &vanishing_schedule()).unwrap();
    assert!(r.report.pass);
    assert!(r.collars.windows(2).all(|w| w[1].1 <= w[0].1));
}

#[test]
fn suite_names_round_trip() {
    for s in Suite::ALL {
        assert_eq!(s.name().parse::<Suite>().unwrap(), s);
    }
    assert!("nope".parse::<Suite>().is_err());
}

#[test]
fn random_suite_is_deterministic() {
    let a = random_suite(CheckKind::BlockiI, 6, SEED).unwrap();
    let b = random_suite(CheckKind::BlockiI, 6, SEED).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|r| r.pass));
}
