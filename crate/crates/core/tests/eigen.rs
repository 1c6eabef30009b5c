use std::sync::Arc;

use ma_core::eigen::{eigen_ladder, inverse_iterate, poincare_probes, rayleigh, subeigen_certificate, LedgerRow};
use ma_core::measures::{realize, MeasureSpec};
use ma_core::{ConvexDomain, ConvexFn, Mesh};

fn line(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0).unwrap(), n).unwrap())
}

fn monotone(ledger: &[LedgerRow]) -> bool {
    ledger.windows(2).all(|w| {
        let (a, b) = (&w[0], &w[1]);
        b.energy >= a.energy * (1.0 - 1e-9) && b.norm >= a.norm * (1.0 - 1e-9) && b.rayleigh <= a.rayleigh * (1.0 + 1e-9)
    })
}

#[test]
fn lebesgue_eigenpair_is_sandwiched_by_certificates() {
    let mesh = line(201);
    let nu = realize(&MeasureSpec::Lebesgue, &mesh).unwrap();
    let cone = ConvexFn::from_fn(mesh.clone(), |x| x[0].abs() - 1.0).unwrap();
    let (res, ledger) = inverse_iterate(&cone, &nu, 1e-12, 2000).unwrap();
    assert!(monotone(&ledger));
    let lam = res.lambda;
    assert!(subeigen_certificate(lam - 1e-6, &res.eigenfunction, &nu).unwrap().pass);
    assert!(!subeigen_certificate(lam * (1.0 + 1e-3), &res.eigenfunction, &nu).unwrap().pass);
    for v in poincare_probes(&mesh).unwrap() {
        assert!(rayleigh(&v, &nu).unwrap() >= lam - 1e-6);
    }
}

#[test]
fn hardy_ladder_is_nonincreasing() {
    let mesh = line(401);
    let ladder = eigen_ladder(&mesh, &MeasureSpec::hardy(2.0), &[2, 4, 8, 16], 1e-10, 2000).unwrap();
    let lams: Vec<f64> = ladder.rungs.iter().map(|r| r.lambda).collect();
    assert_eq!(lams.len(), 4);
    assert!(lams.windows(2).all(|w| w[1] <= w[0]));
    for r in &ladder.rungs {
        assert!(monotone(&r.ledger));
    }
}
