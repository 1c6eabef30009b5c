use std::sync::Arc;

use approx::assert_relative_eq;
use ma_core::checks::check_ibp;
use ma_core::dirichlet::{solve_dirichlet, DirichletProblem};
use ma_core::measures::{lp_norm, realize, truncate, weighted_sum, MeasureSpec, Weight};
use ma_core::{
    convex_envelope, energy, ma_measure, mixed_ma_measure, ConvexDomain, ConvexFn, DiscreteMeasure, Mesh,
};
use proptest::prelude::*;

fn line(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0).unwrap(), n).unwrap())
}

fn square(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::grid(&ConvexDomain::unit_square(), n).unwrap())
}

/// Convex envelope of zero boundary data and negative interior values.
fn dented(mesh: &Arc<Mesh>, depths: &[f64]) -> ConvexFn {
    let f: Vec<f64> = (0..mesh.len())
        .map(|i| if mesh.is_boundary(i) { 0.0 } else { -depths[i % depths.len()] })
        .collect();
    convex_envelope(mesh, &f).unwrap()
}

/// Separable quadratic, affine on every grid square.
fn separable(mesh: &Arc<Mesh>, c: &[f64]) -> ConvexFn {
    ConvexFn::from_fn(mesh.clone(), |x| c[0] * x[0] * x[0] + c[1] * x[1] * x[1] - c[2] * x[0] + c[3] * x[1]).unwrap()
}

fn depths() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..2.0, 5..40)
}

fn point2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, 2)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distance_is_one_lipschitz(x in point2(), y in point2()) {
        let domains = [
            ConvexDomain::unit_square(),
            ConvexDomain::unit_ball(2),
            ConvexDomain::polygon(vec![[0.0, 0.0], [2.0, 0.0], [0.5, 1.5]]).unwrap(),
        ];
        for d in domains.iter().filter(|d| d.contains(&x) && d.contains(&y)) {
            let (a, b) = (d.dist_to_boundary(&x).unwrap(), d.dist_to_boundary(&y).unwrap());
            prop_assert!((a - b).abs() <= dist(&x, &y) + 1e-12);
        }
        let iv = ConvexDomain::interval(-1.5, 1.5).unwrap();
        let (a, b) = (iv.dist_to_boundary(&x[..1]).unwrap(), iv.dist_to_boundary(&y[..1]).unwrap());
        prop_assert!((a - b).abs() <= (x[0] - y[0]).abs() + 1e-12);
    }

    #[test]
    fn ma_atoms_are_nonnegative(d in depths(), n in 9usize..40) {
        let u = dented(&line(n), &d);
        prop_assert!(ma_measure(&u).unwrap().atoms().iter().all(|&a| a >= 0.0));
        let v = dented(&square(7), &d);
        prop_assert!(ma_measure(&v).unwrap().atoms().iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn total_mass_superadditive_and_cone_bounded(d1 in depths(), d2 in depths()) {
        for (mesh, n) in [(line(31), 1), (square(7), 2)] {
            let (u, v) = (dented(&mesh, &d1), dented(&mesh, &d2));
            let (mu, mv) = (ma_measure(&u).unwrap().total(), ma_measure(&v).unwrap().total());
            let muv = ma_measure(&u.add(&v).unwrap()).unwrap().total();
            prop_assert!(muv >= (mu + mv) * (1.0 - 1e-9));
            prop_assert!(muv <= 3f64.powi(n) * (mu + mv));
        }
    }

    #[test]
    fn envelope_has_no_mass_off_contact(d in depths()) {
        let mesh = square(9);
        let f: Vec<f64> = (0..mesh.len())
            .map(|i| if mesh.is_boundary(i) { 0.0 } else { -d[i % d.len()] })
            .collect();
        let env = convex_envelope(&mesh, &f).unwrap();
        let mu = ma_measure(&env).unwrap();
        for i in 0..mesh.len() {
            if env.value(i) < f[i] - 1e-9 {
                prop_assert!(mu.atoms()[i] <= 1e-9 * mu.total());
            }
        }
    }

    #[test]
    fn energy_is_homogeneous(d in depths()) {
        for mesh in [line(25), square(7)] {
            let n = mesh.dim() as i32;
            let u = dented(&mesh, &d);
            let e = energy(&u).unwrap();
            for c in [0.5, 2.0, 3.0] {
                let ec = energy(&u.scaled(c)).unwrap();
                prop_assert!((ec - c.powi(n + 1) * e).abs() <= 1e-12 * ec.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn mixed_measure_is_linear_in_each_slot(c in prop::collection::vec(0.1f64..2.0, 12),
                                            a in 0.1f64..3.0, b in 0.1f64..3.0) {
        let mesh = square(9);
        let (u, v1, v2) = (separable(&mesh, &c[0..4]), separable(&mesh, &c[4..8]), separable(&mesh, &c[8..12]));
        let combo = v1.scaled(a).add(&v2.scaled(b)).unwrap();
        let lhs = mixed_ma_measure(&[u.clone(), combo]).unwrap().measure;
        let m1 = mixed_ma_measure(&[u.clone(), v1]).unwrap().measure;
        let m2 = mixed_ma_measure(&[u, v2]).unwrap().measure;
        for i in 0..mesh.len() {
            let rhs = a * m1.atoms()[i] + b * m2.atoms()[i];
            prop_assert!((lhs.atoms()[i] - rhs).abs() <= 1e-9 * lhs.total().max(1.0));
        }
    }

    #[test]
    fn truncation_is_monotone(s in 0.5f64..3.0, m in 1u64..64, extra in 1u64..64) {
        let nu = realize(&MeasureSpec::hardy(s), &line(41)).unwrap();
        let (a, b) = (truncate(&nu, m).unwrap(), truncate(&nu, m + extra).unwrap());
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            prop_assert!(x <= y);
        }
        for (x, y) in a.cells().iter().zip(b.cells()) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn weighted_mass_decreases_in_beta(
        atoms in prop::collection::vec((1usize..40, 0.0f64..2.0), 1..8),
        b1 in 0.0f64..2.0,
        db in 0.0f64..2.0,
    ) {
        let mesh = line(41);
        let lebesgue = realize(&MeasureSpec::Lebesgue, &mesh).unwrap();
        let nu = lebesgue.add(&DiscreteMeasure::from_atoms(mesh.clone(), &atoms).unwrap()).unwrap();
        let (m1, m2) = (weighted_sum(&nu, b1, Weight::Dist), weighted_sum(&nu, b1 + db, Weight::Dist));
        prop_assert!(m2 <= m1 * (1.0 + 1e-12));
    }

    #[test]
    fn lp_norm_is_homogeneous(d in depths(), c in 0.01f64..10.0, p in 1.0f64..4.0) {
        let mesh = line(33);
        let u = dented(&mesh, &d);
        let nu = realize(&MeasureSpec::Lebesgue, &mesh).unwrap();
        let (a, b) = (lp_norm(&u.scaled(c), &nu, p).unwrap(), lp_norm(&u, &nu, p).unwrap());
        assert_relative_eq!(a, c * b, max_relative = 1e-12);
    }

    #[test]
    fn larger_measure_gives_lower_solution(
        base in prop::collection::vec(0.0f64..1.0, 39),
        bump in prop::collection::vec(0.0f64..1.0, 39),
    ) {
        let mesh = line(41);
        let nu1: Vec<(usize, f64)> = base.iter().enumerate().map(|(i, &a)| (i + 1, a)).collect();
        let nu2: Vec<(usize, f64)> = base.iter().zip(&bump).enumerate().map(|(i, (&a, &b))| (i + 1, a + b)).collect();
        let solve = |atoms: &[(usize, f64)]| {
            let nu = DiscreteMeasure::from_atoms(mesh.clone(), atoms).unwrap();
            solve_dirichlet(&DirichletProblem::new(nu), 1e-12).unwrap().solution
        };
        let (u1, u2) = (solve(&nu1), solve(&nu2));
        for i in 0..mesh.len() {
            prop_assert!(u1.value(i) >= u2.value(i) - 1e-9);
        }
    }

    #[test]
    fn ibp_is_exact_in_one_dimension(d1 in depths(), d2 in depths(), n in 9usize..60) {
        let mesh = line(n);
        let report = check_ibp(&[dented(&mesh, &d1), dented(&mesh, &d2)]).unwrap();
        prop_assert!(report.slack.abs() <= 1e-12 * report.lhs.abs().max(1.0));
    }
}
