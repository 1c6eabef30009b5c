use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use ma_core::dirichlet::{solve_dirichlet, DirichletProblem};
use ma_core::eigen::rayleigh;
use ma_core::measures::{realize, weighted_mass_refined, MeasureSpec, Profile, Weight};
use ma_core::oracles::{hardy_family, lebesgue_1d_eigen, noncompact_sequence, oracle, radial_alpha, sample};
use ma_core::{ma_measure, ConvexDomain, MaError, Mesh};

fn line(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0).unwrap(), n).unwrap())
}

#[test]
fn hardy_family_eigenvalues() {
    assert_relative_eq!(hardy_family(0.0).unwrap().lambda.unwrap(), 1.0);
    let quarter = hardy_family(0.25).unwrap();
    assert_relative_eq!(quarter.lambda.unwrap(), 0.75);
    assert!(quarter.max_residual(1000) < 1e-8);
}

#[test]
fn radial_alpha_center_determinant() {
    let case = radial_alpha(2, 2.0 / 3.0).unwrap();
    assert_relative_eq!(case.lhs.eval(&[0.0, 0.0]), 16.0 / 9.0, max_relative = 1e-12);
    assert_relative_eq!(case.rhs.eval(&[0.0, 0.0]), 16.0 / 9.0, max_relative = 1e-12);
}

#[test]
fn every_registry_case_satisfies_its_equation() {
    let names: [(&str, &[(&str, f64)]); 7] = [
        ("radial_alpha", &[("n", 2.0), ("alpha", 0.75)]),
        ("hardy_family", &[("alpha", 0.4)]),
        ("mixed_parabola_cone", &[("k", 1.0)]),
        ("flat_boundary_witness", &[("n", 2.0), ("a", 0.25)]),
        ("lebesgue_1d_eigen", &[]),
        ("noncompact_sequence", &[("m", 3.0)]),
        ("radial_alpha", &[("n", 1.0), ("alpha", 0.5)]),
    ];
    for (name, params) in names {
        let case = oracle(name, params).unwrap();
        assert!(case.max_residual(1000) < 1e-8, "{name}");
    }
    assert!(matches!(oracle("nope", &[]), Err(MaError::Lookup(_))));
}

#[test]
fn sampled_lebesgue_eigenpair_has_exact_quotient() {
    let case = lebesgue_1d_eigen();
    let (u, nu) = sample(&case, &line(401), None).unwrap();
    assert!((rayleigh(&u, &nu).unwrap() - PI * PI / 4.0).abs() < 1e-4);
}

#[test]
fn hardy_family_breaks_symmetry() {
    let case = hardy_family(0.4).unwrap();
    let v = &case.functions[0];
    assert!((v.eval(&[0.5]) - v.eval(&[-0.5])).abs() > 1e-3);
}

#[test]
fn singular_density_needs_truncation() {
    let case = hardy_family(0.25).unwrap();
    assert!(sample(&case, &line(101), None).is_err());
    assert!(sample(&case, &line(101), Some(16)).is_ok());
}

#[test]
fn noncompact_weighted_masses() {
    let dom = ConvexDomain::interval(-1.0, 1.0).unwrap();
    for m in [1u32, 4, 16] {
        let case = noncompact_sequence(m).unwrap();
        let d = case.density.clone();
        let spec = MeasureSpec::Density(Profile::new("nu_m", move |x| d.eval(x)));
        let mass = weighted_mass_refined(&spec, &dom, 8000, 1.0, Weight::Defining).unwrap();
        let exact = 8.0 * m as f64 / (2.0 * m as f64 + 1.0);
        assert!((mass.result.value().unwrap() - exact).abs() < 1e-10);
        assert!(exact <= 4.0);
    }
}

#[test]
fn lebesgue_solution_is_the_parabola_at_the_nodes() {
    let mesh = line(81);
    let sol = solve_dirichlet(&DirichletProblem::new(realize(&MeasureSpec::Lebesgue, &mesh).unwrap()), 1e-13)
        .unwrap()
        .solution;
    for i in 0..mesh.len() {
        let x = mesh.node(i)[0];
        assert!((sol.value(i) - (x * x - 1.0) / 2.0).abs() < 1e-12);
    }
}

#[test]
fn sampled_convex_function_reproduces_the_density() {
    let case = noncompact_sequence(2).unwrap();
    let err = |n: usize| {
        let (u, nu) = sample(&case, &line(n), None).unwrap();
        (ma_measure(&u).unwrap().total() - nu.total()).abs() / nu.total()
    };
    let (coarse, fine) = (err(201), err(401));
    assert!(coarse < 2e-2);
    assert!(fine < coarse / 1.8);
}
