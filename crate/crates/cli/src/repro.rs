//! The acceptance suite: eleven criteria, each reduced to a pass/fail line.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use ma_core::checks::{
    check_vanishing_mass, collar_density, equality_cases, hardy_probe, random_suite, run_suite, CheckKind, Suite, SEED,
};
use ma_core::dirichlet::{default_schedule, solve_dirichlet, solve_dirichlet_singular, DirichletProblem};
use ma_core::eigen::{eigen_ladder, inverse_iterate, rayleigh, LedgerRow, LEDGER_SLACK};
use ma_core::measures::{
    from_convex, realize, weighted_mass, weighted_mass_refined, MeasureSpec, Profile, Weight,
};
use ma_core::oracles::noncompact_sequence;
use ma_core::{mixed_ma_measure, ConvexDomain, ConvexFn, Mesh, Result};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    /// Headline number of the criterion.
    pub value: f64,
    pub detail: String,
    pub seconds: f64,
}

type Outcome = Result<(bool, f64, String)>;

const ALL: [(u32, &str, fn() -> Outcome); 11] = [
    (1, "hardy eigenvalue ladder", hardy_ladder),
    (2, "hardy family certificates", hardy_certificates),
    (3, "lebesgue eigenpair", lebesgue_eigenpair),
    (4, "mixed measure on the annulus", mixed_annulus),
    (5, "radial rayleigh bound", radial_rayleigh_bound),
    (6, "dirichlet 2d accuracy", dirichlet_2d),
    (7, "inequality suites", inequality_suites),
    (8, "envelope derivative", envelope_derivative),
    (9, "vanishing-mass dichotomy", vanishing_dichotomy),
    (10, "weighted-mass gate", weighted_mass_gate),
    (11, "noncompactness regression", noncompactness),
];

/// Runs the criteria whose ids are in `only` (all when empty).
pub fn run(only: &[u32]) -> Vec<Criterion> {
    ALL.iter()
        .filter(|(id, _, _)| only.is_empty() || only.contains(id))
        .map(|(id, name, f)| {
            let t = Instant::now();
            let (pass, value, detail) = match f() {
                Ok(v) => v,
                Err(e) => (false, f64::NAN, format!("error: {e}")),
            };
            Criterion {
                id: *id,
                name: (*name).into(),
                pass,
                value,
                detail,
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

pub fn line(nodes: usize) -> Result<Arc<Mesh>> {
    Ok(Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0)?, nodes)?))
}

fn hardy_ladder() -> Outcome {
    let mesh = line(801)?;
    let ladder = eigen_ladder(&mesh, &MeasureSpec::hardy(2.0), &default_schedule(), 1e-10, 1000)?;
    let pairs = ladder.pairs();
    let decreasing = pairs.windows(2).all(|w| w[1].1 < w[0].1);
    let pass = decreasing && (0.95..=1.05).contains(&ladder.limit);
    let shown: Vec<String> = pairs.iter().map(|(m, l)| format!("{m}:{l:.4}")).collect();
    Ok((
        pass,
        ladder.limit,
        format!("limit {:.4}, strictly decreasing {decreasing}, ladder {}", ladder.limit, shown.join(" ")),
    ))
}

fn hardy_certificates() -> Outcome {
    let rows = run_suite(Suite::EigenCert, 0, SEED)?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    Ok((
        failed.is_empty(),
        rows.len() as f64,
        format!("{} of {} certificate rows as expected {failed:?}", rows.len() - failed.len(), rows.len()),
    ))
}

/// Largest relative violation of the monotonicity of energy, norm and
/// Rayleigh quotient along a ledger.
pub fn ledger_violation(ledger: &[LedgerRow]) -> f64 {
    ledger
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            ((a.energy - b.energy) / a.energy)
                .max((a.norm - b.norm) / a.norm)
                .max((b.rayleigh - a.rayleigh) / a.rayleigh)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn lebesgue_eigenpair() -> Outcome {
    let mesh = line(801)?;
    let nu = realize(&MeasureSpec::Lebesgue, &mesh)?;
    let cone = ConvexFn::from_fn(mesh.clone(), |x| x[0].abs() - 1.0)?;
    let (res, ledger) = inverse_iterate(&cone, &nu, 1e-12, 2000)?;
    let target = PI * PI / 4.0;
    let err = (0..mesh.len())
        .map(|i| (res.eigenfunction.value(i) + (PI * mesh.node(i)[0] / 2.0).cos()).abs())
        .fold(0.0, f64::max);
    let violation = ledger_violation(&ledger);
    let pass = (res.lambda - target).abs() < 1e-3 && err < 1e-3 && violation < LEDGER_SLACK;
    Ok((
        pass,
        res.lambda,
        format!(
            "lambda {:.6} vs {target:.6}, eigenfunction error {err:.2e}, {} steps, worst ledger violation {violation:.2e}",
            res.lambda, res.iterations
        ),
    ))
}

fn mixed_annulus() -> Outcome {
    let mesh = Arc::new(Mesh::grid(&ConvexDomain::unit_ball(2), 65)?);
    let r = |x: &[f64]| x[0].hypot(x[1]);
    let u = ConvexFn::from_fn(mesh.clone(), |x| 0.5 * r(x) * r(x))?;
    let v = ConvexFn::from_fn(mesh.clone(), |x| r(x))?;
    let mixed = mixed_ma_measure(&[u, v])?.measure;
    let mass: f64 = (0..mesh.len())
        .filter(|&i| r(mesh.node(i)) >= 0.5)
        .map(|i| mixed.atoms()[i])
        .sum();
    let rel = (mass - PI / 2.0).abs() / (PI / 2.0);
    Ok((rel < 0.03, mass, format!("annulus mass {mass:.5} vs π/2, relative error {rel:.2e}")))
}

/// `R_ν(u_ε)` for `ν = μ_v/|v|ⁿ`, `v = −(1−r²)^{α_n}`, `u_ε = −ε^{1/(n+1)}(1−r²)^{α_n+ε}`.
pub fn radial_quotients(n: usize, eps: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let dom = ConvexDomain::unit_ball(n);
    let mesh = Arc::new(Mesh::radial_graded(&dom, 400, 1600, 1e-14)?);
    let an = n as f64 / (n as f64 + 1.0);
    let rho = |x: &[f64]| {
        let r = x[0];
        (1.0 - r) * (1.0 + r)
    };
    let v = ConvexFn::from_fn(mesh.clone(), |x| -rho(x).powf(an))?;
    let nu = from_convex(&v, n as f64)?;
    let mut out = Vec::new();
    for &e in eps {
        let u = ConvexFn::from_fn(mesh.clone(), |x| -e.powf(1.0 / (n as f64 + 1.0)) * rho(x).powf(an + e))?;
        let bound = ((an + e) / an).powi(n as i32);
        out.push((e, rayleigh(&u, &nu)?, bound));
    }
    Ok(out)
}

fn radial_rayleigh_bound() -> Outcome {
    let eps = [0.2, 0.1, 0.05, 0.02];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut last = f64::NAN;
    for n in [1, 2] {
        let rows = radial_quotients(n, &eps)?;
        let below = rows.iter().all(|(_, r, b)| *r <= b + 1e-3);
        let monotone = rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-3);
        let above_one = rows.iter().all(|(_, r, _)| *r >= 1.0 - 1e-3);
        pass &= below && monotone && above_one;
        last = rows.last().map_or(f64::NAN, |r| r.1);
        let shown: Vec<String> = rows.iter().map(|(e, r, b)| format!("ε={e}: {r:.4}≤{b:.4}")).collect();
        parts.push(format!("n={n} [{}]", shown.join(", ")));
    }
    Ok((pass, last, parts.join("; ")))
}

/// Max nodal error of the 2D solve of `det D²u = 1` on the unit disk.
pub fn disk_error(n: usize) -> Result<f64> {
    let mesh = Arc::new(Mesh::grid(&ConvexDomain::unit_ball(2), n)?);
    let nu = realize(&MeasureSpec::Lebesgue, &mesh)?;
    let sol = solve_dirichlet(&DirichletProblem::new(nu), 1e-12)?.solution;
    Ok((0..mesh.len())
        .map(|i| {
            let x = mesh.node(i);
            (sol.value(i) - 0.5 * (x[0] * x[0] + x[1] * x[1] - 1.0)).abs()
        })
        .fold(0.0, f64::max))
}

fn dirichlet_2d() -> Outcome {
    let (e33, e65) = (disk_error(33)?, disk_error(65)?);
    let ratio = e65 / e33;
    let accurate = e33 < 5e-3;
    let halves = (0.35..=0.65).contains(&ratio);
    Ok((
        accurate && halves,
        e33,
        format!("error 33: {e33:.2e} (< 5e-3: {accurate}), 65: {e65:.2e}, ratio {ratio:.3} (halving: {halves})"),
    ))
}

fn inequality_suites() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut total = 0usize;
    for kind in CheckKind::ALL {
        let rows = random_suite(kind, 200, SEED)?;
        let ok = rows.iter().filter(|r| r.pass).count();
        pass &= ok == rows.len();
        total += rows.len();
        parts.push(format!("{} {ok}/{}", kind.name(), rows.len()));
    }
    let eq = equality_cases()?;
    let eq_ok = eq.iter().filter(|r| r.pass).count();
    pass &= eq_ok == eq.len();
    parts.push(format!("equality cases {eq_ok}/{}", eq.len()));
    Ok((pass, total as f64, parts.join(", ")))
}

fn envelope_derivative() -> Outcome {
    let rows = run_suite(Suite::Envelope, 0, SEED)?;
    let worst = rows
        .iter()
        .map(|r| (r.lhs - r.rhs).abs() / r.rhs.abs())
        .fold(0.0, f64::max);
    let ok = rows.iter().filter(|r| r.pass).count();
    Ok((
        ok == rows.len() && rows.len() == 20,
        worst,
        format!("{ok}/{} pairs, worst relative error {worst:.2e}", rows.len()),
    ))
}

fn vanishing_dichotomy() -> Outcome {
    let rows = run_suite(Suite::Vanishing, 0, SEED)?;
    let dom = ConvexDomain::interval(-1.0, 1.0)?;
    let density = collar_density(&MeasureSpec::hardy(2.0), &dom)?;
    let probes = |m: u64| vec![hardy_probe(&dom, 1.0 / m as f64)];
    let collar = check_vanishing_mass(&dom, &density, &probes, &[64])?.collars[0].1;
    let rows_ok = rows.iter().all(|r| r.pass);
    let shown: Vec<String> = rows.iter().map(|r| format!("{} {:.3e}", r.name, r.lhs)).collect();
    Ok((
        rows_ok && (0.4..=0.6).contains(&collar),
        collar,
        format!("hardy collar at m=64 {collar:.4}; {}", shown.join(", ")),
    ))
}

fn weighted_mass_gate() -> Outcome {
    let dom = ConvexDomain::interval(-1.0, 1.0)?;
    let mesh = line(801)?;
    let schedule = default_schedule();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [1.2, 1.5, 2.0] {
        let spec = MeasureSpec::hardy(s);
        let wm = weighted_mass(&realize(&spec, &mesh)?, 1.0)?;
        let refined = weighted_mass_refined(&spec, &dom, 2000, 1.0, Weight::Dist)?;
        let finite_expected = s < 2.0;
        let gate = wm.is_finite() == finite_expected && refined.result.is_finite() == finite_expected;
        let mut line = format!("s={s}: {wm} (refined {})", refined.result);
        if finite_expected {
            let rep = solve_dirichlet_singular(&mesh, &spec, None, &schedule, 1e-12)?;
            pass &= rep.cauchy;
            line.push_str(&format!(", cauchy {}", rep.cauchy));
        }
        pass &= gate;
        parts.push(line);
    }
    Ok((pass, f64::NAN, parts.join("; ")))
}

/// Refined `∫(1−x²) dν_m` against `8m/(2m+1)`, and the sup distance of the
/// discrete solution `u_m` from the solution of the weak limit problem
/// (which is zero).
pub fn noncompact_rows(ms: &[u32]) -> Result<Vec<(u32, f64, f64, f64)>> {
    let dom = ConvexDomain::interval(-1.0, 1.0)?;
    let mesh = line(2001)?;
    let mut out = Vec::new();
    for &m in ms {
        let case = noncompact_sequence(m)?;
        let spec = MeasureSpec::Density(Profile::new(case.density.name().to_string(), {
            let d = case.density.clone();
            move |x| d.eval(x)
        }));
        let refined = weighted_mass_refined(&spec, &dom, 8000, 1.0, Weight::Defining)?;
        let mass = refined.result.value().unwrap_or(f64::INFINITY);
        let exact = 8.0 * m as f64 / (2.0 * m as f64 + 1.0);
        let sol = solve_dirichlet(&DirichletProblem::new(realize(&spec, &mesh)?), 1e-13)?.solution;
        out.push((m, mass, exact, sol.sup_norm()));
    }
    Ok(out)
}

fn noncompactness() -> Outcome {
    let ms: Vec<u32> = (1..=16).collect();
    let rows = noncompact_rows(&ms)?;
    let worst = rows.iter().map(|(_, a, b, _)| (a - b).abs()).fold(0.0, f64::max);
    let to_limit = rows.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    let mut successive = f64::INFINITY;
    for m in 2..=16 {
        successive = successive.min(noncompact_successive(m)?);
    }
    Ok((
        worst < 1e-10 && successive > 0.5,
        worst,
        format!(
            "worst mass error {worst:.2e}, min successive sup distance {successive:.4}, \
             min sup distance to the limit solution {to_limit:.4}"
        ),
    ))
}

/// Sup distance between the discrete solutions for `m` and `m − 1`.
pub fn noncompact_successive(m: u32) -> Result<f64> {
    let mesh = line(2001)?;
    let solve = |m: u32| -> Result<Vec<f64>> {
        let case = noncompact_sequence(m)?;
        let d = case.density.clone();
        let spec = MeasureSpec::Density(Profile::new(case.density.name().to_string(), move |x| d.eval(x)));
        Ok(solve_dirichlet(&DirichletProblem::new(realize(&spec, &mesh)?), 1e-13)?
            .solution
            .values()
            .to_vec())
    };
    let (a, b) = (solve(m - 1)?, solve(m)?);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
