//! Rayleigh quotients, the inverse iterative scheme and its truncation ladder,
//! subeigenvalue certificates, and minimization of the power quotient.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::CheckReport;
use crate::convex_core::{convex_envelope, energy, ma_measure, same_mesh, ConvexFn, DiscreteMeasure};
use crate::dirichlet::{solve_dirichlet, DirichletProblem};
use crate::error::{MaError, Result};
use crate::geometry::{ConvexDomain, Mesh, MeshKind};
use crate::measures::{lp_power, realize, realize_truncated, weighted_mass, MeasureSpec};

/// Probe quotients below this value fail the Poincaré precondition.
pub const POINCARE_FLOOR: f64 = 1e-8;
/// Relative slack of the ledger monotonicity checks.
pub const LEDGER_SLACK: f64 = 1e-9;
/// Relative slack of the ladder monotonicity check.
pub const LADDER_SLACK: f64 = 1e-8;

/// One step of an iterative scheme. Quantities that do not apply are NaN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub step: usize,
    pub energy: f64,
    pub norm: f64,
    pub rayleigh: f64,
    pub residual: f64,
    pub sup_change: f64,
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub lambda: f64,
    /// Normalized to sup norm 1.
    pub eigenfunction: ConvexFn,
    pub ladder: Vec<(u64, f64)>,
    /// Slack of the certificate at `λ(1 − 1e-6)`.
    pub certificate_slack: f64,
    pub iterations: usize,
    /// `max |μ_u − λ|u|ⁿν| / μ_u(Ω)` at the final iterate.
    pub residual: f64,
}

/// `E(u) / ∫|u|^{n+1} dν`.
pub fn rayleigh(u: &ConvexFn, nu: &DiscreteMeasure) -> Result<f64> {
    same_mesh(u.mesh(), nu.mesh())?;
    let n = u.mesh().dim() as f64;
    let e = energy(u)?;
    let d = lp_power(u, nu, n + 1.0);
    if !(d > 0.0 && d.is_finite()) {
        return Err(MaError::Degenerate(format!("∫|u|^(n+1) dν = {d}")));
    }
    Ok(e / d)
}

/// `ν` with every cell mass moved to its interior nodes.
pub fn lumped_measure(nu: &DiscreteMeasure) -> DiscreteMeasure {
    let mesh = nu.mesh().clone();
    let cells = vec![0.0; nu.cells().len()];
    DiscreteMeasure::new(mesh, nu.lumped_interior(), cells).expect("lumping keeps masses valid")
}

/// `g − 1` for the gauge `g` of the domain about its center.
fn cone(mesh: &Arc<Mesh>) -> Result<ConvexFn> {
    let g = gauge_values(mesh, &mesh.domain().center());
    ConvexFn::new(mesh.clone(), g.iter().map(|v| v - 1.0).collect())
}

fn gauge_values(mesh: &Mesh, c: &[f64]) -> Vec<f64> {
    let dom = mesh.domain();
    (0..mesh.len())
        .map(|i| {
            if mesh.is_boundary(i) {
                return 1.0;
            }
            match (mesh.kind(), dom) {
                (MeshKind::Radial { .. }, ConvexDomain::Ball { radius, .. }) => mesh.node(i)[0] / radius,
                _ => dom.gauge(c, mesh.node(i)).min(1.0),
            }
        })
        .collect()
}

/// Point at fraction `t` of the way from the center to the boundary along the
/// first axis.
fn offset_center(dom: &ConvexDomain, t: f64) -> Vec<f64> {
    let c = dom.center();
    let mut e = c.clone();
    e[0] += 1.0;
    let exit = 1.0 / dom.gauge(&c, &e);
    let mut p = c;
    p[0] += t * exit;
    p
}

/// The fixed probe family of the Poincaré precondition: two cones, two
/// parabola-like profiles, two asymmetric wedges and two envelope-smoothed
/// bumps. Radial meshes use radial analogues.
pub fn poincare_probes(mesh: &Arc<Mesh>) -> Result<Vec<ConvexFn>> {
    let dom = mesh.domain();
    let c = dom.center();
    let g = gauge_values(mesh, &c);
    let pow = |k: f64, s: f64| -> Result<ConvexFn> {
        ConvexFn::new(mesh.clone(), g.iter().map(|v| s * (v.powf(k) - 1.0)).collect())
    };
    let mut out = vec![pow(1.0, 1.0)?, pow(1.0, 2.0)?, pow(2.0, 1.0)?, pow(4.0, 1.0)?];
    let radial = matches!(mesh.kind(), MeshKind::Radial { .. });
    if radial {
        out.push(pow(1.25, 1.0)?);
        out.push(pow(1.5, 1.0)?);
    } else {
        for t in [0.5, -0.5] {
            let w = gauge_values(mesh, &offset_center(dom, t));
            out.push(ConvexFn::new(mesh.clone(), w.iter().map(|v| v - 1.0).collect())?);
        }
    }
    for t in [0.3f64, -0.6] {
        let bc: Vec<f64> = if radial { vec![t.abs()] } else { offset_center(dom, t) };
        let width = 0.1 * dom.diameter().powi(2);
        let f: Vec<f64> = (0..mesh.len())
            .map(|i| {
                let x = mesh.node(i);
                let d2: f64 = x.iter().zip(&bc).map(|(a, b)| (a - b).powi(2)).sum();
                -(1.0 - g[i]) * (1.0 + 2.0 * (-d2 / width).exp())
            })
            .collect();
        out.push(convex_envelope(mesh, &f)?);
    }
    Ok(out)
}

/// Smallest Rayleigh quotient over the probe family (probes with vanishing
/// denominator are skipped).
pub fn poincare_probe(nu: &DiscreteMeasure) -> Result<f64> {
    let mut best = f64::INFINITY;
    let mut any = false;
    for p in poincare_probes(nu.mesh())? {
        match rayleigh(&p, nu) {
            Ok(r) => {
                any = true;
                best = best.min(r);
            }
            Err(MaError::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if !any {
        return Err(MaError::Precondition("measure gives zero mass to every probe".into()));
    }
    Ok(best)
}

/// `max |μ_u − λ|u|ⁿν| / μ_u(Ω)` over interior nodes, with `ν` lumped.
pub fn eigen_residual(u: &ConvexFn, lumped: &DiscreteMeasure, lambda: f64) -> Result<f64> {
    let mu = ma_measure(u)?;
    let n = u.mesh().dim() as i32;
    let total = mu.total();
    if total <= 0.0 {
        return Err(MaError::Degenerate("u has zero Monge–Ampère mass".into()));
    }
    let mut worst: f64 = 0.0;
    for i in u.mesh().interior_nodes() {
        let rhs = lambda * u.value(i).abs().powi(n) * lumped.atoms()[i];
        worst = worst.max((mu.atoms()[i] - rhs).abs());
    }
    Ok(worst / total)
}

fn solve_with(rhs: DiscreteMeasure) -> Result<ConvexFn> {
    let tol = 1e-12 * rhs.total().max(f64::MIN_POSITIVE);
    Ok(solve_dirichlet(&DirichletProblem::new(rhs), tol)?.solution)
}

fn ledger_row(step: usize, u: &ConvexFn, nu: &DiscreteMeasure, r: f64, prev: Option<&ConvexFn>) -> Result<LedgerRow> {
    let n = u.mesh().dim() as f64;
    Ok(LedgerRow {
        step,
        energy: energy(u)?,
        norm: lp_power(u, nu, n + 1.0).powf(1.0 / (n + 1.0)),
        rayleigh: r,
        residual: eigen_residual(u, nu, r)?,
        sup_change: prev.map_or(f64::NAN, |p| {
            u.values().iter().zip(p.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        }),
    })
}

fn check_ledger(prev: &LedgerRow, next: &LedgerRow) -> Result<()> {
    let s = LEDGER_SLACK;
    if next.energy < prev.energy * (1.0 - s) {
        return Err(MaError::Consistency(format!(
            "energy decreased at step {}: {} -> {}",
            next.step, prev.energy, next.energy
        )));
    }
    if next.norm < prev.norm * (1.0 - s) {
        return Err(MaError::Consistency(format!(
            "L^(n+1) norm decreased at step {}: {} -> {}",
            next.step, prev.norm, next.norm
        )));
    }
    if next.rayleigh > prev.rayleigh * (1.0 + s) {
        return Err(MaError::Consistency(format!(
            "Rayleigh quotient increased at step {}: {} -> {}",
            next.step, prev.rayleigh, next.rayleigh
        )));
    }
    Ok(())
}

/// Runs `μ_{u_{k+1}} = R_ν(u_k)|u_k|ⁿν` from `u0` until the Rayleigh quotient
/// moves by less than `tol`. Cell masses of `ν` are lumped to nodes, so every
/// integral of the scheme is a nodal sum.
pub fn inverse_iterate(u0: &ConvexFn, nu: &DiscreteMeasure, tol: f64, max_k: usize) -> Result<(EigenResult, Vec<LedgerRow>)> {
    same_mesh(u0.mesh(), nu.mesh())?;
    if !(tol > 0.0) {
        return Err(MaError::Parameter("tolerance must be positive".into()));
    }
    if !u0.has_zero_boundary() || u0.sup_norm() == 0.0 {
        return Err(MaError::Precondition("initial function must be nonzero with zero boundary values".into()));
    }
    let nu = lumped_measure(nu);
    let probe = poincare_probe(&nu)?;
    if !(probe >= POINCARE_FLOOR) {
        return Err(MaError::Precondition(format!(
            "Poincaré probe gives {probe:e} < {POINCARE_FLOOR:e}"
        )));
    }
    let n = u0.mesh().dim() as i32;
    let mut u = u0.clone();
    let mut r = rayleigh(&u, &nu)?;
    let mut ledger = vec![ledger_row(0, &u, &nu, r, None)?];
    let mut converged = false;
    for k in 1..=max_k {
        let rhs = nu.weighted(u.values(), |v| r * v.abs().powi(n));
        let next = solve_with(rhs)?;
        let r_next = rayleigh(&next, &nu)?;
        let row = ledger_row(k, &next, &nu, r_next, Some(&u))?;
        check_ledger(ledger.last().unwrap(), &row)?;
        ledger.push(row);
        let step = (r_next - r).abs();
        u = next;
        r = r_next;
        if step < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        let residual = ledger.last().map_or(f64::NAN, |row| row.residual);
        return Err(MaError::IterationLimit {
            iterations: max_k,
            residual,
            ledger,
        });
    }
    let eigenfunction = u.scaled(1.0 / u.sup_norm());
    let cert = subeigen_certificate(r * (1.0 - 1e-6), &eigenfunction, &nu)?;
    let result = EigenResult {
        lambda: r,
        residual: ledger.last().unwrap().residual,
        iterations: ledger.len() - 1,
        eigenfunction,
        ladder: Vec::new(),
        certificate_slack: cert.slack,
    };
    Ok((result, ledger))
}

/// One level of an eigenvalue ladder.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Rung {
    pub m: u64,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub ledger: Vec<LedgerRow>,
}

#[derive(Clone, Debug)]
pub struct Ladder {
    pub rungs: Vec<Rung>,
    /// Iterated Aitken extrapolation of the ladder.
    pub limit: f64,
    /// Single Aitken step on the last three rungs.
    pub limit_single: f64,
    /// Eigenfunction of the last rung.
    pub eigenfunction: Option<ConvexFn>,
    pub warnings: Vec<String>,
}

impl Ladder {
    pub fn pairs(&self) -> Vec<(u64, f64)> {
        self.rungs.iter().map(|r| (r.m, r.lambda)).collect()
    }
}

/// Aitken's Δ² on the last three terms; the last term when the differences
/// are numerically constant.
pub fn aitken(xs: &[f64]) -> f64 {
    let n = xs.len();
    match n {
        0 => f64::NAN,
        1 | 2 => xs[n - 1],
        _ => aitken3(xs[n - 3], xs[n - 2], xs[n - 1]),
    }
}

fn aitken3(x0: f64, x1: f64, x2: f64) -> f64 {
    let (d1, d2) = (x1 - x0, x2 - x1);
    let den = d2 - d1;
    let scale = x0.abs().max(x1.abs()).max(x2.abs()).max(f64::MIN_POSITIVE);
    if den.abs() <= 1e-14 * scale || d2.abs() <= 1e-14 * scale {
        return x2;
    }
    let v = x2 - d2 * d2 / den;
    if v.is_finite() {
        v
    } else {
        x2
    }
}

/// Repeated Aitken transforms of the whole sequence until fewer than three
/// terms remain; returns the last term of the final sequence.
pub fn aitken_iterated(xs: &[f64]) -> f64 {
    let mut cur = xs.to_vec();
    while cur.len() >= 3 {
        cur = cur.windows(3).map(|w| aitken3(w[0], w[1], w[2])).collect();
    }
    cur.last().copied().unwrap_or(f64::NAN)
}

/// Eigenvalues `λ_m` of the truncated measures `χ_{dist > 1/m} ν` along the
/// schedule, with extrapolated limit. Levels run in parallel.
pub fn eigen_ladder(mesh: &Arc<Mesh>, spec: &MeasureSpec, schedule: &[u64], tol: f64, max_k: usize) -> Result<Ladder> {
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MaError::Parameter("schedule must be nonempty and strictly increasing from m >= 1".into()));
    }
    let u0 = cone(mesh)?;
    let runs: Vec<(u64, Result<(EigenResult, Vec<LedgerRow>)>)> = schedule
        .par_iter()
        .map(|&m| {
            let run = realize_truncated(spec, mesh, m).and_then(|nu| {
                if nu.total() <= 0.0 {
                    return Err(MaError::Precondition(format!("truncated measure at m = {m} is zero")));
                }
                inverse_iterate(&u0, &nu, tol, max_k)
            });
            (m, run)
        })
        .collect();
    let mut rungs = Vec::new();
    let mut warnings = Vec::new();
    let mut eigenfunction = None;
    for (m, run) in runs {
        match run {
            Ok((res, ledger)) => {
                rungs.push(Rung {
                    m,
                    lambda: res.lambda,
                    iterations: res.iterations,
                    residual: res.residual,
                    ledger,
                });
                eigenfunction = Some(res.eigenfunction);
            }
            Err(MaError::Precondition(msg)) => warnings.push(format!("level m = {m} skipped: {msg}")),
            Err(e) => return Err(e),
        }
    }
    for w in rungs.windows(2) {
        if w[1].lambda > w[0].lambda * (1.0 + LADDER_SLACK) {
            return Err(MaError::Consistency(format!(
                "λ_m increased from {} (m = {}) to {} (m = {})",
                w[0].lambda, w[0].m, w[1].lambda, w[1].m
            )));
        }
    }
    let lambdas: Vec<f64> = rungs.iter().map(|r| r.lambda).collect();
    Ok(Ladder {
        limit: aitken_iterated(&lambdas),
        limit_single: aitken(&lambdas),
        rungs,
        eigenfunction,
        warnings,
    })
}

/// Checks `μ_v ≥ Λ|v|ⁿν` nodewise with `ν` lumped. The report's `lhs` is the
/// largest violation and `rhs` is zero.
pub fn subeigen_certificate(big_lambda: f64, v: &ConvexFn, nu: &DiscreteMeasure) -> Result<CheckReport> {
    same_mesh(v.mesh(), nu.mesh())?;
    if !v.has_zero_boundary() || v.sup_norm() == 0.0 {
        return Err(MaError::Precondition("certificate needs a nonzero function with zero boundary values".into()));
    }
    let nu = lumped_measure(nu);
    let n = v.mesh().dim() as i32;
    let mu = ma_measure(v)?;
    let mut total = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for i in v.mesh().interior_nodes() {
        let t = big_lambda * v.value(i).abs().powi(n) * nu.atoms()[i];
        total += t.abs();
        worst = worst.max(t - mu.atoms()[i]);
    }
    Ok(
        CheckReport::new(format!("subeigen_certificate(Λ={big_lambda})"), worst, 0.0, 1e-9 * total)
            .with_digest(&[v.values(), nu.atoms(), &[big_lambda]]),
    )
}

/// Result of the power-quotient minimization.
#[derive(Clone, Debug)]
pub struct PowerMinimum {
    /// Scaled so that `μ_u ≈ F(u)|u|^p ν`.
    pub minimizer: ConvexFn,
    pub value: f64,
    /// `max |μ_u − F|u|^p ν| / μ_u(Ω)`.
    pub residual: f64,
    /// Quotient values along the iteration.
    pub history: Vec<f64>,
    pub converged: bool,
    /// Set for `p > n`, where the scheme has no convergence guarantee.
    pub experimental: bool,
}

/// `E(u) / (∫|u|^{p+1} dν)^{(n+1)/(p+1)}`.
pub fn power_quotient(u: &ConvexFn, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    let n = u.mesh().dim() as f64;
    let d = lp_power(u, nu, p + 1.0);
    if !(d > 0.0 && d.is_finite()) {
        return Err(MaError::Degenerate(format!("∫|u|^(p+1) dν = {d}")));
    }
    Ok(energy(u)? / d.powf((n + 1.0) / (p + 1.0)))
}

/// Minimizes the power quotient by the normalized fixed point
/// `u ← solve(|u|^p ν) / sup`, returning the best iterate.
pub fn power_minimize(mesh: &Arc<Mesh>, spec: &MeasureSpec, p: f64, tol: f64, max_iter: usize) -> Result<PowerMinimum> {
    let n = mesh.dim() as f64;
    if !((p > -1.0 && p < 0.0) || p > n) {
        return Err(MaError::Parameter(format!("p must lie in (-1, 0) or (n, ∞), got {p}")));
    }
    if !(tol > 0.0) {
        return Err(MaError::Parameter("tolerance must be positive".into()));
    }
    let full = realize(spec, mesh)?;
    let beta = (p + 1.0) / (n + 1.0);
    let wm = weighted_mass(&full, beta)?;
    if !wm.is_finite() {
        return Err(MaError::Precondition(format!("∫ dist^{beta} dν = {wm}")));
    }
    let nu = lumped_measure(&full);
    let mut u = cone(mesh)?;
    let mut best = (power_quotient(&u, &nu, p)?, u.clone());
    let mut history = vec![best.0];
    let mut converged = false;
    for _ in 0..max_iter {
        let rhs = nu.weighted(u.values(), |v| if v == 0.0 { 0.0 } else { v.abs().powf(p) });
        let w = solve_with(rhs)?;
        let w = w.scaled(1.0 / w.sup_norm());
        let change = w.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let f = power_quotient(&w, &nu, p)?;
        history.push(f);
        if f <= best.0 {
            best = (f, w.clone());
        }
        u = w;
        if change < tol {
            converged = true;
            break;
        }
    }
    let (value, u) = best;
    // μ_{tu} = t^{n-p} κ |tu|^p ν when μ_u = κ|u|^p ν
    let kappa = energy(&u)? / lp_power(&u, &nu, p + 1.0);
    let t = (value / kappa).powf(1.0 / (n - p));
    let minimizer = u.scaled(t);
    let mu = ma_measure(&minimizer)?;
    let mut worst: f64 = 0.0;
    for i in mesh.interior_nodes() {
        let v = minimizer.value(i).abs();
        let rhs = if v == 0.0 { 0.0 } else { value * v.powf(p) * nu.atoms()[i] };
        worst = worst.max((mu.atoms()[i] - rhs).abs());
    }
    Ok(PowerMinimum {
        residual: worst / mu.total(),
        minimizer,
        value,
        history,
        converged,
        experimental: p > n,
    })
}

/// Compares `R_ν(u)` with the quotients of random convex perturbations
/// `Γ(u + t·bump)`, `t = ±10⁻², ±10⁻¹` times `‖u‖∞`. `lhs` is `R_ν(u)` and `rhs`
/// the smallest perturbed quotient.
pub fn minimality_probe(u: &ConvexFn, nu: &DiscreteMeasure, trials: usize, seed: u64) -> Result<CheckReport> {
    let nu = lumped_measure(nu);
    let r0 = rayleigh(u, &nu)?;
    let mesh = u.mesh();
    let dom = mesh.domain();
    let (lo, hi) = dom.bounding_box();
    let scale = u.sup_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    let radial = matches!(mesh.kind(), MeshKind::Radial { .. });
    let mut done = 0;
    while done < trials {
        let c: Vec<f64> = if radial {
            let ConvexDomain::Ball { radius, .. } = dom else { unreachable!() };
            vec![rng.random_range(0.0..*radius)]
        } else {
            lo.iter().zip(&hi).map(|(a, b)| rng.random_range(*a..*b)).collect()
        };
        if !radial && !dom.contains(&c) {
            continue;
        }
        let width = rng.random_range(0.05..0.5) * dom.diameter();
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let t = sign * if rng.random_bool(0.5) { 1e-2 } else { 1e-1 } * scale;
        let f: Vec<f64> = (0..mesh.len())
            .map(|i| {
                if mesh.is_boundary(i) {
                    return 0.0;
                }
                let d2: f64 = mesh.node(i).iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
                let b = (1.0 - d2 / (width * width)).max(0.0).powi(2);
                u.value(i) + t * b
            })
            .collect();
        let w = convex_envelope(mesh, &f)?;
        done += 1;
        if w.sup_norm() == 0.0 || !w.has_zero_boundary() {
            continue;
        }
        match rayleigh(&w, &nu) {
            Ok(r) => best = best.min(r),
            Err(MaError::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(CheckReport::new("minimality_probe", r0, best, 1e-6).with_digest(&[u.values(), nu.atoms()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0).unwrap(), n).unwrap())
    }

    #[test]
    fn cosine_quotient() {
        let m = line(2001);
        let u = ConvexFn::from_fn(m.clone(), |x| -(PI * x[0] / 2.0).cos()).unwrap();
        let nu = realize(&MeasureSpec::Lebesgue, &m).unwrap();
        let r = rayleigh(&u, &nu).unwrap();
        assert!((r - PI * PI / 4.0).abs() < 1e-3, "{r}");
        assert_eq!(rayleigh(&u.scaled(2.0), &nu).unwrap().to_bits(), r.to_bits());
    }

    #[test]
    fn aitken_geometric() {
        let xs: Vec<f64> = (0..6).map(|k| 1.0 + 0.5f64.powi(k)).collect();
        assert!((aitken(&xs) - 1.0).abs() < 1e-12);
        assert!((aitken_iterated(&xs) - 1.0).abs() < 1e-12);
        assert_eq!(aitken(&[2.0, 2.0, 2.0]), 2.0);
    }

    #[test]
    fn lebesgue_eigen() {
        let m = line(801);
        let nu = realize(&MeasureSpec::Lebesgue, &m).unwrap();
        let (res, ledger) = inverse_iterate(&cone(&m).unwrap(), &nu, 1e-12, 200).unwrap();
        assert!((res.lambda - PI * PI / 4.0).abs() < 1e-3, "{}", res.lambda);
        assert!(ledger.len() > 2);
        assert!(res.certificate_slack > -1e-9);
    }

    #[test]
    fn zero_measure_fails_probe() {
        let m = line(11);
        let nu = DiscreteMeasure::zero(m.clone());
        assert!(matches!(
            inverse_iterate(&cone(&m).unwrap(), &nu, 1e-8, 10),
            Err(MaError::Precondition(_))
        ));
    }

    #[test]
    fn probes_are_eight_convex_functions() {
        for m in [
            line(41),
            Arc::new(Mesh::grid(&ConvexDomain::unit_ball(2), 9).unwrap()),
            Arc::new(Mesh::radial(&ConvexDomain::unit_ball(2), 21).unwrap()),
        ] {
            let ps = poincare_probes(&m).unwrap();
            assert_eq!(ps.len(), 8);
            assert!(ps.iter().all(|p| p.has_zero_boundary() && p.sup_norm() > 0.0));
        }
    }
}
