use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_aj, check_aleksandrov, check_blocki_i, check_blocki_ii, check_cauchy_schwarz, check_comparison,
    check_domination, check_energy_estimate, check_envelope_derivative, check_ibp, check_mixed_inequality,
    check_vanishing_mass, collar_density, hardy_probe, standard_probes, CheckReport,
};
use crate::convex_core::{convex_envelope, ma_measure, ConvexFn};
use crate::eigen::{lumped_measure, subeigen_certificate};
use crate::error::{MaError, Result};
use crate::geometry::{ConvexDomain, Mesh};
use crate::measures::{from_convex, realize, MeasureSpec, Profile};
use crate::oracles::{hardy_family, sample};

/// Seed of the randomized suites.
pub const SEED: u64 = 0xA1E5;

/// Steps of the envelope-derivative check.
pub const ENVELOPE_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckKind {
    Aleksandrov,
    EnergyEstimate,
    Aj,
    BlockiI,
    BlockiII,
    CauchySchwarz,
    Ibp,
    MixedInequality,
    Comparison,
    Domination,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::Aleksandrov,
        CheckKind::EnergyEstimate,
        CheckKind::Aj,
        CheckKind::BlockiI,
        CheckKind::BlockiII,
        CheckKind::CauchySchwarz,
        CheckKind::Ibp,
        CheckKind::MixedInequality,
        CheckKind::Comparison,
        CheckKind::Domination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Aleksandrov => "aleksandrov",
            CheckKind::EnergyEstimate => "energy_estimate",
            CheckKind::Aj => "aj",
            CheckKind::BlockiI => "blocki_i",
            CheckKind::BlockiII => "blocki_ii",
            CheckKind::CauchySchwarz => "cauchy_schwarz",
            CheckKind::Ibp => "ibp",
            CheckKind::MixedInequality => "mixed_inequality",
            CheckKind::Comparison => "comparison",
            CheckKind::Domination => "domination",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    Maxprin,
    Blocki,
    Energy,
    Envelope,
    EigenCert,
    Vanishing,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Maxprin, Suite::Blocki, Suite::Energy, Suite::Envelope, Suite::EigenCert, Suite::Vanishing];

    /// Randomized checks cycled through by the suite; empty for fixed suites.
    pub fn kinds(self) -> &'static [CheckKind] {
        match self {
            Suite::Maxprin => &[CheckKind::Aleksandrov, CheckKind::Aj, CheckKind::Comparison, CheckKind::Domination],
            Suite::Blocki => &[CheckKind::BlockiI, CheckKind::BlockiII],
            Suite::Energy => &[
                CheckKind::EnergyEstimate,
                CheckKind::CauchySchwarz,
                CheckKind::Ibp,
                CheckKind::MixedInequality,
            ],
            _ => &[],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Maxprin => "maxprin",
            Suite::Blocki => "blocki",
            Suite::Energy => "energy",
            Suite::Envelope => "envelope",
            Suite::EigenCert => "eigen-cert",
            Suite::Vanishing => "vanishing",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = MaError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| MaError::Lookup(format!("unknown suite {s:?}")))
    }
}

fn trial_rng(seed: u64, k: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_line(rng: &mut ChaCha8Rng) -> Result<Arc<Mesh>> {
    let dom = ConvexDomain::interval(-1.0, 1.0)?;
    let n = rng.random_range(12..40);
    let mut xs: Vec<f64> = (0..n).map(|_| rng.random_range(-0.98..0.98)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    xs.insert(0, -1.0);
    xs.push(1.0);
    Ok(Arc::new(Mesh::line_from_nodes(&dom, xs)?))
}

fn random_disk(rng: &mut ChaCha8Rng) -> Result<Arc<Mesh>> {
    let n = if rng.random_bool(0.5) { 9 } else { 13 };
    Ok(Arc::new(Mesh::grid(&ConvexDomain::unit_ball(2), n)?))
}

/// Convex, zero on the boundary, negative inside: sorted random slopes in 1D,
/// the envelope of a random cloud over a paraboloid in 2D.
fn random_convex(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng) -> Result<ConvexFn> {
    let n = mesh.len();
    let values = if mesh.dim() == 1 {
        let xs: Vec<f64> = (0..n).map(|i| mesh.node(i)[0]).collect();
        let mut slopes: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-3.0..3.0)).collect();
        slopes.sort_by(f64::total_cmp);
        let mut f = vec![0.0; n];
        for k in 1..n {
            f[k] = f[k - 1] + slopes[k - 1] * (xs[k] - xs[k - 1]);
        }
        let (a, b) = (xs[0], xs[n - 1]);
        let end = f[n - 1];
        let scale = rng.random_range(0.2..2.0);
        let g: Vec<f64> = (0..n).map(|i| f[i] - end * (xs[i] - a) / (b - a)).collect();
        let sup = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut g: Vec<f64> = g.iter().map(|v| scale * v / sup).collect();
        g[0] = 0.0;
        g[n - 1] = 0.0;
        g
    } else {
        let c = rng.random_range(0.1..1.0);
        let f: Vec<f64> = (0..n)
            .map(|i| {
                if mesh.is_boundary(i) {
                    return 0.0;
                }
                let x = mesh.node(i);
                c * (x[0] * x[0] + x[1] * x[1] - 1.0) - rng.random_range(0.0..0.6)
            })
            .collect();
        return convex_envelope(mesh, &f);
    };
    ConvexFn::new(mesh.clone(), values)
}

/// Smooth zero-boundary convex function on the unit disk:
/// `(|x|²−1)(c + a·x) + k(|x|⁴−1)` with `|a| < c/3`.
fn random_smooth(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng) -> Result<ConvexFn> {
    let c = rng.random_range(0.2..1.5);
    let a = [rng.random_range(-0.23..0.23) * c, rng.random_range(-0.23..0.23) * c];
    let k = rng.random_range(0.0..1.0);
    ConvexFn::from_fn(mesh.clone(), |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        (r2 - 1.0) * (c + a[0] * x[0] + a[1] * x[1]) + k * (r2 * r2 - 1.0)
    })
}

/// `max(v, ℓ)` for an affine `ℓ ≤ 0` on the boundary that cuts into `v`.
fn lift(v: &ConvexFn, rng: &mut ChaCha8Rng) -> Result<ConvexFn> {
    let mesh = v.mesh();
    let dim = mesh.dim();
    let slope: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.3..0.3) * v.sup_norm()).collect();
    let reach = slope.iter().map(|s| s * s).sum::<f64>().sqrt();
    let depth = rng.random_range(0.1..0.9) * v.sup_norm();
    let c = -(reach + depth).max(reach);
    let values = (0..mesh.len())
        .map(|i| {
            let x = mesh.embed(i);
            let l = c + slope.iter().zip(&x).map(|(s, y)| s * y).sum::<f64>();
            if mesh.is_boundary(i) {
                v.value(i)
            } else {
                v.value(i).max(l)
            }
        })
        .collect();
    ConvexFn::new(mesh.clone(), values)
}

fn random_interior(mesh: &Mesh, rng: &mut ChaCha8Rng) -> usize {
    let nodes: Vec<usize> = mesh.interior_nodes().collect();
    nodes[rng.random_range(0..nodes.len())]
}

fn instance(kind: CheckKind, k: usize, rng: &mut ChaCha8Rng) -> Result<Option<CheckReport>> {
    let mesh = if k % 2 == 0 { random_line(rng)? } else { random_disk(rng)? };
    let n = mesh.dim();
    let many = |count: usize, rng: &mut ChaCha8Rng| -> Result<Vec<ConvexFn>> {
        (0..count).map(|_| random_convex(&mesh, rng)).collect()
    };
    let report = match kind {
        CheckKind::Aleksandrov => {
            let u = random_convex(&mesh, rng)?;
            check_aleksandrov(&u, random_interior(&mesh, rng))?
        }
        CheckKind::EnergyEstimate => {
            let u = random_convex(&mesh, rng)?;
            check_energy_estimate(&u, random_interior(&mesh, rng))?
        }
        CheckKind::Aj => {
            let ut = random_convex(&mesh, rng)?;
            let w = random_convex(&mesh, rng)?;
            let u = ut.add(&w)?;
            let alpha = [0.0, 0.5, 1.0][rng.random_range(0..3)];
            match check_aj(&u, &ut, random_interior(&mesh, rng), alpha) {
                Err(MaError::Precondition(_)) => return Ok(None),
                r => r?,
            }
        }
        CheckKind::BlockiI => {
            let v = random_convex(&mesh, rng)?;
            let w = lift(&v, rng)?;
            if w.values() == v.values() {
                return Ok(None);
            }
            check_blocki_i(&v, &w, &many(n, rng)?)?
        }
        CheckKind::BlockiII => {
            let v = random_convex(&mesh, rng)?;
            let w = lift(&v, rng)?;
            if w.values() == v.values() {
                return Ok(None);
            }
            check_blocki_ii(&v, &w, &many(n, rng)?, &many(n, rng)?)?
        }
        CheckKind::CauchySchwarz => check_cauchy_schwarz(&many(n + 1, rng)?)?,
        CheckKind::Ibp if n == 1 => check_ibp(&many(n + 1, rng)?)?,
        CheckKind::Ibp => {
            let fine = Arc::new(Mesh::grid(&ConvexDomain::unit_ball(2), 33)?);
            let us = (0..3).map(|_| random_smooth(&fine, rng)).collect::<Result<Vec<_>>>()?;
            check_ibp(&us)?
        }
        CheckKind::MixedInequality => {
            let us = many(n, rng)?;
            let nu = lumped_measure(&realize(&MeasureSpec::Lebesgue, &mesh)?);
            let mut fs = Vec::with_capacity(n);
            for u in &us {
                let mu = ma_measure(u)?;
                let shrink = rng.random_range(0.3..1.0);
                let f = (0..mesh.len())
                    .map(|i| match nu.atoms()[i] {
                        a if a > 0.0 && !mesh.is_boundary(i) => shrink * mu.atoms()[i] / a,
                        _ => 0.0,
                    })
                    .collect();
                fs.push(f);
            }
            check_mixed_inequality(&us, &fs, &nu)?
        }
        CheckKind::Comparison => {
            let u = random_convex(&mesh, rng)?;
            let p = rng.random_range(0.1..0.9) * n as f64;
            let nu = from_convex(&u, p)?;
            let lo = rng.random_range(0.3..0.95);
            let hi = rng.random_range(1.05..2.0);
            check_comparison(&u.scaled(lo), &u.scaled(hi), p, &nu)?
        }
        CheckKind::Domination => {
            let u = lift(&random_convex(&mesh, rng)?, rng)?;
            let v = if rng.random_bool(0.5) {
                let dent: Vec<f64> = (0..mesh.len())
                    .map(|i| match mesh.is_boundary(i) {
                        true => u.value(i),
                        false => u.value(i) - rng.random_range(0.0..0.3) * u.sup_norm(),
                    })
                    .collect();
                convex_envelope(&mesh, &dent)?
            } else {
                lift(&random_convex(&mesh, rng)?.scaled(rng.random_range(0.05..1.0)), rng)?
            };
            match check_domination(&u, &v)? {
                Some(r) => r,
                None => return Ok(None),
            }
        }
    };
    Ok(Some(report))
}

/// `trials` instances of one check. Each instance draws from its own stream
/// of the seed and redraws until the generated data meet the hypotheses.
pub fn random_suite(kind: CheckKind, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k);
            for _ in 0..200 {
                if let Some(mut r) = instance(kind, k, &mut rng)? {
                    r.name = format!("{}#{k}", r.name);
                    return Ok(r);
                }
            }
            Err(MaError::Precondition(format!("no instance of {} met the hypotheses", kind.name())))
        })
        .collect()
}

/// Equality and degenerate cases of the inequality checks, each with slack
/// zero up to round-off.
pub fn equality_cases() -> Result<Vec<CheckReport>> {
    let line = Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0)?, 41)?);
    let disk = Arc::new(Mesh::grid(&ConvexDomain::unit_ball(2), 13)?);
    let mut out = Vec::new();
    for mesh in [&line, &disk] {
        let n = mesh.dim();
        let mut rng = trial_rng(SEED, mesh.len());
        let u = random_convex(mesh, &mut rng)?;
        let x0 = random_interior(mesh, &mut rng);
        let zero = ConvexFn::zero(mesh.clone());
        let tag = |r: CheckReport, s: &str| CheckReport { name: format!("{}[{s},n={n}]", r.name), ..r };
        out.push(tag(check_aleksandrov(&zero, x0)?, "zero"));
        out.push(tag(check_energy_estimate(&zero, x0)?, "zero"));
        out.push(tag(check_aj(&u, &u, x0, 0.5)?, "u=ut"));
        let us = vec![u.clone(); n];
        out.push(tag(check_blocki_i(&u, &u, &us)?, "w=v"));
        out.push(tag(check_blocki_ii(&u, &u, &us, &us)?, "ut=u"));
        out.push(tag(check_cauchy_schwarz(&vec![u.clone(); n + 1])?, "equal"));
        out.push(tag(check_ibp(&vec![u.clone(); n + 1])?, "u0=un"));
        let nu = lumped_measure(&realize(&MeasureSpec::Lebesgue, mesh)?);
        let mu = ma_measure(&u)?;
        let f: Vec<f64> = (0..mesh.len())
            .map(|i| if nu.atoms()[i] > 0.0 { mu.atoms()[i] / nu.atoms()[i] } else { 0.0 })
            .collect();
        out.push(tag(check_mixed_inequality(&us, &vec![f; n], &nu)?, "mu=f nu"));
        if let Some(r) = check_domination(&u, &u)? {
            out.push(tag(r, "u=v"));
        }
    }
    Ok(out
        .into_iter()
        .map(|mut r| {
            let scale = r.lhs.abs().max(r.rhs.abs()).max(1.0);
            r.tol = 1e-9 * scale;
            r.pass = r.slack.abs() <= r.tol;
            r
        })
        .collect())
}

/// The fixed `(u, v)` pairs of the envelope-derivative suite on a 201-node
/// line, starting with the homogeneity case `u = v = cone`.
pub fn envelope_pairs() -> Result<Vec<(ConvexFn, ConvexFn)>> {
    let mesh = Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0)?, 201)?);
    let f = |g: &dyn Fn(f64) -> f64| ConvexFn::from_fn(mesh.clone(), |x| g(x[0]));
    let cone = f(&|x| x.abs() - 1.0)?;
    let parabola = f(&|x| 0.5 * (x * x - 1.0))?;
    let quartic = f(&|x| x.powi(4) - 1.0)?;
    let hat = |c: f64| f(&move |x| if x < c { -(x + 1.0) / (c + 1.0) } else { -(1.0 - x) / (1.0 - c) });
    let mut pairs = vec![
        (cone.clone(), cone.clone()),
        (parabola.clone(), parabola.clone()),
        (parabola.clone(), hat(0.3)?),
        (parabola.clone(), cone.clone()),
        (cone.clone(), cone.scaled(2.0)),
        (cone.clone(), parabola.clone()),
        (quartic.clone(), hat(-0.5)?),
        (quartic.clone(), parabola.clone()),
        (hat(0.4)?, hat(-0.2)?),
        (hat(-0.7)?, quartic.clone()),
        (parabola.scaled(3.0), hat(0.0)?),
        (cone.clone(), hat(0.5)?),
    ];
    let mut rng = trial_rng(SEED, 201);
    while pairs.len() < 20 {
        pairs.push((random_convex(&mesh, &mut rng)?, random_convex(&mesh, &mut rng)?));
    }
    Ok(pairs)
}

fn eigen_cert_rows() -> Result<Vec<CheckReport>> {
    let mesh = Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0)?, 20001)?);
    let mut rows = Vec::new();
    for alpha in [0.0, 0.1, 0.25, 0.4] {
        let case = hardy_family(alpha)?;
        let (v, nu) = sample(&case, &mesh, Some(64))?;
        let lambda = 1.0 - 4.0 * alpha * alpha;
        let mut pass = subeigen_certificate(lambda - 1e-3, &v, &nu)?;
        pass.name = format!("{}[alpha={alpha}]", pass.name);
        let mut reject = subeigen_certificate(lambda + 1e-2, &v, &nu)?;
        reject.name = format!("rejects:{}[alpha={alpha}]", reject.name);
        reject.pass = !reject.pass;
        rows.push(pass);
        rows.push(reject);
    }
    Ok(rows)
}

/// Collar schedule of the vanishing suite.
pub fn vanishing_schedule() -> Vec<u64> {
    (1..=12).map(|k| 1u64 << k).collect()
}

fn vanishing_rows() -> Result<Vec<CheckReport>> {
    let interval = ConvexDomain::interval(-1.0, 1.0)?;
    let schedule = vanishing_schedule();
    let probes = |m: u64| standard_probes(&interval, m);
    let mut rows = Vec::new();
    let lebesgue = collar_density(&MeasureSpec::Lebesgue, &interval)?;
    rows.push(check_vanishing_mass(&interval, &lebesgue, &probes, &schedule)?.report);
    // μ_w for w = −(1−x²)^{3/4}, a finite-energy function.
    let w = Profile::new("mu_w(a=3/4)", |d| {
        let x = 1.0 - d[0];
        1.5 * super::defining_at_distance(&ConvexDomain::Interval { a: -1.0, b: 1.0 }, d[0]).powf(-1.25) * (1.0 - 0.5 * x * x)
    });
    rows.push(check_vanishing_mass(&interval, &w, &probes, &schedule)?.report);
    let hardy = collar_density(&MeasureSpec::hardy(2.0), &interval)?;
    let eps_probe = |m: u64| vec![hardy_probe(&interval, 1.0 / m as f64)];
    let mut r = check_vanishing_mass(&interval, &hardy, &eps_probe, &schedule)?.report;
    r.name = format!("fails:{}", r.name);
    r.pass = !r.pass;
    rows.push(r);
    Ok(rows)
}

/// Runs a suite. Randomized suites produce `trials` rows cycling through
/// their checks; fixed suites ignore `trials`. Rows named `rejects:` or
/// `fails:` pass when the underlying check fails.
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    match suite {
        Suite::Envelope => envelope_pairs()?
            .iter()
            .enumerate()
            .map(|(k, (u, v))| {
                let mut r = check_envelope_derivative(u, v, &ENVELOPE_STEPS)?;
                r.name = format!("{}#{k}", r.name);
                Ok(r)
            })
            .collect(),
        Suite::EigenCert => eigen_cert_rows(),
        Suite::Vanishing => vanishing_rows(),
        _ => {
            let kinds = suite.kinds();
            let mut rows: Vec<Option<CheckReport>> = vec![None; trials];
            for (j, kind) in kinds.iter().enumerate() {
                let idx: Vec<usize> = (0..trials).filter(|k| k % kinds.len() == j).collect();
                let reports = random_suite(*kind, idx.len(), seed ^ j as u64)?;
                for (k, r) in idx.into_iter().zip(reports) {
                    rows[k] = Some(r);
                }
            }
            Ok(rows.into_iter().flatten().collect())
        }
    }
}
