//! Executable versions of the inequalities and comparison principles of the
//! theory, evaluated on fixed and randomized discrete instances.
//!
//! Checks on line and radial meshes are exact up to round-off and use a
//! relative tolerance of `1e-9`; grid checks carry discretization error and
//! use `1e-4`.

mod suites;
mod vanishing;

pub use suites::{
    envelope_pairs, equality_cases, random_suite, run_suite, vanishing_schedule, CheckKind, Suite, ENVELOPE_STEPS, SEED,
};
pub use vanishing::{
    check_vanishing_mass, collar_density, defining_at_distance, hardy_probe, standard_probes, VanishingReport,
};

use serde::{Deserialize, Serialize};

use crate::convex_core::{convex_envelope, energy, ma_measure, mixed_ma_measure, same_mesh, ConvexFn, DiscreteMeasure};
use crate::dirichlet::aleksandrov_constant;
use crate::eigen::lumped_measure;
use crate::error::{MaError, Result};
use crate::geometry::{Mesh, MeshKind};

/// Relative tolerance of checks on exact backends.
pub const EXACT_TOL: f64 = 1e-9;
/// Relative tolerance of checks on the grid backend.
pub const GRID_TOL: f64 = 1e-4;

/// Outcome of one check. Inequalities read `lhs ≤ rhs` and pass when
/// `slack ≥ −tol`; identities pass when `|slack| ≤ tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
    /// Hash of the instance data, for regression dumps.
    pub digest: String,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        CheckReport {
            name: name.into(),
            lhs,
            rhs,
            slack,
            tol,
            pass: slack >= -tol,
            digest: String::new(),
        }
    }

    pub fn equality(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let mut r = CheckReport::new(name, lhs, rhs, tol);
        r.pass = r.slack.abs() <= tol;
        r
    }

    pub fn with_digest(mut self, data: &[&[f64]]) -> Self {
        self.digest = digest(data);
        self
    }
}

/// FNV-1a over the bit patterns of the given arrays.
pub fn digest(data: &[&[f64]]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for arr in data {
        for x in arr.iter() {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Relative tolerance for checks on this mesh.
pub fn relative_tol(mesh: &Mesh) -> f64 {
    match mesh.kind() {
        MeshKind::Grid { .. } => GRID_TOL,
        _ => EXACT_TOL,
    }
}

fn scaled_tol(mesh: &Mesh, a: f64, b: f64) -> f64 {
    relative_tol(mesh) * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn interior(u: &ConvexFn, x0: usize) -> Result<()> {
    if x0 >= u.mesh().len() || u.mesh().is_boundary(x0) {
        return Err(MaError::Parameter(format!("node {x0} is not an interior node")));
    }
    Ok(())
}

fn zero_boundary(us: &[&ConvexFn]) -> Result<()> {
    if us.iter().any(|u| !u.has_zero_boundary()) {
        return Err(MaError::Precondition("functions must vanish on the boundary".into()));
    }
    Ok(())
}

fn dot(mu: &DiscreteMeasure, f: impl Fn(usize) -> f64) -> f64 {
    mu.integrate_weight(f, |_| f64::NAN)
}

fn sup_diff(a: &ConvexFn, b: &ConvexFn) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn aj_constant(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64 * aleksandrov_constant(n)
}

/// `|u(x₀)|ⁿ ≤ C(n) diam^{n−1} dist(x₀) μ_u(Ω)`.
pub fn check_aleksandrov(u: &ConvexFn, x0: usize) -> Result<CheckReport> {
    interior(u, x0)?;
    zero_boundary(&[u])?;
    let mesh = u.mesh();
    let n = mesh.dim();
    let lhs = u.value(x0).abs().powi(n as i32);
    let c = aleksandrov_constant(n) * mesh.domain().diameter().powi(n as i32 - 1);
    let rhs = c * mesh.node_dist(x0) * ma_measure(u)?.total();
    Ok(CheckReport::new("aleksandrov", lhs, rhs, scaled_tol(mesh, lhs, rhs)).with_digest(&[u.values()]))
}

/// `|u(x₀)|^{n+1} ≤ C(n) diam^{n−1} dist(x₀) E(u)`.
pub fn check_energy_estimate(u: &ConvexFn, x0: usize) -> Result<CheckReport> {
    interior(u, x0)?;
    zero_boundary(&[u])?;
    let mesh = u.mesh();
    let n = mesh.dim();
    let lhs = u.value(x0).abs().powi(n as i32 + 1);
    let c = aleksandrov_constant(n) * mesh.domain().diameter().powi(n as i32 - 1);
    let rhs = c * mesh.node_dist(x0) * energy(u)?;
    Ok(CheckReport::new("energy_estimate", lhs, rhs, scaled_tol(mesh, lhs, rhs)).with_digest(&[u.values()]))
}

/// `|ũ(x₀) − u(x₀)|ⁿ ≤ C(n) diam^{n−1} dist^α(x₀) ∫ dist^{1−α} (dμ_u − dμ_ũ)`
/// for `μ_u ≥ μ_ũ`.
pub fn check_aj(u: &ConvexFn, ut: &ConvexFn, x0: usize, alpha: f64) -> Result<CheckReport> {
    same_mesh(u.mesh(), ut.mesh())?;
    interior(u, x0)?;
    zero_boundary(&[u, ut])?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(MaError::Parameter(format!("α must lie in [0, 1], got {alpha}")));
    }
    let mesh = u.mesh();
    let (mu, mt) = (ma_measure(u)?, ma_measure(ut)?);
    let floor = 1e-12 * mu.total().max(mt.total());
    if let Some(i) = (0..mesh.len()).find(|&i| mu.atoms()[i] < mt.atoms()[i] - floor) {
        return Err(MaError::Precondition(format!("μ_u < μ_ũ at node {i}")));
    }
    let n = mesh.dim();
    let lhs = (ut.value(x0) - u.value(x0)).abs().powi(n as i32);
    let diff = (0..mesh.len())
        .map(|i| mesh.node_dist(i).powf(1.0 - alpha) * (mu.atoms()[i] - mt.atoms()[i]))
        .sum::<f64>();
    let c = aj_constant(n) * mesh.domain().diameter().powi(n as i32 - 1);
    let rhs = c * mesh.node_dist(x0).powf(alpha) * diff;
    Ok(
        CheckReport::new(format!("aj(alpha={alpha})"), lhs, rhs, scaled_tol(mesh, lhs, rhs))
            .with_digest(&[u.values(), ut.values(), &[alpha]]),
    )
}

fn ordered_pair(v: &ConvexFn, w: &ConvexFn) -> Result<()> {
    same_mesh(v.mesh(), w.mesh())?;
    let scale = v.sup_norm().max(w.sup_norm()).max(1.0);
    let mesh = v.mesh();
    for i in 0..mesh.len() {
        let (a, b) = (v.value(i), w.value(i));
        if a > b + 1e-12 * scale || (mesh.is_boundary(i) && (a - b).abs() > 1e-12 * scale) {
            return Err(MaError::Precondition(format!(
                "need v ≤ w with equality on the boundary (node {i}: {a} vs {b})"
            )));
        }
    }
    Ok(())
}

fn nonpositive(us: &[ConvexFn], mesh: &std::sync::Arc<Mesh>) -> Result<()> {
    for u in us {
        same_mesh(u.mesh(), mesh)?;
        if u.values().iter().any(|x| *x > 0.0) {
            return Err(MaError::Precondition("the u_i must be nonpositive".into()));
        }
    }
    Ok(())
}

fn arity(us: &[ConvexFn], n: usize) -> Result<()> {
    if us.len() != n {
        return Err(MaError::Shape(format!("expected {n} functions, got {}", us.len())));
    }
    Ok(())
}

/// `∫(w−v)ⁿ dμ_n[u₁,…,u_n] ≤ n! ‖u₁‖⋯‖u_{n−1}‖ ∫|u_n|(dμ_v − dμ_w)`.
pub fn check_blocki_i(v: &ConvexFn, w: &ConvexFn, us: &[ConvexFn]) -> Result<CheckReport> {
    let mesh = v.mesh();
    let n = mesh.dim();
    arity(us, n)?;
    ordered_pair(v, w)?;
    nonpositive(us, mesh)?;
    let mixed = mixed_ma_measure(us)?.measure;
    let lhs = dot(&mixed, |i| (w.value(i) - v.value(i)).powi(n as i32));
    let (mv, mw) = (ma_measure(v)?, ma_measure(w)?);
    let un = &us[n - 1];
    let gap = dot(&mv, |i| un.value(i).abs()) - dot(&mw, |i| un.value(i).abs());
    let norms: f64 = us[..n - 1].iter().map(ConvexFn::sup_norm).product();
    let fact = (1..=n).product::<usize>() as f64;
    let rhs = fact * norms * gap;
    let mut data = vec![v.values(), w.values()];
    data.extend(us.iter().map(ConvexFn::values));
    Ok(CheckReport::new("blocki_i", lhs, rhs, scaled_tol(mesh, lhs, rhs)).with_digest(&data))
}

/// `∫(w−v)^{n+1}(dμ_n[u] − dμ_n[ũ]) ≤ 2(n+1)! Σ d_k m_k ∫|v|(dμ_v − dμ_w)`
/// with `d_k = ‖u_k − ũ_k‖`, `m_k = Π_{i<k}‖u_i‖ Π_{j>k}‖ũ_j‖`.
pub fn check_blocki_ii(v: &ConvexFn, w: &ConvexFn, us: &[ConvexFn], uts: &[ConvexFn]) -> Result<CheckReport> {
    let mesh = v.mesh();
    let n = mesh.dim();
    arity(us, n)?;
    arity(uts, n)?;
    ordered_pair(v, w)?;
    nonpositive(us, mesh)?;
    nonpositive(uts, mesh)?;
    if v.values().iter().any(|x| *x > 0.0) {
        return Err(MaError::Precondition("v must be nonpositive".into()));
    }
    let (m1, m2) = (mixed_ma_measure(us)?.measure, mixed_ma_measure(uts)?.measure);
    let gap_pow = |i: usize| (w.value(i) - v.value(i)).powi(n as i32 + 1);
    let lhs = dot(&m1, gap_pow) - dot(&m2, gap_pow);
    let (mv, mw) = (ma_measure(v)?, ma_measure(w)?);
    let gap = dot(&mv, |i| v.value(i).abs()) - dot(&mw, |i| v.value(i).abs());
    let mut sum = 0.0;
    for k in 0..n {
        let d = sup_diff(&us[k], &uts[k]);
        let m: f64 = us[..k].iter().map(ConvexFn::sup_norm).product::<f64>()
            * uts[k + 1..].iter().map(ConvexFn::sup_norm).product::<f64>();
        sum += d * m;
    }
    let fact = (1..=n + 1).product::<usize>() as f64;
    let rhs = 2.0 * fact * sum * gap;
    let mut data = vec![v.values(), w.values()];
    data.extend(us.iter().chain(uts).map(ConvexFn::values));
    let tol = scaled_tol(mesh, lhs, rhs).max(relative_tol(mesh) * dot(&m1, gap_pow).abs());
    Ok(CheckReport::new("blocki_ii", lhs, rhs, tol).with_digest(&data))
}

/// `∫|u₀| dμ_n[u₁,…,u_n] ≤ Π E(u_i)^{1/(n+1)}`.
pub fn check_cauchy_schwarz(us: &[ConvexFn]) -> Result<CheckReport> {
    let mesh = us.first().ok_or_else(|| MaError::Shape("no functions".into()))?.mesh();
    let n = mesh.dim();
    arity(us, n + 1)?;
    let refs: Vec<&ConvexFn> = us.iter().collect();
    zero_boundary(&refs)?;
    let mixed = mixed_ma_measure(&us[1..])?.measure;
    let lhs = dot(&mixed, |i| us[0].value(i).abs());
    let mut rhs = 1.0;
    for u in us {
        rhs *= energy(u)?.powf(1.0 / (n as f64 + 1.0));
    }
    let data: Vec<&[f64]> = us.iter().map(ConvexFn::values).collect();
    Ok(CheckReport::new("cauchy_schwarz", lhs, rhs, scaled_tol(mesh, lhs, rhs)).with_digest(&data))
}

/// `∫u₀ dμ_n[u₁,…,u_n] = ∫u_n dμ_n[u₀,…,u_{n−1}]`.
pub fn check_ibp(us: &[ConvexFn]) -> Result<CheckReport> {
    let mesh = us.first().ok_or_else(|| MaError::Shape("no functions".into()))?.mesh();
    let n = mesh.dim();
    arity(us, n + 1)?;
    let refs: Vec<&ConvexFn> = us.iter().collect();
    zero_boundary(&refs)?;
    let a = dot(&mixed_ma_measure(&us[1..])?.measure, |i| us[0].value(i));
    let b = dot(&mixed_ma_measure(&us[..n])?.measure, |i| us[n].value(i));
    let tol = relative_tol(mesh) * a.abs().max(b.abs()).max(1.0);
    let data: Vec<&[f64]> = us.iter().map(ConvexFn::values).collect();
    Ok(CheckReport::equality("ibp", a, b, tol).with_digest(&data))
}

/// Nodewise `μ_n[u₁,…,u_n] ≥ (Π f_i^{1/n}) ν` given `μ_{u_i} ≥ f_i ν`, with
/// `ν` lumped and `f_i` nodal. `lhs` is the largest violation.
pub fn check_mixed_inequality(us: &[ConvexFn], fs: &[Vec<f64>], nu: &DiscreteMeasure) -> Result<CheckReport> {
    let mesh = nu.mesh();
    let n = mesh.dim();
    arity(us, n)?;
    if fs.len() != n || fs.iter().any(|f| f.len() != mesh.len() || f.iter().any(|x| !(*x >= 0.0))) {
        return Err(MaError::Shape("need n nonnegative nodal densities".into()));
    }
    let nu = lumped_measure(nu);
    let nf = n as f64;
    for (k, (u, f)) in us.iter().zip(fs).enumerate() {
        same_mesh(u.mesh(), mesh)?;
        let mu = ma_measure(u)?;
        let floor = relative_tol(mesh) * mu.total();
        if let Some(i) = mesh.interior_nodes().find(|&i| mu.atoms()[i] < f[i] * nu.atoms()[i] - floor) {
            return Err(MaError::Precondition(format!("μ_u{k} < f{k} ν at node {i}")));
        }
    }
    let mixed = mixed_ma_measure(us)?.measure;
    let mut worst = f64::NEG_INFINITY;
    let mut total = 0.0;
    for i in mesh.interior_nodes() {
        let g: f64 = fs.iter().map(|f| f[i].powf(1.0 / nf)).product::<f64>() * nu.atoms()[i];
        total += g;
        if g > 0.0 {
            worst = worst.max(g - mixed.atoms()[i]);
        }
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    let tol = relative_tol(mesh) * total.max(mixed.total()).max(f64::MIN_POSITIVE);
    let mut data: Vec<&[f64]> = us.iter().map(ConvexFn::values).collect();
    data.extend(fs.iter().map(Vec::as_slice));
    Ok(CheckReport::new("mixed_inequality", worst, 0.0, tol).with_digest(&data))
}

/// For a supersolution `u` (`μ_u ≤ |u|^p ν`, zero boundary) and a subsolution
/// `v` (`μ_v ≥ |v|^p ν`, negative inside), checks `u ≥ v` and
/// `μ_u(Ω) ≤ μ_v(Ω)`. `lhs` is the larger relative violation.
pub fn check_comparison(u: &ConvexFn, v: &ConvexFn, p: f64, nu: &DiscreteMeasure) -> Result<CheckReport> {
    same_mesh(u.mesh(), v.mesh())?;
    same_mesh(u.mesh(), nu.mesh())?;
    let mesh = u.mesh();
    let n = mesh.dim() as f64;
    if !(p > 0.0 && p < n) {
        return Err(MaError::Parameter(format!("p must lie in (0, n), got {p}")));
    }
    zero_boundary(&[u])?;
    let nu = lumped_measure(nu);
    let (mu, mv) = (ma_measure(u)?, ma_measure(v)?);
    let tol = relative_tol(mesh);
    let (floor_u, floor_v) = (tol * mu.total(), tol * mv.total());
    for i in 0..mesh.len() {
        if mesh.is_boundary(i) {
            if v.value(i) > 0.0 {
                return Err(MaError::Precondition(format!("v > 0 on the boundary at node {i}")));
            }
            continue;
        }
        if v.value(i) >= 0.0 {
            return Err(MaError::Precondition(format!("v is not negative at node {i}")));
        }
        let sub = v.value(i).abs().powf(p) * nu.atoms()[i];
        if mv.atoms()[i] < sub - floor_v {
            return Err(MaError::Precondition(format!("v is not a subsolution at node {i}")));
        }
        let sup = u.value(i).abs().powf(p) * nu.atoms()[i];
        if mu.atoms()[i] > sup + floor_u {
            return Err(MaError::Precondition(format!("u is not a supersolution at node {i}")));
        }
    }
    let scale = u.sup_norm().max(v.sup_norm()).max(f64::MIN_POSITIVE);
    let order = mesh.interior_nodes().map(|i| v.value(i) - u.value(i)).fold(f64::NEG_INFINITY, f64::max) / scale;
    let mass = (mu.total() - mv.total()) / mv.total().max(f64::MIN_POSITIVE);
    Ok(CheckReport::new("comparison", order.max(mass), 0.0, tol).with_digest(&[u.values(), v.values(), &[p]]))
}

/// Domination principle on a discrete pair with `u ≥ v` on the boundary:
/// when `μ_u` gives no mass to `{u < v}`, checks `u ≥ v − 1e-9`. Returns
/// `None` when the hypothesis fails. `lhs` is the largest interior `v − u`.
pub fn check_domination(u: &ConvexFn, v: &ConvexFn) -> Result<Option<CheckReport>> {
    same_mesh(u.mesh(), v.mesh())?;
    let mesh = u.mesh();
    if let Some(i) = mesh.boundary_nodes().find(|&i| u.value(i) < v.value(i)) {
        return Err(MaError::Precondition(format!("u < v on the boundary at node {i}")));
    }
    let mu = ma_measure(u)?;
    let below: f64 = (0..mesh.len())
        .filter(|&i| u.value(i) < v.value(i) - 1e-12)
        .map(|i| mu.atoms()[i])
        .sum();
    if below > 1e-12 * mu.total() {
        return Ok(None);
    }
    let lhs = mesh.interior_nodes().map(|i| v.value(i) - u.value(i)).fold(f64::NEG_INFINITY, f64::max);
    Ok(Some(CheckReport::new("domination", lhs, 0.0, 1e-9).with_digest(&[u.values(), v.values()])))
}

/// Derivative of `t ↦ E(Γ_{u+tv})` at `0` against `(n+1)∫(−v)dμ_u`.
///
/// Central quotients `D(h)` are formed for each `h` in `hs` (decreasing); the
/// last two are combined by Richardson extrapolation for an `O(h²)` error.
pub fn check_envelope_derivative(u: &ConvexFn, v: &ConvexFn, hs: &[f64]) -> Result<CheckReport> {
    same_mesh(u.mesh(), v.mesh())?;
    zero_boundary(&[u, v])?;
    if hs.is_empty() || hs.iter().any(|h| !(*h > 0.0)) {
        return Err(MaError::Parameter("step list must be nonempty and positive".into()));
    }
    let mesh = u.mesh();
    let n = mesh.dim() as f64;
    let e_at = |t: f64| -> Result<f64> {
        let f: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| a + t * b).collect();
        energy(&convex_envelope(mesh, &f)?)
    };
    let mut ds = Vec::with_capacity(hs.len());
    for &h in hs {
        ds.push((e_at(h)? - e_at(-h)?) / (2.0 * h));
    }
    let slope = match ds.len() {
        1 => ds[0],
        k => {
            let q = (hs[k - 2] / hs[k - 1]).powi(2);
            (q * ds[k - 1] - ds[k - 2]) / (q - 1.0)
        }
    };
    let mu = ma_measure(u)?;
    let target = (n + 1.0) * dot(&mu, |i| -v.value(i));
    let tol = 1e-3 * target.abs().max(f64::MIN_POSITIVE);
    Ok(CheckReport::equality("envelope_derivative", slope, target, tol).with_digest(&[u.values(), v.values(), hs]))
}

#[cfg(test)]
mod tests;
