//! Aleksandrov solutions of `μ_u = ν` and `μ_u = |u|^p ν` with Dirichlet data.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex_core::{energy, grid_cells, hull_value, lipschitz_box, ma_measure, node_cell, ConvexFn, DiscreteMeasure};
use crate::eigen::LedgerRow;
use crate::error::{MaError, Result};
use crate::geometry::{unit_ball_volume, ConvexDomain, Mesh, MeshKind};
use crate::measures::{divergence_ratio, realize, realize_truncated, weighted_mass, MeasureSpec, WeightedMass};

/// Default truncation schedule `2, 4, …, 256`.
pub fn default_schedule() -> Vec<u64> {
    (1..=8).map(|k| 1u64 << k).collect()
}

/// Constant in `|u(x₀)|ⁿ ≤ C(n) diam^{n-1} dist(x₀) μ_u(Ω)` used by the checks.
pub fn aleksandrov_constant(n: usize) -> f64 {
    if n == 1 {
        1.0
    } else {
        4.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverBackend {
    Pl1d,
    Radial,
    Op2d,
}

impl SolverBackend {
    pub fn for_mesh(mesh: &Mesh) -> Self {
        match mesh.kind() {
            MeshKind::Line => SolverBackend::Pl1d,
            MeshKind::Radial { .. } => SolverBackend::Radial,
            MeshKind::Grid { .. } => SolverBackend::Op2d,
        }
    }
}

/// 2D node-lifting strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op2dMethod {
    /// Damped Newton on the cell areas, falling back to sweeps if it stalls.
    Newton,
    /// Gauss–Seidel sweeps, bisecting each node value in decreasing deficit order.
    Sweep,
}

#[derive(Clone, Debug)]
pub struct DirichletProblem {
    pub measure: DiscreteMeasure,
    /// Nodal boundary data; only boundary entries are read. `None` means zero.
    pub boundary: Option<Vec<f64>>,
    pub backend: Option<SolverBackend>,
}

impl DirichletProblem {
    pub fn new(measure: DiscreteMeasure) -> Self {
        DirichletProblem {
            measure,
            boundary: None,
            backend: None,
        }
    }

    pub fn with_boundary(mut self, phi: Vec<f64>) -> Self {
        self.boundary = Some(phi);
        self
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.measure.mesh()
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub method: Op2dMethod,
    /// Starting values for the 2D backend.
    pub initial: Option<Vec<f64>>,
}

impl SolveOptions {
    pub fn new(tol: f64) -> Self {
        SolveOptions {
            tol,
            max_iter: 200,
            method: Op2dMethod::Newton,
            initial: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: ConvexFn,
    /// Largest nodal `|μ_u − ν|` over interior nodes (lumped masses).
    pub residual: f64,
    pub iterations: usize,
    pub ledger: Vec<LedgerRow>,
}

pub fn solve_dirichlet(problem: &DirichletProblem, tol: f64) -> Result<SolveReport> {
    solve_dirichlet_with(problem, &SolveOptions::new(tol))
}

pub fn solve_dirichlet_with(problem: &DirichletProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let mesh = problem.mesh().clone();
    if !(opts.tol > 0.0) {
        return Err(MaError::Parameter("tolerance must be positive".into()));
    }
    let backend = SolverBackend::for_mesh(&mesh);
    if let Some(b) = problem.backend {
        if b != backend {
            return Err(MaError::Precondition(format!("backend {b:?} does not match the mesh")));
        }
    }
    let phi = match &problem.boundary {
        Some(v) if v.len() != mesh.len() => return Err(MaError::Shape("boundary data does not match the mesh".into())),
        Some(v) => v.clone(),
        None => vec![0.0; mesh.len()],
    };
    let target = problem.measure.lumped_interior();
    if let Some(i) = target.iter().position(|t| !t.is_finite()) {
        return Err(MaError::Domain(format!("target mass at node {i} is not finite")));
    }
    match backend {
        SolverBackend::Pl1d => solve_line(&mesh, &target, &phi),
        SolverBackend::Radial => solve_radial(&mesh, &target, &phi),
        SolverBackend::Op2d => solve_op2d(&mesh, &target, &phi, opts),
    }
}

fn residual_of(u: &ConvexFn, target: &[f64]) -> Result<f64> {
    let mu = ma_measure(u)?;
    Ok(u
        .mesh()
        .interior_nodes()
        .map(|i| (mu.atoms()[i] - target[i]).abs())
        .fold(0.0, f64::max))
}

fn one_step_ledger(residual: f64) -> Vec<LedgerRow> {
    vec![LedgerRow {
        step: 1,
        energy: f64::NAN,
        norm: f64::NAN,
        rayleigh: f64::NAN,
        residual,
        sup_change: f64::NAN,
    }]
}

/// Exact solve by the Green's function `G(x,y) = (min(x,y)−a)(b−max(x,y))/(b−a)`.
fn solve_line(mesh: &Arc<Mesh>, target: &[f64], phi: &[f64]) -> Result<SolveReport> {
    let ConvexDomain::Interval { a, b } = *mesh.domain() else {
        unreachable!()
    };
    let n = mesh.len();
    let x: Vec<f64> = (0..n).map(|i| mesh.node(i)[0]).collect();
    let (pa, pb) = (phi[0], phi[n - 1]);
    // left[i] = Σ_{j<=i} (x_j − a) T_j, right[i] = Σ_{j>i} (b − x_j) T_j
    let mut left = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += (x[i] - a) * target[i];
        left[i] = acc;
    }
    let mut right = vec![0.0; n];
    acc = 0.0;
    for i in (0..n).rev() {
        right[i] = acc;
        acc += (b - x[i]) * target[i];
    }
    let len = b - a;
    let mut values: Vec<f64> = (0..n)
        .map(|i| {
            let lin = pa + (pb - pa) * (x[i] - a) / len;
            lin - ((b - x[i]) * left[i] + (x[i] - a) * right[i]) / len
        })
        .collect();
    values[0] = pa;
    values[n - 1] = pb;
    let u = ConvexFn::new(mesh.clone(), values)?;
    let residual = residual_of(&u, target)?;
    Ok(SolveReport {
        solution: u,
        residual,
        iterations: 1,
        ledger: one_step_ledger(residual),
    })
}

/// Radial solve: `ω_n (W′)ⁿ` on each shell equals the mass enclosed by it.
fn solve_radial(mesh: &Arc<Mesh>, target: &[f64], phi: &[f64]) -> Result<SolveReport> {
    let n = mesh.len();
    let dim = mesh.dim();
    let w = unit_ball_volume(dim);
    let mut values = vec![0.0; n];
    values[n - 1] = phi[n - 1];
    let mut enclosed = vec![0.0; n - 1];
    let mut acc = 0.0;
    for i in 0..n - 1 {
        acc += target[i];
        enclosed[i] = acc;
    }
    for i in (0..n - 1).rev() {
        let s = (enclosed[i] / w).powf(1.0 / dim as f64);
        values[i] = values[i + 1] - s * (mesh.node(i + 1)[0] - mesh.node(i)[0]);
    }
    let u = ConvexFn::new(mesh.clone(), values)?;
    let residual = residual_of(&u, target)?;
    Ok(SolveReport {
        solution: u,
        residual,
        iterations: 1,
        ledger: one_step_ledger(residual),
    })
}

/// Concave function vanishing on the boundary, positive inside.
fn bubble(mesh: &Mesh, i: usize) -> f64 {
    let x = mesh.node(i);
    match mesh.domain() {
        ConvexDomain::Ball { center, radius } => {
            (radius * radius - (x[0] - center[0]).powi(2) - (x[1] - center[1]).powi(2)).max(0.0)
        }
        ConvexDomain::Polygon { vertices } => {
            let m = vertices.len();
            let mut logsum = 0.0;
            for e in 0..m {
                let (p, q) = (vertices[e], vertices[(e + 1) % m]);
                let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                let d = ((q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0])) / len;
                if d <= 0.0 {
                    return 0.0;
                }
                logsum += d.ln();
            }
            (logsum / m as f64).exp()
        }
        ConvexDomain::Interval { .. } => unreachable!(),
    }
}

/// Convex extension of boundary data: the lower hull over boundary nodes.
fn boundary_lift(mesh: &Arc<Mesh>, phi: &[f64]) -> Result<Vec<f64>> {
    let env = crate::convex_core::boundary_envelope(mesh, phi);
    let scale = phi.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in mesh.boundary_nodes() {
        if (env[i] - phi[i]).abs() > 1e-10 * scale {
            return Err(MaError::Precondition(format!(
                "boundary data at node {i} is not the trace of a convex function"
            )));
        }
    }
    if mesh.boundary_nodes().all(|i| phi[i] == 0.0) {
        return Ok(vec![0.0; mesh.len()]);
    }
    let active: Vec<bool> = (0..mesh.len()).map(|i| mesh.is_boundary(i)).collect();
    let l = lipschitz_box(mesh, phi, Some(&active)) + 1.0;
    let lifted: Vec<(usize, f64)> = mesh
        .interior_nodes()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| {
            let mut v = phi.to_vec();
            v[i] = phi.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x)) + 1.0;
            (i, hull_value(mesh, &v, i, Some(&active), l, 0.0))
        })
        .collect();
    let mut out = phi.to_vec();
    for (i, v) in lifted {
        out[i] = v;
    }
    Ok(out)
}

struct AreaState {
    areas: Vec<f64>,
    /// Off-diagonal couplings `ℓ_ij / |x_i − x_j|` per active node.
    couplings: Vec<Vec<(usize, f64)>>,
    clipped: bool,
}

fn area_state(mesh: &Mesh, u: &[f64], active: &[bool]) -> AreaState {
    let set = grid_cells(mesh, u, Some(active));
    let pts: Vec<[f64; 2]> = (0..mesh.len()).map(|i| [mesh.node(i)[0], mesh.node(i)[1]]).collect();
    let mut areas = vec![0.0; mesh.len()];
    let mut couplings = vec![Vec::new(); mesh.len()];
    for i in 0..mesh.len() {
        if !active[i] || mesh.is_boundary(i) {
            continue;
        }
        let poly = &set.polys[i];
        areas[i] = poly.area();
        let mut by_tag: BTreeMap<usize, f64> = BTreeMap::new();
        for (tag, len) in poly.tagged_edges() {
            if let Some(j) = tag {
                if len > 0.0 {
                    *by_tag.entry(j).or_default() += len;
                }
            }
        }
        couplings[i] = by_tag
            .into_iter()
            .map(|(j, len)| {
                let d = ((pts[j][0] - pts[i][0]).powi(2) + (pts[j][1] - pts[i][1]).powi(2)).sqrt();
                (j, len / d)
            })
            .collect();
    }
    AreaState {
        areas,
        couplings,
        clipped: set.clipped,
    }
}

/// Solves `L δ = r` for the symmetric weighted graph Laplacian of the couplings,
/// with boundary nodes eliminated, by Jacobi-preconditioned conjugate gradients.
fn solve_laplacian(state: &AreaState, unknown: &[usize], index: &[usize], rhs: &[f64]) -> Vec<f64> {
    let m = unknown.len();
    let mut diag = vec![0.0; m];
    let mut off: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut sym: BTreeMap<(usize, usize), (f64, u8)> = BTreeMap::new();
    for (k, &i) in unknown.iter().enumerate() {
        for &(j, w) in &state.couplings[i] {
            diag[k] += w;
            if index[j] != usize::MAX {
                let key = if i < j { (i, j) } else { (j, i) };
                let e = sym.entry(key).or_insert((0.0, 0));
                e.0 += w;
                e.1 += 1;
            }
        }
    }
    for ((i, j), (w, c)) in sym {
        let w = w / c as f64;
        let (a, b) = (index[i], index[j]);
        off[a].push((b, w));
        off[b].push((a, w));
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for k in 0..m {
            let mut s = diag[k] * x[k];
            for &(l, w) in &off[k] {
                s -= w * x[l];
            }
            y[k] = s;
        }
    };
    let mut x = vec![0.0; m];
    let mut r = rhs.to_vec();
    let prec = |r: &[f64]| -> Vec<f64> { r.iter().zip(&diag).map(|(a, d)| if *d > 0.0 { a / d } else { *a }).collect() };
    let mut z = prec(&r);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let r0 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut ap = vec![0.0; m];
    for _ in 0..(10 * m + 100) {
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= 1e-13 * r0 || rn == 0.0 {
            break;
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for k in 0..m {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        z = prec(&r);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..m {
            p[k] = z[k] + beta * p[k];
        }
    }
    x
}

fn solve_op2d(mesh: &Arc<Mesh>, target: &[f64], phi: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    let lift = boundary_lift(mesh, phi)?;
    let active: Vec<bool> = (0..mesh.len()).map(|i| mesh.is_boundary(i) || target[i] > 0.0).collect();
    let unknown: Vec<usize> = mesh.interior_nodes().filter(|&i| active[i]).collect();
    let mut index = vec![usize::MAX; mesh.len()];
    for (k, &i) in unknown.iter().enumerate() {
        index[i] = k;
    }
    let mut u = match &opts.initial {
        Some(v) => {
            if v.len() != mesh.len() {
                return Err(MaError::Shape("initial guess does not match the mesh".into()));
            }
            let mut v = v.clone();
            for i in mesh.boundary_nodes() {
                v[i] = phi[i];
            }
            v
        }
        None => {
            let q: Vec<f64> = (0..mesh.len()).map(|i| bubble(mesh, i)).collect();
            let unit: Vec<f64> = q.iter().map(|v| -v).collect();
            let st = area_state(mesh, &unit, &active);
            let a1: f64 = unknown.iter().map(|&i| st.areas[i]).sum();
            let t: f64 = unknown.iter().map(|&i| target[i]).sum();
            let c = if a1 > 0.0 && t > 0.0 { (t / a1).sqrt() } else { 1.0 };
            (0..mesh.len()).map(|i| lift[i] - c * q[i]).collect()
        }
    };
    let tmin = unknown.iter().map(|&i| target[i]).fold(f64::INFINITY, f64::min);
    let mut ledger = Vec::new();
    let mut state = area_state(mesh, &u, &active);
    let res_of = |st: &AreaState| -> (f64, f64) {
        let mut mx: f64 = 0.0;
        let mut l2 = 0.0;
        for &i in &unknown {
            let d = st.areas[i] - target[i];
            mx = mx.max(d.abs());
            l2 += d * d;
        }
        (mx, l2.sqrt())
    };
    let (mut res, mut res2) = res_of(&state);
    let mut iterations = 0;
    let mut use_sweep = opts.method == Op2dMethod::Sweep;
    while res > opts.tol && iterations < opts.max_iter && !use_sweep {
        iterations += 1;
        let rhs: Vec<f64> = unknown.iter().map(|&i| state.areas[i] - target[i]).collect();
        let delta = solve_laplacian(&state, &unknown, &index, &rhs);
        let mut theta = 1.0;
        let mut accepted = None;
        while theta >= 1.0 / 1024.0 {
            let mut trial = u.clone();
            for (k, &i) in unknown.iter().enumerate() {
                trial[i] += theta * delta[k];
            }
            let st = area_state(mesh, &trial, &active);
            let amin = unknown.iter().map(|&i| st.areas[i]).fold(f64::INFINITY, f64::min);
            let (mx, l2) = res_of(&st);
            if amin > 0.5 * tmin && l2 <= (1.0 - 0.5 * theta) * res2 {
                accepted = Some((trial, st, mx, l2));
                break;
            }
            theta *= 0.5;
        }
        let Some((trial, st, mx, l2)) = accepted else {
            use_sweep = true;
            break;
        };
        let change = trial.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = trial;
        state = st;
        res = mx;
        res2 = l2;
        ledger.push(LedgerRow {
            step: iterations,
            energy: f64::NAN,
            norm: f64::NAN,
            rayleigh: f64::NAN,
            residual: res,
            sup_change: change,
        });
    }
    if use_sweep && res > opts.tol {
        let sweeps = sweep_op2d(mesh, target, &active, &unknown, &mut u, opts, &mut ledger, iterations)?;
        iterations += sweeps;
        state = area_state(mesh, &u, &active);
        res = res_of(&state).0;
    }
    if res > opts.tol {
        return Err(MaError::IterationLimit {
            iterations,
            residual: res,
            ledger,
        });
    }
    if state.clipped {
        return Err(MaError::Consistency("subgradient cells reached the Lipschitz box".into()));
    }
    // nodes without target mass sit on the lower hull of the others
    let l = lipschitz_box(mesh, &u, Some(&active)) + 1.0;
    let fill: Vec<(usize, f64)> = mesh
        .interior_nodes()
        .filter(|&i| !active[i])
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| {
            let mut v = u.clone();
            v[i] = u.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x)) + 1.0;
            (i, hull_value(mesh, &v, i, Some(&active), l, 0.0))
        })
        .collect();
    for (i, v) in fill {
        u[i] = v;
    }
    let solution = ConvexFn::new_unchecked(mesh.clone(), u)?;
    solution.check_convexity()?;
    let residual = residual_of(&solution, target)?;
    Ok(SolveReport {
        solution,
        residual,
        iterations,
        ledger,
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep_op2d(
    mesh: &Arc<Mesh>,
    target: &[f64],
    active: &[bool],
    unknown: &[usize],
    u: &mut [f64],
    opts: &SolveOptions,
    ledger: &mut Vec<LedgerRow>,
    offset: usize,
) -> Result<usize> {
    let max_sweeps = opts.max_iter.max(1) * 50;
    for sweep in 1..=max_sweeps {
        let l = lipschitz_box(mesh, u, Some(active)) * 2.0 + 1.0;
        let st = area_state(mesh, u, active);
        let mut order: Vec<(f64, usize)> = unknown.iter().map(|&i| (target[i] - st.areas[i], i)).collect();
        let res = order.iter().fold(0.0f64, |m, (d, _)| m.max(d.abs()));
        if res <= opts.tol {
            return Ok(sweep - 1);
        }
        order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut change: f64 = 0.0;
        for &(_, i) in &order {
            let area = |z: f64, u: &[f64]| node_cell(mesh, u, i, z, Some(active), l, true).area();
            let t = target[i];
            let mut hi = u[i];
            while area(hi, u) > t {
                hi += (hi - u[i]).abs().max(mesh.spacing());
            }
            let mut lo = u[i];
            let mut step = mesh.spacing() * mesh.spacing();
            while area(lo, u) < t {
                lo -= step;
                step *= 2.0;
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if area(mid, u) > t {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z = 0.5 * (lo + hi);
            change = change.max((z - u[i]).abs());
            u[i] = z;
        }
        ledger.push(LedgerRow {
            step: offset + sweep,
            energy: f64::NAN,
            norm: f64::NAN,
            rayleigh: f64::NAN,
            residual: res,
            sup_change: change,
        });
    }
    Ok(max_sweeps)
}

/// One row of a truncation ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub m: u64,
    pub sup_gap: f64,
    pub residual: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct SingularReport {
    pub report: SolveReport,
    pub levels: Vec<LevelRow>,
    /// `∫ dist dν` of the untruncated measure on the mesh.
    pub weighted_mass: WeightedMass,
    /// Sup-gaps decay geometrically (or fall below the tolerance).
    pub cauchy: bool,
    /// `‖(φ − u)⁺‖ⁿ` and `C(n) diam^{n-1} ∫ dist dν_m` for the last level.
    pub bound_lhs: f64,
    pub bound_rhs: f64,
    pub warnings: Vec<String>,
}

/// Geometric decay test on successive sup-gaps.
pub fn gaps_are_cauchy(gaps: &[f64], tol: f64) -> bool {
    if gaps.last().is_some_and(|g| *g < tol) {
        return true;
    }
    let n = gaps.len();
    if n < 3 {
        return false;
    }
    let r = divergence_ratio();
    gaps[n - 2] <= r * gaps[n - 3] && gaps[n - 1] <= r * gaps[n - 2]
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn check_schedule(schedule: &[u64]) -> Result<()> {
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MaError::Parameter("schedule must be nonempty and strictly increasing from m >= 1".into()));
    }
    Ok(())
}

fn dirichlet_bound(mesh: &Mesh, nu: &DiscreteMeasure, phi: &[f64], u: &ConvexFn) -> (f64, f64) {
    let n = mesh.dim();
    let gap = phi
        .iter()
        .zip(u.values())
        .enumerate()
        .filter(|(i, _)| !mesh.is_boundary(*i))
        .map(|(_, (p, v))| (p - v).max(0.0))
        .fold(0.0, f64::max);
    let wm = crate::measures::weighted_sum(nu, 1.0, crate::measures::Weight::Dist);
    let c = aleksandrov_constant(n) * mesh.domain().diameter().powi(n as i32 - 1);
    (gap.powi(n as i32), c * wm)
}

/// Solves `μ_u = ν_m` along a truncation schedule and records the sup-gaps
/// between consecutive levels.
pub fn solve_dirichlet_singular(
    mesh: &Arc<Mesh>,
    spec: &MeasureSpec,
    phi: Option<Vec<f64>>,
    schedule: &[u64],
    tol: f64,
) -> Result<SingularReport> {
    check_schedule(schedule)?;
    let mut warnings = Vec::new();
    let wm = weighted_mass(&realize(spec, mesh)?, 1.0)?;
    if !wm.is_finite() {
        warnings.push("weighted mass ∫ dist dν appears infinite; the truncated solutions need not converge".into());
    }
    let phi = phi.unwrap_or_else(|| vec![0.0; mesh.len()]);
    let mut levels: Vec<LevelRow> = Vec::new();
    let mut prev: Option<SolveReport> = None;
    let mut last_nu = None;
    for &m in schedule {
        let nu = realize_truncated(spec, mesh, m)?;
        let problem = DirichletProblem::new(nu.clone()).with_boundary(phi.clone());
        let rep = solve_dirichlet(&problem, tol)?;
        let gap = match &prev {
            Some(p) => {
                let scale = p.solution.sup_norm().max(1.0);
                if let Some(i) = (0..mesh.len()).find(|&i| rep.solution.value(i) > p.solution.value(i) + 1e-9 * scale) {
                    return Err(MaError::Consistency(format!(
                        "truncated solutions are not monotone at node {i} (m = {m})"
                    )));
                }
                sup_dist(rep.solution.values(), p.solution.values())
            }
            None => f64::NAN,
        };
        let e = if rep.solution.has_zero_boundary() {
            energy(&rep.solution)?
        } else {
            f64::NAN
        };
        levels.push(LevelRow {
            m,
            sup_gap: gap,
            residual: rep.residual,
            energy: e,
        });
        last_nu = Some(nu);
        prev = Some(rep);
        if gap < tol {
            break;
        }
    }
    let report = prev.expect("schedule is nonempty");
    let gaps: Vec<f64> = levels.iter().skip(1).map(|r| r.sup_gap).collect();
    let cauchy = gaps_are_cauchy(&gaps, tol);
    let (bound_lhs, bound_rhs) = dirichlet_bound(mesh, last_nu.as_ref().unwrap(), &phi, &report.solution);
    Ok(SingularReport {
        report,
        levels,
        weighted_mass: wm,
        cauchy,
        bound_lhs,
        bound_rhs,
        warnings,
    })
}

#[derive(Clone, Debug)]
pub struct PowerReport {
    pub report: SolveReport,
    pub levels: Vec<LevelRow>,
    /// Upper bound `(C ∫ dist dν)^{1/(n−p)}` on `‖u‖∞`.
    pub sup_upper: f64,
    /// Lower bound on `‖u‖∞` from the gradient estimate in an inner subdomain.
    pub sup_lower: f64,
}

/// Solves `μ_u = |u|^p ν_m`, `0 < p < n`, by the monotone fixed point
/// `u ← solve(|u|^p ν_m)` at each truncation level.
pub fn solve_power(
    mesh: &Arc<Mesh>,
    spec: &MeasureSpec,
    p: f64,
    tol: f64,
    schedule: &[u64],
) -> Result<PowerReport> {
    let n = mesh.dim() as f64;
    if !(p > 0.0 && p < n) {
        return Err(MaError::Parameter(format!("p must lie in (0, {n}), got {p}")));
    }
    check_schedule(schedule)?;
    let full = realize(spec, mesh)?;
    let mut levels = Vec::new();
    let mut prev: Option<SolveReport> = None;
    for &m in schedule {
        let nu = realize_truncated(spec, mesh, m)?;
        if nu.total() == 0.0 {
            return Err(MaError::Degenerate(format!("truncated measure at m = {m} is zero")));
        }
        let rep = power_fixed_point(mesh, &nu, p, tol, prev.as_ref().map(|r| &r.solution))?;
        let gap = match &prev {
            Some(q) => {
                let scale = q.solution.sup_norm().max(1.0);
                if let Some(i) = (0..mesh.len()).find(|&i| rep.solution.value(i) > q.solution.value(i) + 1e-8 * scale) {
                    return Err(MaError::Consistency(format!("power solutions are not monotone at node {i} (m = {m})")));
                }
                sup_dist(rep.solution.values(), q.solution.values())
            }
            None => f64::NAN,
        };
        levels.push(LevelRow {
            m,
            sup_gap: gap,
            residual: rep.residual,
            energy: energy(&rep.solution)?,
        });
        prev = Some(rep);
        if gap < tol {
            break;
        }
    }
    let report = prev.expect("schedule is nonempty");
    let dom = mesh.domain();
    let diam = dom.diameter();
    let c = aleksandrov_constant(mesh.dim()) * diam.powf(n - 1.0);
    let wm = crate::measures::weighted_sum(&full, 1.0, crate::measures::Weight::Dist);
    let sup_upper = (c * wm).powf(1.0 / (n - p));
    let inradius = (0..mesh.len()).map(|i| mesh.node_dist(i)).fold(0.0, f64::max);
    let eps0 = 0.25 * inradius;
    let c1 = 1.0 / (2.0 * eps0);
    let c2 = 2.0 * eps0 / diam;
    let inner = full.integrate_weight(
        |i| if mesh.node_dist(i) > 2.0 * eps0 { 1.0 } else { 0.0 },
        |k| mesh.cell_fraction_beyond(k, 2.0 * eps0),
    );
    let ball = unit_ball_volume(mesh.dim()) * c1.powf(n);
    let sup_lower = if inner > 0.0 {
        (ball / (c2.powf(p) * inner)).powf(-1.0 / (n - p))
    } else {
        0.0
    };
    Ok(PowerReport {
        report,
        levels,
        sup_upper,
        sup_lower,
    })
}

fn power_fixed_point(
    mesh: &Arc<Mesh>,
    nu: &DiscreteMeasure,
    p: f64,
    tol: f64,
    start: Option<&ConvexFn>,
) -> Result<SolveReport> {
    let solve = |u: &[f64]| -> Result<SolveReport> {
        let rhs = nu.weighted(u, |v| v.abs().powf(p));
        solve_dirichlet(&DirichletProblem::new(rhs), tol.min(1e-10))
    };
    let mut u: Vec<f64> = match start {
        Some(s) => s.values().to_vec(),
        None => {
            let leb = crate::measures::realize(&MeasureSpec::Lebesgue, mesh)?;
            let leb = leb.scaled(nu.total() / leb.total());
            let w = solve_dirichlet(&DirichletProblem::new(leb), tol.min(1e-10))?.solution;
            let mut c = 1.0;
            let mut found = None;
            for _ in 0..80 {
                let cand: Vec<f64> = w.values().iter().map(|v| c * v).collect();
                let next = solve(&cand)?;
                let scale = c * w.sup_norm();
                if next.solution.values().iter().zip(&cand).all(|(a, b)| *a <= b + 1e-12 * scale) {
                    found = Some(cand);
                    break;
                }
                c *= 0.5;
            }
            found.ok_or_else(|| MaError::Degenerate("no starting function below its image".into()))?
        }
    };
    let mut ledger = Vec::new();
    for k in 1..=10_000 {
        let next = solve(&u)?;
        let scale = next.solution.sup_norm().max(f64::MIN_POSITIVE);
        if let Some(i) = (0..mesh.len()).find(|&i| next.solution.value(i) > u[i] + 1e-9 * scale) {
            return Err(MaError::Consistency(format!("power iterates increased at node {i} (step {k})")));
        }
        let change = sup_dist(next.solution.values(), &u);
        u = next.solution.values().to_vec();
        let residual = power_residual(&next.solution, nu, p)?;
        ledger.push(LedgerRow {
            step: k,
            energy: f64::NAN,
            norm: f64::NAN,
            rayleigh: f64::NAN,
            residual,
            sup_change: change,
        });
        if change <= tol * scale.max(1.0) {
            return Ok(SolveReport {
                solution: next.solution,
                residual,
                iterations: k,
                ledger,
            });
        }
    }
    let residual = ledger.last().map(|r| r.residual).unwrap_or(f64::NAN);
    Err(MaError::IterationLimit {
        iterations: ledger.len(),
        residual,
        ledger,
    })
}

/// Largest nodal `|μ_u − |u|^p ν|` over interior nodes.
pub fn power_residual(u: &ConvexFn, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    let target = nu.weighted(u.values(), |v| v.abs().powf(p)).lumped_interior();
    residual_of(u, &target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0).unwrap(), n).unwrap())
    }

    #[test]
    fn single_atom_gives_cone() {
        let m = line(3);
        let nu = DiscreteMeasure::from_atoms(m, &[(1, 2.0)]).unwrap();
        let rep = solve_dirichlet(&DirichletProblem::new(nu), 1e-12).unwrap();
        assert_eq!(rep.solution.values(), &[0.0, -1.0, 0.0]);
        assert!(rep.residual < 1e-15);
    }

    #[test]
    fn lebesgue_line_is_quadratic() {
        let m = line(101);
        let nu = realize(&MeasureSpec::Lebesgue, &m).unwrap();
        let rep = solve_dirichlet(&DirichletProblem::new(nu), 1e-12).unwrap();
        for i in 0..m.len() {
            let x = m.node(i)[0];
            assert!((rep.solution.value(i) - 0.5 * (x * x - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn boundary_data_is_interpolated() {
        let m = line(11);
        let nu = DiscreteMeasure::zero(m.clone());
        let mut phi = vec![0.0; 11];
        phi[0] = 1.0;
        phi[10] = 3.0;
        let rep = solve_dirichlet(&DirichletProblem::new(nu).with_boundary(phi), 1e-12).unwrap();
        assert_relative_eq!(rep.solution.value(5), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn radial_lebesgue() {
        let m = Arc::new(Mesh::radial(&ConvexDomain::unit_ball(2), 401).unwrap());
        let nu = realize(&MeasureSpec::Lebesgue, &m).unwrap();
        let rep = solve_dirichlet(&DirichletProblem::new(nu), 1e-12).unwrap();
        assert!(rep.residual < 1e-10);
        for i in 0..m.len() {
            let r = m.node(i)[0];
            assert!((rep.solution.value(i) - 0.5 * (r * r - 1.0)).abs() < 1e-4);
        }
    }

    #[test]
    fn op2d_small_disk() {
        let m = Arc::new(Mesh::grid(&ConvexDomain::unit_ball(2), 17).unwrap());
        let nu = realize(&MeasureSpec::Lebesgue, &m).unwrap();
        let rep = solve_dirichlet(&DirichletProblem::new(nu), 1e-10).unwrap();
        let err = (0..m.len())
            .map(|i| {
                let x = m.node(i);
                (rep.solution.value(i) - 0.5 * (x[0] * x[0] + x[1] * x[1] - 1.0)).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 2e-2, "{err}");
    }

    #[test]
    fn op2d_sweep_agrees_with_newton() {
        let m = Arc::new(Mesh::grid(&ConvexDomain::unit_square(), 9).unwrap());
        let nu = realize(&MeasureSpec::Lebesgue, &m).unwrap();
        let p = DirichletProblem::new(nu);
        let a = solve_dirichlet(&p, 1e-10).unwrap();
        let mut o = SolveOptions::new(1e-10);
        o.method = Op2dMethod::Sweep;
        let b = solve_dirichlet_with(&p, &o).unwrap();
        assert!(sup_dist(a.solution.values(), b.solution.values()) < 1e-6);
    }

    #[test]
    fn power_with_atom_has_unit_depth() {
        let m = line(3);
        let spec = MeasureSpec::Atoms(vec![(vec![0.0], 2.0)]);
        let rep = solve_power(&m, &spec, 0.5, 1e-12, &[2]).unwrap();
        assert!((rep.report.solution.value(1) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_p() {
        let m = line(5);
        assert!(matches!(
            solve_power(&m, &MeasureSpec::Lebesgue, 1.5, 1e-8, &[2]),
            Err(MaError::Parameter(_))
        ));
    }
}
