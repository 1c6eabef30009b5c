//! Piecewise-linear convex functions, discrete Monge–Ampère measures, mixed
//! measures, energies and convex envelopes.

mod cells;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MaError, Result};
use crate::geometry::{unit_ball_volume, ConvexDomain, Mesh, MeshKind};
use crate::polygon::{clip_halfplane, polygon_area};

pub(crate) use cells::{grid_cells, hull_value, lipschitz_box, node_cell};


/// Relative tolerance of the discrete convexity test.
pub const CONVEXITY_TOL: f64 = 1e-10;
/// Smallest value range used to scale convexity tolerances on the grid.
const RANGE_FLOOR: f64 = 1e-4;

/// Relative floor below which negative polarized masses are treated as round-off.
pub const POLARIZATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Pl1d,
    Radial,
    Grid2d,
}

/// Piecewise-linear convex function given by its nodal values on a mesh.
#[derive(Clone, Debug)]
pub struct ConvexFn {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl ConvexFn {
    /// Builds a function and verifies finiteness and discrete convexity.
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        let f = Self::new_unchecked(mesh, values)?;
        f.check_convexity()?;
        Ok(f)
    }

    /// Builds a function checking only shape and finiteness.
    pub fn new_unchecked(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(MaError::Shape(format!(
                "{} values for a mesh with {} nodes",
                values.len(),
                mesh.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MaError::Domain(format!("non-finite value at node {i}")));
        }
        Ok(ConvexFn { mesh, values })
    }

    /// Samples `f` at the nodes (radial nodes receive `[r]`) and checks convexity.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..mesh.len()).map(|i| f(mesh.node(i))).collect();
        Self::new(mesh, values)
    }

    pub fn zero(mesh: Arc<Mesh>) -> Self {
        let n = mesh.len();
        ConvexFn { mesh, values: vec![0.0; n] }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn backend(&self) -> Backend {
        match self.mesh.kind() {
            MeshKind::Line => Backend::Pl1d,
            MeshKind::Radial { .. } => Backend::Radial,
            MeshKind::Grid { .. } => Backend::Grid2d,
        }
    }

    pub fn boundary_trace(&self) -> Vec<(usize, f64)> {
        self.mesh.boundary_nodes().map(|i| (i, self.values[i])).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn has_zero_boundary(&self) -> bool {
        let scale = self.sup_norm().max(f64::MIN_POSITIVE);
        self.mesh
            .boundary_nodes()
            .all(|i| self.values[i].abs() <= 1e-12 * scale)
    }

    pub fn scaled(&self, c: f64) -> ConvexFn {
        ConvexFn {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Nodewise sum; the sum of convex functions is convex.
    pub fn add(&self, other: &ConvexFn) -> Result<ConvexFn> {
        same_mesh(&self.mesh, &other.mesh)?;
        Ok(ConvexFn {
            mesh: self.mesh.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// Value at the representative point of cell `k`.
    pub fn cell_value(&self, k: usize) -> f64 {
        self.mesh.cell_value(k, &self.values)
    }

    /// Slopes between consecutive nodes (1D and radial meshes).
    pub fn slopes(&self) -> Vec<f64> {
        let p = self.mesh.points();
        self.values
            .windows(2)
            .zip(p.windows(2))
            .map(|(v, x)| (v[1] - v[0]) / (x[1][0] - x[0][0]))
            .collect()
    }

    pub fn check_convexity(&self) -> Result<()> {
        match self.mesh.kind() {
            MeshKind::Line | MeshKind::Radial { .. } => {
                let s = self.slopes();
                let scale = s.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
                for i in 1..s.len() {
                    let jump = s[i] - s[i - 1];
                    if jump < -CONVEXITY_TOL * scale {
                        return Err(MaError::Convexity {
                            nodes: vec![i - 1, i, i + 1],
                            defect: -jump,
                        });
                    }
                }
                if matches!(self.mesh.kind(), MeshKind::Radial { .. }) && s[0] < -CONVEXITY_TOL * scale {
                    return Err(MaError::Convexity {
                        nodes: vec![0, 1],
                        defect: -s[0],
                    });
                }
                Ok(())
            }
            MeshKind::Grid { .. } => {
                let env = envelope_grid(&self.mesh, &self.values);
                let range = value_range(&self.values).max(RANGE_FLOOR);
                for (i, (e, v)) in env.iter().zip(&self.values).enumerate() {
                    if v - e > CONVEXITY_TOL * range {
                        return Err(MaError::Convexity {
                            nodes: vec![i],
                            defect: v - e,
                        });
                    }
                }
                Ok(())
            }
        }
    }
}

fn value_range(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

pub(crate) fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        return Ok(());
    }
    if a.len() != b.len() || a.kind() != b.kind() || a.points() != b.points() {
        return Err(MaError::Shape("functions and measures must share one mesh".into()));
    }
    Ok(())
}

/// Nonnegative measure stored as node atoms plus cell masses (uniform over each cell).
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    mesh: Arc<Mesh>,
    atoms: Vec<f64>,
    cells: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(mesh: Arc<Mesh>, atoms: Vec<f64>, cells: Vec<f64>) -> Result<Self> {
        if atoms.len() != mesh.len() || cells.len() != mesh.cells().len() {
            return Err(MaError::Shape("atom or cell array does not match the mesh".into()));
        }
        if let Some(i) = atoms.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(MaError::Domain(format!("atom mass at node {i} is {}", atoms[i])));
        }
        if let Some(k) = cells.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(MaError::Domain(format!("cell mass at cell {k} is {}", cells[k])));
        }
        Ok(DiscreteMeasure { mesh, atoms, cells })
    }

    pub fn zero(mesh: Arc<Mesh>) -> Self {
        let (n, c) = (mesh.len(), mesh.cells().len());
        DiscreteMeasure {
            mesh,
            atoms: vec![0.0; n],
            cells: vec![0.0; c],
        }
    }

    /// Atoms given as (node, mass) pairs; repeated nodes accumulate.
    pub fn from_atoms(mesh: Arc<Mesh>, atoms: &[(usize, f64)]) -> Result<Self> {
        let mut a = vec![0.0; mesh.len()];
        for &(i, m) in atoms {
            if i >= a.len() {
                return Err(MaError::Shape(format!("atom node {i} out of range")));
            }
            a[i] += m;
        }
        let c = vec![0.0; mesh.cells().len()];
        Self::new(mesh, a, c)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn atom_list(&self) -> Vec<(usize, f64)> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(i, m)| (i, *m))
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().sum::<f64>() + self.cells.iter().sum::<f64>()
    }

    /// Mass per node after distributing each cell's mass by its lumping weights.
    pub fn lumped(&self) -> Vec<f64> {
        let mut out = self.atoms.clone();
        for (k, cell) in self.mesh.cells().iter().enumerate() {
            let m = self.cells[k];
            if m != 0.0 {
                for &(i, w) in &cell.lumping {
                    out[i] += w * m;
                }
            }
        }
        out
    }

    /// Lumped masses restricted to interior nodes (boundary entries zeroed).
    pub fn lumped_interior(&self) -> Vec<f64> {
        let mut out = self.lumped();
        for i in self.mesh.boundary_nodes() {
            out[i] = 0.0;
        }
        out
    }

    /// `∫ g(f) dν` with nodal values on atoms and cell values on cells.
    pub fn integrate(&self, f: &[f64], g: impl Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        for (i, &m) in self.atoms.iter().enumerate() {
            if m != 0.0 {
                s += m * g(f[i]);
            }
        }
        for (k, &m) in self.cells.iter().enumerate() {
            if m != 0.0 {
                s += m * g(self.mesh.cell_value(k, f));
            }
        }
        s
    }

    /// `∫ w dν` for a weight given separately on nodes and on cells.
    pub fn integrate_weight(&self, node_w: impl Fn(usize) -> f64, cell_w: impl Fn(usize) -> f64) -> f64 {
        let mut s = 0.0;
        for (i, &m) in self.atoms.iter().enumerate() {
            if m != 0.0 {
                s += m * node_w(i);
            }
        }
        for (k, &m) in self.cells.iter().enumerate() {
            if m != 0.0 {
                s += m * cell_w(k);
            }
        }
        s
    }

    pub fn scaled(&self, c: f64) -> DiscreteMeasure {
        DiscreteMeasure {
            mesh: self.mesh.clone(),
            atoms: self.atoms.iter().map(|m| c * m).collect(),
            cells: self.cells.iter().map(|m| c * m).collect(),
        }
    }

    pub fn add(&self, other: &DiscreteMeasure) -> Result<DiscreteMeasure> {
        same_mesh(&self.mesh, &other.mesh)?;
        Ok(DiscreteMeasure {
            mesh: self.mesh.clone(),
            atoms: self.atoms.iter().zip(&other.atoms).map(|(a, b)| a + b).collect(),
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| a + b).collect(),
        })
    }

    /// The measure `g(f) ν`, evaluating `g(f)` like [`DiscreteMeasure::integrate`].
    pub fn weighted(&self, f: &[f64], g: impl Fn(f64) -> f64) -> DiscreteMeasure {
        DiscreteMeasure {
            mesh: self.mesh.clone(),
            atoms: self
                .atoms
                .iter()
                .enumerate()
                .map(|(i, &m)| if m != 0.0 { m * g(f[i]) } else { 0.0 })
                .collect(),
            cells: self
                .cells
                .iter()
                .enumerate()
                .map(|(k, &m)| if m != 0.0 { m * g(self.mesh.cell_value(k, f)) } else { 0.0 })
                .collect(),
        }
    }

    /// True when atoms and cells of `self` are all `<=` those of `other` (plus `tol`).
    pub fn le_nodewise(&self, other: &DiscreteMeasure, tol: f64) -> bool {
        self.atoms.iter().zip(&other.atoms).all(|(a, b)| *a <= b + tol)
            && self.cells.iter().zip(&other.cells).all(|(a, b)| *a <= b + tol)
    }
}

/// Shape of a subgradient cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CellShape {
    /// Slopes `[left, right]` at a 1D node.
    Interval { lo: f64, hi: f64 },
    /// Radial slopes: the cell is the ball shell `inner <= |p| <= outer`.
    Shell { inner: f64, outer: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgradientCell {
    pub node: usize,
    pub shape: CellShape,
    pub volume: f64,
}

/// Monge–Ampère measure together with the clipping diagnostic of the 2D backend.
#[derive(Clone, Debug)]
pub struct MaReport {
    pub measure: DiscreteMeasure,
    pub cells: Vec<SubgradientCell>,
    /// True when some 2D cell touched the Lipschitz box.
    pub clipped: bool,
}

/// Discrete Monge–Ampère measure `μ_u(S) = |∂u(S)|`, one atom per interior node.
pub fn ma_measure(u: &ConvexFn) -> Result<DiscreteMeasure> {
    Ok(ma_measure_report(u)?.measure)
}

pub fn ma_measure_report(u: &ConvexFn) -> Result<MaReport> {
    let mesh = u.mesh.clone();
    let n = mesh.len();
    let mut atoms = vec![0.0; n];
    let mut cells = Vec::new();
    let mut clipped = false;
    match mesh.kind() {
        MeshKind::Line => {
            u.check_convexity()?;
            let s = u.slopes();
            for i in 1..n - 1 {
                let v = (s[i] - s[i - 1]).max(0.0);
                atoms[i] = v;
                cells.push(SubgradientCell {
                    node: i,
                    shape: CellShape::Interval { lo: s[i - 1], hi: s[i] },
                    volume: v,
                });
            }
        }
        MeshKind::Radial { dim } => {
            u.check_convexity()?;
            let s: Vec<f64> = u.slopes().into_iter().map(|v| v.max(0.0)).collect();
            let w = unit_ball_volume(dim);
            let d = dim as i32;
            atoms[0] = w * s[0].powi(d);
            cells.push(SubgradientCell {
                node: 0,
                shape: CellShape::Shell { inner: 0.0, outer: s[0] },
                volume: atoms[0],
            });
            for i in 1..n - 1 {
                let v = (w * (s[i].powi(d) - s[i - 1].powi(d))).max(0.0);
                atoms[i] = v;
                cells.push(SubgradientCell {
                    node: i,
                    shape: CellShape::Shell {
                        inner: s[i - 1],
                        outer: s[i],
                    },
                    volume: v,
                });
            }
        }
        MeshKind::Grid { .. } => {
            let set = grid_cells(&mesh, &u.values, None);
            clipped = set.clipped;
            let range = value_range(&u.values).max(RANGE_FLOOR);
            let l = lipschitz_box(&mesh, &u.values, None);
            for i in mesh.interior_nodes() {
                let poly = &set.polys[i];
                let a = poly.area();
                if a == 0.0 {
                    let probe = node_cell(&mesh, &u.values, i, u.values[i] - CONVEXITY_TOL * range, None, l, true);
                    if probe.is_empty() {
                        return Err(MaError::Convexity {
                            nodes: vec![i],
                            defect: u.values[i] - hull_value(&mesh, &u.values, i, None, l + 1.0, 0.0),
                        });
                    }
                }
                atoms[i] = a;
                cells.push(SubgradientCell {
                    node: i,
                    shape: CellShape::Polygon {
                        vertices: poly.verts.clone(),
                    },
                    volume: a,
                });
            }
        }
    }
    let nc = mesh.cells().len();
    Ok(MaReport {
        measure: DiscreteMeasure {
            mesh,
            atoms,
            cells: vec![0.0; nc],
        },
        cells,
        clipped,
    })
}

/// Mixed measure together with the total magnitude of clamped round-off.
#[derive(Clone, Debug)]
pub struct MixedMeasure {
    pub measure: DiscreteMeasure,
    pub clamped: f64,
}

/// Mixed Monge–Ampère measure of `n` functions by polarization.
pub fn mixed_ma_measure(us: &[ConvexFn]) -> Result<MixedMeasure> {
    let first = us.first().ok_or_else(|| MaError::Shape("no functions given".into()))?;
    let mesh = first.mesh.clone();
    let n = mesh.dim();
    if us.len() != n {
        return Err(MaError::Shape(format!("expected {n} functions, got {}", us.len())));
    }
    for u in us {
        same_mesh(&mesh, &u.mesh)?;
    }
    let mut acc = vec![0.0; mesh.len()];
    let mut scale: f64 = 0.0;
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    for subset in 1u32..(1u32 << n) {
        let k = subset.count_ones() as usize;
        let mut vals = vec![0.0; mesh.len()];
        for (j, u) in us.iter().enumerate() {
            if subset & (1 << j) != 0 {
                for (v, x) in vals.iter_mut().zip(&u.values) {
                    *v += x;
                }
            }
        }
        let sum = ConvexFn::new_unchecked(mesh.clone(), vals)?;
        let mu = ma_measure(&sum)?;
        scale = scale.max(mu.total() / fact);
        let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
        for (a, m) in acc.iter_mut().zip(mu.atoms()) {
            *a += sign * m / fact;
        }
    }
    let total: f64 = acc.iter().filter(|v| **v > 0.0).sum::<f64>().max(scale);
    let floor = POLARIZATION_TOL * total.max(f64::MIN_POSITIVE);
    let mut clamped = 0.0;
    for (i, a) in acc.iter_mut().enumerate() {
        if *a < 0.0 {
            if -*a > floor {
                return Err(MaError::NegativeMixed { node: i, value: *a });
            }
            clamped += -*a;
            *a = 0.0;
        }
    }
    let nc = mesh.cells().len();
    Ok(MixedMeasure {
        measure: DiscreteMeasure {
            mesh,
            atoms: acc,
            cells: vec![0.0; nc],
        },
        clamped,
    })
}

fn require_zero_boundary(u: &ConvexFn) -> Result<()> {
    if !u.has_zero_boundary() {
        let worst = u.boundary_trace().iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        return Err(MaError::Contract(format!("boundary trace must vanish (max |u| = {worst:.3e})")));
    }
    Ok(())
}

/// Monge–Ampère energy `∫ |u| dμ_u` of a function with zero boundary trace.
pub fn energy(u: &ConvexFn) -> Result<f64> {
    require_zero_boundary(u)?;
    let mu = ma_measure(u)?;
    Ok(mu.integrate(&u.values, f64::abs))
}

/// Mixed energy `∫ (-u0) dμ_n[u1, ..., un]`.
pub fn mixed_energy(u0: &ConvexFn, us: &[ConvexFn]) -> Result<f64> {
    require_zero_boundary(u0)?;
    for u in us {
        require_zero_boundary(u)?;
        same_mesh(&u0.mesh, &u.mesh)?;
    }
    let mu = mixed_ma_measure(us)?;
    Ok(mu.measure.integrate(&u0.values, |v| -v))
}

/// Lower convex envelope of nodal values.
pub fn convex_envelope(mesh: &Arc<Mesh>, f: &[f64]) -> Result<ConvexFn> {
    if f.len() != mesh.len() {
        return Err(MaError::Shape(format!("{} values for {} nodes", f.len(), mesh.len())));
    }
    if let Some(i) = f.iter().position(|v| !v.is_finite()) {
        return Err(MaError::Domain(format!("non-finite value at node {i}")));
    }
    let values = match mesh.kind() {
        MeshKind::Line => {
            let xs: Vec<f64> = (0..mesh.len()).map(|i| mesh.point(i)[0]).collect();
            lower_hull_eval(&xs, f)
        }
        MeshKind::Radial { .. } => {
            let n = mesh.len();
            let mut xs = Vec::with_capacity(2 * n - 1);
            let mut ys = Vec::with_capacity(2 * n - 1);
            for i in (1..n).rev() {
                xs.push(-mesh.point(i)[0]);
                ys.push(f[i]);
            }
            for i in 0..n {
                xs.push(mesh.point(i)[0]);
                ys.push(f[i]);
            }
            let env = lower_hull_eval(&xs, &ys);
            env[n - 1..].to_vec()
        }
        MeshKind::Grid { .. } => envelope_grid(mesh, f),
    };
    Ok(ConvexFn {
        mesh: mesh.clone(),
        values,
    })
}

/// Lower convex hull of points `(xs, ys)` (xs strictly increasing), evaluated at xs.
pub(crate) fn lower_hull_eval(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; xs.len()];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        out[a] = ys[a];
        for (j, o) in out.iter_mut().enumerate().take(b).skip(a + 1) {
            let t = (xs[j] - xs[a]) / (xs[b] - xs[a]);
            *o = (ys[a] + t * (ys[b] - ys[a])).min(ys[j]);
        }
        out[b] = ys[b];
    }
    if hull.len() == 1 {
        out[hull[0]] = ys[hull[0]];
    }
    out
}

/// Boundary values after taking the lower hull along each polygon edge.
pub(crate) fn boundary_envelope(mesh: &Arc<Mesh>, f: &[f64]) -> Vec<f64> {
    let mut out = f.to_vec();
    // Boundary nodes on a polygon edge only see the other nodes on that edge.
    if let ConvexDomain::Polygon { vertices } = mesh.domain() {
        let tol = 1e-9 * mesh.domain().diameter();
        let m = vertices.len();
        for e in 0..m {
            let (p, q) = (vertices[e], vertices[(e + 1) % m]);
            let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
            let mut on_edge: Vec<(f64, usize)> = mesh
                .boundary_nodes()
                .filter_map(|i| {
                    let x = mesh.point(i);
                    let t = ((x[0] - p[0]) * (q[0] - p[0]) + (x[1] - p[1]) * (q[1] - p[1])) / len;
                    let d = ((x[0] - p[0]) * (q[1] - p[1]) - (x[1] - p[1]) * (q[0] - p[0])).abs() / len;
                    (d <= tol && t >= -tol && t <= len + tol).then_some((t, i))
                })
                .collect();
            on_edge.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let ts: Vec<f64> = on_edge.iter().map(|x| x.0).collect();
            let ys: Vec<f64> = on_edge.iter().map(|x| f[x.1]).collect();
            let env = lower_hull_eval(&ts, &ys);
            for ((_, i), v) in on_edge.iter().zip(env) {
                out[*i] = out[*i].min(v);
            }
        }
    }
    out
}

fn envelope_grid(mesh: &Arc<Mesh>, f: &[f64]) -> Vec<f64> {
    use rayon::prelude::*;
    let mut out = boundary_envelope(mesh, f);
    let boundary_env = out.clone();
    let range = value_range(f).max(RANGE_FLOOR);
    let l = lipschitz_box(mesh, f, None) + 2.0 / mesh.clearance().max(1e-300);
    let interior: Vec<(usize, f64)> = mesh
        .interior_nodes()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| (i, hull_value(mesh, &boundary_env, i, None, l, 0.1 * CONVEXITY_TOL * range)))
        .collect();
    for (i, v) in interior {
        out[i] = v;
    }
    out
}

/// Splits a compactly supported nodal function into a difference of two convex
/// functions with zero boundary values: `φ = φ1 − φ2`.
pub fn lipschitz_decompose(mesh: &Arc<Mesh>, phi: &[f64], collar: f64) -> Result<(ConvexFn, ConvexFn)> {
    if phi.len() != mesh.len() {
        return Err(MaError::Shape("φ does not match the mesh".into()));
    }
    for i in 0..mesh.len() {
        if mesh.node_dist(i) <= collar && phi[i] != 0.0 {
            return Err(MaError::Precondition(format!(
                "φ must vanish within distance {collar} of the boundary (node {i})"
            )));
        }
    }
    let c = mesh.domain().center();
    let r2: Vec<f64> = (0..mesh.len())
        .map(|i| match mesh.kind() {
            MeshKind::Radial { .. } => mesh.point(i)[0].powi(2),
            _ => mesh.embed(i).iter().zip(&c).map(|(x, y)| (x - y).powi(2)).sum(),
        })
        .collect();
    let cone: Vec<f64> = (0..mesh.len())
        .map(|i| match (mesh.kind(), mesh.domain()) {
            (MeshKind::Radial { .. }, ConvexDomain::Ball { radius, .. }) => mesh.point(i)[0] / radius - 1.0,
            _ => mesh.domain().gauge(&c, &mesh.embed(i)) - 1.0,
        })
        .collect();

    let shifted = |c0: f64| -> Vec<f64> { phi.iter().zip(&r2).map(|(p, r)| p + c0 * r).collect() };
    let is_convex = |vals: Vec<f64>| ConvexFn::new(mesh.clone(), vals).is_ok();
    let mut c0 = match mesh.kind() {
        MeshKind::Line => {
            let mut need: f64 = 0.0;
            for i in 1..mesh.len() - 1 {
                let (x0, x1, x2) = (mesh.point(i - 1)[0], mesh.point(i)[0], mesh.point(i + 1)[0]);
                let jump = (phi[i + 1] - phi[i]) / (x2 - x1) - (phi[i] - phi[i - 1]) / (x1 - x0);
                need = need.max(-jump / (x2 - x0));
            }
            need * (1.0 + 1e-9) + 1e-12
        }
        _ => 1.0,
    };
    let mut tries = 0;
    while !is_convex(shifted(c0)) {
        c0 = if c0 == 0.0 { 1.0 } else { 2.0 * c0 };
        tries += 1;
        if tries > 80 {
            return Err(MaError::Degenerate("no quadratic shift makes φ convex".into()));
        }
    }
    let c1 = phi
        .iter()
        .zip(&r2)
        .map(|(p, r)| p.abs() + c0 * r)
        .fold(0.0, f64::max)
        + 1.0;
    let min_cone = phi
        .iter()
        .zip(&cone)
        .filter(|(p, _)| **p != 0.0)
        .map(|(_, v)| v.abs())
        .fold(f64::INFINITY, f64::min);
    let c2 = if min_cone.is_finite() { 2.2 * c1 / min_cone } else { 2.2 * c1 };
    let phi2: Vec<f64> = r2
        .iter()
        .zip(&cone)
        .map(|(r, v)| (c0 * r - c1).max(c2 * v))
        .collect();
    let phi1: Vec<f64> = phi
        .iter()
        .zip(r2.iter().zip(&cone))
        .map(|(p, (r, v))| (p + c0 * r - c1).max(c2 * v))
        .collect();
    let mut f1 = ConvexFn::new(mesh.clone(), phi1)?;
    let mut f2 = ConvexFn::new(mesh.clone(), phi2)?;
    for i in mesh.boundary_nodes() {
        f1.values[i] = 0.0;
        f2.values[i] = 0.0;
    }
    Ok((f1, f2))
}

/// Rebins a measure onto the dyadic subcells of level `m` of the domain's bounding
/// cube (dyadic radius shells for radial meshes), uniform within each subcell.
pub fn canonical_approximation(nu: &DiscreteMeasure, m: i64) -> Result<DiscreteMeasure> {
    if m < 0 {
        return Err(MaError::Parameter(format!("level m must be >= 0, got {m}")));
    }
    if m > 12 {
        return Err(MaError::Parameter(format!("level m = {m} is too fine")));
    }
    let mesh = nu.mesh.clone();
    let nb = 1usize << m;
    let cells = mesh.cells();
    match mesh.kind() {
        MeshKind::Line | MeshKind::Radial { .. } => {
            let (lo, hi) = match mesh.domain() {
                ConvexDomain::Interval { a, b } => (*a, *b),
                ConvexDomain::Ball { radius, .. } => (0.0, *radius),
                _ => unreachable!(),
            };
            let w = (hi - lo) / nb as f64;
            let vol = |a: f64, b: f64| -> f64 {
                match mesh.kind() {
                    MeshKind::Radial { dim } => b.powi(dim as i32) - a.powi(dim as i32),
                    _ => b - a,
                }
            };
            let bin_of = |x: f64| (((x - lo) / w).floor().max(0.0) as usize).min(nb - 1);
            let mut overlaps: Vec<Vec<(usize, f64)>> = Vec::with_capacity(cells.len());
            for c in cells {
                let (x0, x1) = (mesh.point(c.nodes[0])[0], mesh.point(c.nodes[1])[0]);
                let total = vol(x0, x1);
                let mut ov = Vec::new();
                for b in bin_of(x0)..=bin_of(x1) {
                    let (b0, b1) = (lo + b as f64 * w, lo + (b + 1) as f64 * w);
                    let (s, e) = (x0.max(b0), x1.min(b1));
                    if e > s {
                        ov.push((b, vol(s, e) / total));
                    }
                }
                overlaps.push(ov);
            }
            let mut bin_mass = vec![0.0; nb];
            for (i, &a) in nu.atoms.iter().enumerate() {
                if a != 0.0 {
                    bin_mass[bin_of(mesh.point(i)[0])] += a;
                }
            }
            redistribute(nu, &overlaps, &mut bin_mass, cells.iter().map(|c| c.volume).collect())
        }
        MeshKind::Grid { .. } => {
            let (lo, hi) = mesh.domain().bounding_box();
            let side = (hi[0] - lo[0]).max(hi[1] - lo[1]);
            let w = side / nb as f64;
            let bin_of = |x: [f64; 2]| {
                let bx = (((x[0] - lo[0]) / w).floor().max(0.0) as usize).min(nb - 1);
                let by = (((x[1] - lo[1]) / w).floor().max(0.0) as usize).min(nb - 1);
                by * nb + bx
            };
            let mut overlaps: Vec<Vec<(usize, f64)>> = Vec::with_capacity(cells.len());
            for c in cells {
                let poly = c.polygon.as_ref().expect("grid cells carry polygons");
                let (mut pmin, mut pmax) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
                for v in poly {
                    for k in 0..2 {
                        pmin[k] = pmin[k].min(v[k]);
                        pmax[k] = pmax[k].max(v[k]);
                    }
                }
                let (b0, b1) = (bin_of(pmin), bin_of(pmax));
                let (x0, y0, x1, y1) = (b0 % nb, b0 / nb, b1 % nb, b1 / nb);
                let mut ov = Vec::new();
                for by in y0..=y1 {
                    for bx in x0..=x1 {
                        let (l0, l1) = (lo[0] + bx as f64 * w, lo[0] + (bx + 1) as f64 * w);
                        let (m0, m1) = (lo[1] + by as f64 * w, lo[1] + (by + 1) as f64 * w);
                        let mut q = clip_halfplane(poly, [1.0, 0.0], l1);
                        q = clip_halfplane(&q, [-1.0, 0.0], -l0);
                        q = clip_halfplane(&q, [0.0, 1.0], m1);
                        q = clip_halfplane(&q, [0.0, -1.0], -m0);
                        let a = polygon_area(&q);
                        if a > 0.0 {
                            ov.push((by * nb + bx, a / c.volume));
                        }
                    }
                }
                overlaps.push(ov);
            }
            let mut bin_mass = vec![0.0; nb * nb];
            for (i, &a) in nu.atoms.iter().enumerate() {
                if a != 0.0 {
                    bin_mass[bin_of(mesh.point(i))] += a;
                }
            }
            redistribute(nu, &overlaps, &mut bin_mass, cells.iter().map(|c| c.volume).collect())
        }
    }
}

fn redistribute(
    nu: &DiscreteMeasure,
    overlaps: &[Vec<(usize, f64)>],
    bin_mass: &mut [f64],
    volumes: Vec<f64>,
) -> Result<DiscreteMeasure> {
    let mesh = nu.mesh.clone();
    for (k, ov) in overlaps.iter().enumerate() {
        for &(b, frac) in ov {
            bin_mass[b] += nu.cells[k] * frac;
        }
    }
    let mut cover = vec![0.0; bin_mass.len()];
    for (k, ov) in overlaps.iter().enumerate() {
        for &(b, frac) in ov {
            cover[b] += frac * volumes[k];
        }
    }
    let mut cells = vec![0.0; volumes.len()];
    let mut atoms = vec![0.0; mesh.len()];
    for (k, ov) in overlaps.iter().enumerate() {
        for &(b, frac) in ov {
            if cover[b] > 0.0 {
                cells[k] += bin_mass[b] * frac * volumes[k] / cover[b];
            }
        }
    }
    // bins with mass but no cell coverage keep their atoms in place
    for (i, &a) in nu.atoms.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let p = mesh.point(i);
        let b = match mesh.kind() {
            MeshKind::Grid { .. } => {
                let (lo, hi) = mesh.domain().bounding_box();
                let nb = (bin_mass.len() as f64).sqrt().round() as usize;
                let w = (hi[0] - lo[0]).max(hi[1] - lo[1]) / nb as f64;
                let bx = (((p[0] - lo[0]) / w).floor().max(0.0) as usize).min(nb - 1);
                let by = (((p[1] - lo[1]) / w).floor().max(0.0) as usize).min(nb - 1);
                by * nb + bx
            }
            _ => {
                let (lo, hi) = match mesh.domain() {
                    ConvexDomain::Interval { a, b } => (*a, *b),
                    ConvexDomain::Ball { radius, .. } => (0.0, *radius),
                    _ => unreachable!(),
                };
                let nb = bin_mass.len();
                let w = (hi - lo) / nb as f64;
                (((p[0] - lo) / w).floor().max(0.0) as usize).min(nb - 1)
            }
        };
        if cover[b] == 0.0 {
            atoms[i] += a;
        }
    }
    DiscreteMeasure::new(mesh, atoms, cells)
}

#[cfg(test)]
mod tests;
