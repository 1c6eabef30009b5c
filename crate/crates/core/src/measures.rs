//! Construction, truncation and weighted-integrability diagnostics of Borel
//! measures on a mesh.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convex_core::{ma_measure, same_mesh, ConvexFn, DiscreteMeasure};
use crate::error::{MaError, Result};
use crate::geometry::{unit_ball_volume, ConvexDomain, Mesh, MeshKind};

/// Nodes of `|v|` below this are singular for `from_convex`.
pub const SINGULAR_FLOOR: f64 = 1e-14;

/// Successive dyadic shell ratios above this value count as non-decaying.
pub fn divergence_ratio() -> f64 {
    2f64.powf(-0.15)
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// `∫_a^b f` by five-point Gauss–Legendre.
pub fn gauss5(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    GAUSS5.iter().map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// A real function of a point, shared between threads.
#[derive(Clone)]
pub struct Profile {
    name: String,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl Profile {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Profile {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({})", self.name)
    }
}

/// Generator of a measure, realized on any mesh of its domain.
#[derive(Clone, Debug)]
pub enum MeasureSpec {
    Lebesgue,
    /// Density `f(r)` of the distance `r` to the domain center.
    RadialDensity(Profile),
    /// Density given on points (radial meshes pass `[r]`).
    Density(Profile),
    /// Density `ρ^{-s}` with `ρ` the boundary-defining function of the domain
    /// (`1 - x²` on `(-1, 1)`), comparable to `dist^{-s}`.
    Hardy { s: f64 },
    /// `|v|^{-q} μ_v` for the convex profile `v`.
    FromConvex { v: Profile, q: f64 },
    /// Point masses at the nodes nearest to the given points.
    Atoms(Vec<(Vec<f64>, f64)>),
    Custom(DiscreteMeasure),
}

impl MeasureSpec {
    pub fn hardy(s: f64) -> Self {
        MeasureSpec::Hardy { s }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::Hardy { s } if !s.is_finite() => Err(MaError::Parameter("hardy exponent must be finite".into())),
            MeasureSpec::FromConvex { q, .. } if !(q.is_finite() && *q >= 0.0) => {
                Err(MaError::Parameter(format!("from_convex exponent q must be >= 0, got {q}")))
            }
            MeasureSpec::Atoms(list) if list.iter().any(|(_, m)| !(m.is_finite() && *m >= 0.0)) => {
                Err(MaError::Parameter("atom masses must be finite and nonnegative".into()))
            }
            _ => Ok(()),
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            MeasureSpec::Lebesgue => "lebesgue".into(),
            MeasureSpec::RadialDensity(p) => format!("radial_density:{}", p.name()),
            MeasureSpec::Density(p) => format!("density:{}", p.name()),
            MeasureSpec::Hardy { s } => format!("hardy:s={s}"),
            MeasureSpec::FromConvex { v, q } => format!("from_convex:{}:q={q}", v.name()),
            MeasureSpec::Atoms(a) => format!("atoms:{}", a.len()),
            MeasureSpec::Custom(_) => "custom".into(),
        }
    }

    fn density<'a>(&'a self, mesh: &'a Mesh) -> Option<Box<dyn Fn([f64; 2]) -> f64 + 'a>> {
        let center = mesh.domain().center();
        let radial = matches!(mesh.kind(), MeshKind::Radial { .. });
        match self {
            MeasureSpec::Lebesgue => Some(Box::new(|_| 1.0)),
            MeasureSpec::Hardy { s } => {
                let s = *s;
                Some(Box::new(move |p| mesh.defining_of(p).powf(-s)))
            }
            MeasureSpec::RadialDensity(f) => Some(Box::new(move |p| {
                let r = if radial {
                    p[0]
                } else {
                    let x = coords(mesh, p);
                    x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
                };
                f.eval(&[r])
            })),
            MeasureSpec::Density(f) => Some(Box::new(move |p| f.eval(&coords(mesh, p)))),
            _ => None,
        }
    }
}

fn coords(mesh: &Mesh, p: [f64; 2]) -> Vec<f64> {
    match mesh.kind() {
        MeshKind::Grid { .. } => vec![p[0], p[1]],
        _ => vec![p[0]],
    }
}

/// Realizes a measure on a mesh. Densities are integrated per cell (Gauss on
/// intervals and shells, owner value times area on grid cells).
pub fn realize(spec: &MeasureSpec, mesh: &Arc<Mesh>) -> Result<DiscreteMeasure> {
    realize_beyond(spec, mesh, 0.0)
}

/// Realizes `χ_{dist > 1/m} ν` directly from the generator, integrating
/// densities only over the part of each cell beyond the cutoff.
pub fn realize_truncated(spec: &MeasureSpec, mesh: &Arc<Mesh>, m: u64) -> Result<DiscreteMeasure> {
    if m == 0 {
        return Err(MaError::Parameter("truncation level m must be >= 1".into()));
    }
    realize_beyond(spec, mesh, 1.0 / m as f64)
}

fn realize_beyond(spec: &MeasureSpec, mesh: &Arc<Mesh>, t: f64) -> Result<DiscreteMeasure> {
    spec.validate()?;
    if let Some(rho) = spec.density(mesh) {
        let cells = integrate_cells(mesh, t, &*rho)?;
        return DiscreteMeasure::new(mesh.clone(), vec![0.0; mesh.len()], cells);
    }
    let nu = match spec {
        MeasureSpec::FromConvex { v, q } => {
            let vals: Vec<f64> = (0..mesh.len()).map(|i| v.eval(mesh.node(i))).collect();
            let v = ConvexFn::new(mesh.clone(), vals)?;
            from_convex(&v, *q)?
        }
        MeasureSpec::Atoms(list) => {
            let mut atoms = Vec::with_capacity(list.len());
            for (x, m) in list {
                atoms.push((nearest_interior(mesh, x)?, *m));
            }
            DiscreteMeasure::from_atoms(mesh.clone(), &atoms)?
        }
        MeasureSpec::Custom(nu) => {
            same_mesh(mesh, nu.mesh())?;
            nu.clone()
        }
        _ => unreachable!(),
    };
    Ok(if t > 0.0 { truncate_at(&nu, t) } else { nu })
}

fn integrate_cells(mesh: &Mesh, t: f64, rho: &dyn Fn([f64; 2]) -> f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(mesh.cells().len());
    for (k, cell) in mesh.cells().iter().enumerate() {
        let mass = match (mesh.kind(), mesh.domain()) {
            (MeshKind::Line, ConvexDomain::Interval { a, b }) => {
                let x0 = mesh.node(cell.nodes[0])[0].max(a + t);
                let x1 = mesh.node(cell.nodes[1])[0].min(b - t);
                gauss5(x0, x1, |x| rho([x, 0.0]))
            }
            (MeshKind::Radial { dim }, ConvexDomain::Ball { radius, .. }) => {
                let r0 = mesh.node(cell.nodes[0])[0];
                let r1 = mesh.node(cell.nodes[1])[0].min(radius - t);
                let c = dim as f64 * unit_ball_volume(dim);
                gauss5(r0, r1, |r| c * r.powi(dim as i32 - 1) * rho([r, 0.0]))
            }
            _ => cell.volume * mesh.cell_fraction_beyond(k, t) * rho(cell.midpoint),
        };
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(MaError::Domain(format!("density is not integrable on cell {k} (mass {mass})")));
        }
        out.push(mass);
    }
    Ok(out)
}

fn nearest_interior(mesh: &Mesh, x: &[f64]) -> Result<usize> {
    let mut best = None;
    let mut bd = f64::INFINITY;
    for i in mesh.interior_nodes() {
        let d: f64 = mesh.node(i).iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
        if d < bd {
            bd = d;
            best = Some(i);
        }
    }
    best.ok_or_else(|| MaError::InvalidMesh("mesh has no interior nodes".into()))
}

/// `|v|^{-q} μ_v`; boundary nodes carry no mass.
pub fn from_convex(v: &ConvexFn, q: f64) -> Result<DiscreteMeasure> {
    let mu = ma_measure(v)?;
    let mesh = v.mesh().clone();
    let mut atoms = mu.atoms().to_vec();
    for (i, a) in atoms.iter_mut().enumerate() {
        if mesh.is_boundary(i) || *a == 0.0 {
            *a = 0.0;
            continue;
        }
        let x = v.value(i).abs();
        if q > 0.0 && x < SINGULAR_FLOOR {
            return Err(MaError::Singularity { node: i, value: x });
        }
        *a /= x.powf(q);
    }
    DiscreteMeasure::new(mesh, atoms, mu.cells().to_vec())
}

/// `χ_{dist > 1/m} ν`: atoms at nodes with `dist ≤ 1/m` are dropped and each cell
/// keeps the fraction of its volume lying beyond `1/m`.
pub fn truncate(nu: &DiscreteMeasure, m: u64) -> Result<DiscreteMeasure> {
    if m == 0 {
        return Err(MaError::Parameter("truncation level m must be >= 1".into()));
    }
    Ok(truncate_at(nu, 1.0 / m as f64))
}

fn truncate_at(nu: &DiscreteMeasure, t: f64) -> DiscreteMeasure {
    let mesh = nu.mesh().clone();
    let atoms = nu
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, &a)| if mesh.node_dist(i) > t { a } else { 0.0 })
        .collect();
    let cells = nu
        .cells()
        .iter()
        .enumerate()
        .map(|(k, &c)| if c == 0.0 { 0.0 } else { c * mesh.cell_fraction_beyond(k, t) })
        .collect();
    DiscreteMeasure::new(mesh, atoms, cells).expect("truncation keeps masses valid")
}

/// Result of a weighted-mass computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightedMass {
    Finite { value: f64 },
    Infinite { partial: f64 },
}

impl WeightedMass {
    pub fn is_finite(&self) -> bool {
        matches!(self, WeightedMass::Finite { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            WeightedMass::Finite { value } => Some(*value),
            WeightedMass::Infinite { .. } => None,
        }
    }
}

impl fmt::Display for WeightedMass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightedMass::Finite { value } => write!(f, "{value}"),
            WeightedMass::Infinite { .. } => write!(f, "INFINITE"),
        }
    }
}

/// Boundary weight used by weighted masses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    /// `dist(·, ∂Ω)`.
    Dist,
    /// The boundary-defining function (`1 - x²` on `(-1, 1)`).
    Defining,
}

fn weight_at(mesh: &Mesh, weight: Weight, p: [f64; 2]) -> f64 {
    match weight {
        Weight::Dist => mesh.dist_at(p),
        Weight::Defining => mesh.defining_of(p).max(0.0),
    }
}

/// `∫ w^β dν` with `w` averaged over each cell, atoms taking nodal weights.
pub fn weighted_sum(nu: &DiscreteMeasure, beta: f64, weight: Weight) -> f64 {
    let mesh = nu.mesh();
    let wb = |p: [f64; 2]| {
        let w = weight_at(mesh, weight, p);
        if beta == 0.0 {
            1.0
        } else {
            w.powf(beta)
        }
    };
    nu.integrate_weight(|i| wb(mesh.point(i)), |k| cell_average(mesh, k, &wb))
}

fn cell_average(mesh: &Mesh, k: usize, g: &dyn Fn([f64; 2]) -> f64) -> f64 {
    let cell = &mesh.cells()[k];
    match mesh.kind() {
        MeshKind::Line => {
            let (x0, x1) = (mesh.node(cell.nodes[0])[0], mesh.node(cell.nodes[1])[0]);
            gauss5(x0, x1, |x| g([x, 0.0])) / (x1 - x0)
        }
        MeshKind::Radial { dim } => {
            let (r0, r1) = (mesh.node(cell.nodes[0])[0], mesh.node(cell.nodes[1])[0]);
            let c = dim as f64 * unit_ball_volume(dim);
            gauss5(r0, r1, |r| c * r.powi(dim as i32 - 1) * g([r, 0.0])) / cell.volume
        }
        MeshKind::Grid { .. } => g(cell.midpoint),
    }
}

/// `∫ dist^β dν` with a divergence test on dyadic boundary collars.
///
/// The collar shells `{w/2 < dist ≤ w}` for `w = 1/8, 1/16, …` are summed while
/// they stay resolved by the mesh; when the last two shell-to-shell ratios both
/// exceed [`divergence_ratio`] the collar masses are not decaying geometrically
/// and the integral is reported as infinite.
pub fn weighted_mass(nu: &DiscreteMeasure, beta: f64) -> Result<WeightedMass> {
    weighted_mass_with(nu, beta, Weight::Dist)
}

pub fn weighted_mass_with(nu: &DiscreteMeasure, beta: f64, weight: Weight) -> Result<WeightedMass> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(MaError::Parameter(format!("β must be >= 0, got {beta}")));
    }
    let total = weighted_sum(nu, beta, weight);
    let shells = collar_shells(nu, beta, weight);
    if diverging(&shells) {
        return Ok(WeightedMass::Infinite { partial: total });
    }
    Ok(WeightedMass::Finite { value: total })
}

fn collar_shells(nu: &DiscreteMeasure, beta: f64, weight: Weight) -> Vec<f64> {
    let mesh = nu.mesh();
    let h = mesh.spacing();
    let mut out = Vec::new();
    let mut w = 0.125;
    while w / 2.0 >= 2.0 * h {
        let (lo, hi) = (w / 2.0, w);
        let mut s = 0.0;
        for (i, &a) in nu.atoms().iter().enumerate() {
            let d = mesh.node_dist(i);
            if a != 0.0 && d > lo && d <= hi {
                s += a * weight_at(mesh, weight, mesh.point(i)).powf(beta);
            }
        }
        for (k, &c) in nu.cells().iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let share = shell_share(mesh, k, lo, hi);
            if share > 0.0 {
                s += share * c * weight_at(mesh, weight, mesh.cells()[k].midpoint).powf(beta);
            }
        }
        out.push(s);
        w /= 2.0;
    }
    out
}

/// Fraction of cell `k` lying in the shell `lo < dist <= hi`.
fn shell_share(mesh: &Mesh, k: usize, lo: f64, hi: f64) -> f64 {
    let cell = &mesh.cells()[k];
    match mesh.kind() {
        MeshKind::Line | MeshKind::Radial { .. } => {
            let (a, b) = (mesh.node_dist(cell.nodes[0]), mesh.node_dist(cell.nodes[1]));
            let (a, b) = (a.min(b), a.max(b));
            if b - a <= 0.0 {
                return f64::from(u8::from(a > lo && a <= hi));
            }
            ((b.min(hi) - a.max(lo)) / (b - a)).max(0.0)
        }
        MeshKind::Grid { .. } => {
            let d = mesh.cell_dist(k);
            f64::from(u8::from(d > lo && d <= hi))
        }
    }
}

fn diverging(shells: &[f64]) -> bool {
    let n = shells.len();
    if n < 3 {
        return false;
    }
    let r = divergence_ratio();
    let ratio = |a: f64, b: f64| if a > 0.0 { b / a } else if b > 0.0 { f64::INFINITY } else { 0.0 };
    ratio(shells[n - 3], shells[n - 2]) > r && ratio(shells[n - 2], shells[n - 1]) > r
}

/// Weighted mass of a generator on three boundary-refined meshes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RefinedMass {
    pub result: WeightedMass,
    /// Quadrature values on the base mesh and its two refinements.
    pub levels: [f64; 3],
    /// Ratio of the second to the first increment.
    pub ratio: f64,
}

/// `∫ w^β dν` for a generator, realized on `n_cells`, `2 n_cells` and `4 n_cells`
/// cells of a line or radial mesh. Geometric increments with ratio above
/// [`divergence_ratio`] mean the integral grows without bound under boundary
/// refinement; otherwise the value is extrapolated from the geometric tail.
pub fn weighted_mass_refined(
    spec: &MeasureSpec,
    domain: &ConvexDomain,
    n_cells: usize,
    beta: f64,
    weight: Weight,
) -> Result<RefinedMass> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(MaError::Parameter(format!("β must be >= 0, got {beta}")));
    }
    let mut levels = [0.0; 3];
    for (l, v) in levels.iter_mut().enumerate() {
        let nodes = (n_cells << l) + 1;
        let mesh = Arc::new(match domain {
            ConvexDomain::Interval { .. } => Mesh::line(domain, nodes)?,
            ConvexDomain::Ball { .. } => Mesh::radial(domain, nodes)?,
            ConvexDomain::Polygon { .. } => {
                return Err(MaError::Unsupported("refined weighted mass needs an interval or ball".into()))
            }
        });
        *v = weighted_sum(&realize(spec, &mesh)?, beta, weight);
        if !v.is_finite() {
            return Ok(RefinedMass {
                result: WeightedMass::Infinite { partial: *v },
                levels,
                ratio: f64::INFINITY,
            });
        }
    }
    let (d1, d2) = (levels[1] - levels[0], levels[2] - levels[1]);
    let scale = levels[2].abs().max(f64::MIN_POSITIVE);
    let noise = 4.0 * f64::EPSILON * (n_cells << 2) as f64 * scale;
    if d2.abs() <= noise {
        return Ok(RefinedMass {
            result: WeightedMass::Finite { value: levels[2] },
            levels,
            ratio: 0.0,
        });
    }
    let ratio = if d1 != 0.0 { d2 / d1 } else { f64::INFINITY };
    let result = if ratio.abs() > divergence_ratio() {
        WeightedMass::Infinite { partial: levels[2] }
    } else {
        WeightedMass::Finite {
            value: levels[2] + d2 * ratio / (1.0 - ratio),
        }
    };
    Ok(RefinedMass { result, levels, ratio })
}

/// `(∫ |u|^p dν)^{1/p}`.
pub fn lp_norm(u: &ConvexFn, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    same_mesh(u.mesh(), nu.mesh())?;
    if !(p >= 1.0) {
        return Err(MaError::Parameter(format!("p must be >= 1, got {p}")));
    }
    Ok(lp_power(u, nu, p).powf(1.0 / p))
}

/// `∫ |u|^p dν` without the root.
pub fn lp_power(u: &ConvexFn, nu: &DiscreteMeasure, p: f64) -> f64 {
    nu.integrate(u.values(), |v| v.abs().powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn interval() -> ConvexDomain {
        ConvexDomain::interval(-1.0, 1.0).unwrap()
    }

    fn line(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::line(&interval(), n).unwrap())
    }

    #[test]
    fn lebesgue_cells() {
        let nu = realize(&MeasureSpec::Lebesgue, &line(5)).unwrap();
        for c in nu.cells() {
            assert_relative_eq!(*c, 0.5, max_relative = 1e-15);
        }
    }

    #[test]
    fn hardy_truncated_mass() {
        let exact = 2.0 * (0.5 / 0.75 / 2.0 + 0.5 * (3.0f64).ln() / 2.0);
        let nu = realize_truncated(&MeasureSpec::hardy(2.0), &line(801), 2).unwrap();
        assert_relative_eq!(nu.total(), exact, max_relative = 1e-10);
        assert_relative_eq!(exact, 1.21597, max_relative = 1e-5);
        let full = realize(&MeasureSpec::hardy(2.0), &line(801)).unwrap();
        let cut = truncate(&full, 2).unwrap();
        assert_relative_eq!(cut.total(), exact, max_relative = 1e-6);
    }

    #[test]
    fn truncation_is_monotone() {
        let nu = realize(&MeasureSpec::hardy(1.5), &line(101)).unwrap();
        let a = truncate(&nu, 3).unwrap();
        let b = truncate(&nu, 7).unwrap();
        assert!(a.le_nodewise(&b, 0.0));
    }

    #[test]
    fn lebesgue_weighted_mass_is_one() {
        let nu = realize(&MeasureSpec::Lebesgue, &line(101)).unwrap();
        let w = weighted_mass(&nu, 1.0).unwrap();
        assert_relative_eq!(w.value().unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn hardy_two_is_infinite() {
        let nu = realize(&MeasureSpec::hardy(2.0), &line(4001)).unwrap();
        assert!(!weighted_mass(&nu, 1.0).unwrap().is_finite());
        let nu = realize(&MeasureSpec::hardy(1.5), &line(4001)).unwrap();
        assert!(weighted_mass(&nu, 1.0).unwrap().is_finite());
    }

    #[test]
    fn atoms_weighted_exactly() {
        let m = line(11);
        let nu = DiscreteMeasure::from_atoms(m, &[(3, 2.0), (5, 1.0)]).unwrap();
        let w = weighted_mass(&nu, 2.0).unwrap().value().unwrap();
        assert_relative_eq!(w, 2.0 * 0.6f64.powi(2) + 1.0, max_relative = 1e-12);
    }

    #[test]
    fn lp_norm_examples() {
        let m = line(3);
        let cone = ConvexFn::new(m.clone(), vec![0.0, -1.0, 0.0]).unwrap();
        let nu = DiscreteMeasure::from_atoms(m.clone(), &[(1, 2.0)]).unwrap();
        assert_relative_eq!(lp_norm(&cone, &nu, 2.0).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(lp_norm(&ConvexFn::zero(m), &nu, 2.0).unwrap(), 0.0);

        let m = line(801);
        let u = ConvexFn::from_fn(m.clone(), |x| -(1.0 - x[0] * x[0]).sqrt()).unwrap();
        let nu = realize_truncated(&MeasureSpec::hardy(2.0), &m, 2).unwrap();
        let sq = lp_norm(&u, &nu, 2.0).unwrap().powi(2);
        assert_relative_eq!(sq, 2.0 * 0.5f64.atanh(), max_relative = 1e-5);
    }

    #[test]
    fn from_convex_matches_hardy() {
        let m = line(2001);
        let v = Profile::new("sqrt", |x: &[f64]| -(1.0 - x[0] * x[0]).sqrt());
        let a = realize_truncated(&MeasureSpec::FromConvex { v, q: 1.0 }, &m, 4).unwrap();
        let b = realize_truncated(&MeasureSpec::hardy(2.0), &m, 4).unwrap();
        let la = a.lumped();
        let lb = b.lumped();
        for i in 0..m.len() {
            if m.node_dist(i) > 0.26 {
                assert_relative_eq!(la[i], lb[i], max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn from_convex_rejects_zero_interior() {
        let m = line(5);
        let v = ConvexFn::new(m, vec![2.0, 1.0, 0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(from_convex(&v, 1.0), Err(MaError::Singularity { .. })));
    }

    #[test]
    fn refined_detects_divergence() {
        let d = interval();
        let r = weighted_mass_refined(&MeasureSpec::hardy(2.0), &d, 2000, 1.0, Weight::Dist).unwrap();
        assert!(!r.result.is_finite());
        let r = weighted_mass_refined(&MeasureSpec::hardy(1.5), &d, 2000, 1.0, Weight::Dist).unwrap();
        assert!(r.result.is_finite());
    }
}
