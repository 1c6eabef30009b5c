//! Convex domains, meshes and boundary-distance queries.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{MaError, Result};
use crate::polygon::{clip_halfplane, polygon_area, Poly};

/// Relative tolerance used for boundary membership tests.
const BOUNDARY_TOL: f64 = 1e-12;

/// Number of chord directions in the normalized-distance sweep.
const SWEEP_DIRECTIONS: usize = 2048;

/// Bounded convex domain in one of the three supported shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConvexDomain {
    Interval { a: f64, b: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    /// Vertices in counter-clockwise order.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl ConvexDomain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let d = ConvexDomain::Interval { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let d = ConvexDomain::Ball { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_ball(dim: usize) -> Self {
        ConvexDomain::Ball {
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let d = ConvexDomain::Polygon { vertices };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_square() -> Self {
        ConvexDomain::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexDomain::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(MaError::InvalidDomain(format!("interval needs a < b, got ({a}, {b})")));
                }
            }
            ConvexDomain::Ball { center, radius } => {
                if center.is_empty() {
                    return Err(MaError::InvalidDomain("ball center must have dimension >= 1".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(MaError::InvalidDomain(format!("ball radius must be positive, got {radius}")));
                }
            }
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(MaError::InvalidDomain(format!("polygon needs >= 3 vertices, got {n}")));
                }
                for i in 0..n {
                    let (p, q, r) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
                    let cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
                    if cross < 0.0 {
                        return Err(MaError::InvalidDomain(format!(
                            "polygon is not convex counter-clockwise at vertex {}",
                            (i + 1) % n
                        )));
                    }
                }
                if polygon_area(vertices) <= 0.0 {
                    return Err(MaError::InvalidDomain("polygon has zero area".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::Interval { .. } => 1,
            ConvexDomain::Ball { center, .. } => center.len(),
            ConvexDomain::Polygon { .. } => 2,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConvexDomain::Interval { a, b } => b - a,
            ConvexDomain::Ball { radius, .. } => 2.0 * radius,
            ConvexDomain::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for p in vertices {
                    for q in vertices {
                        d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                    }
                }
                d
            }
        }
    }

    /// Lebesgue measure of the domain.
    pub fn volume(&self) -> f64 {
        match self {
            ConvexDomain::Interval { a, b } => b - a,
            ConvexDomain::Ball { center, radius } => unit_ball_volume(center.len()) * radius.powi(center.len() as i32),
            ConvexDomain::Polygon { vertices } => polygon_area(vertices),
        }
    }

    /// A canonical interior point: midpoint, center, or vertex centroid.
    pub fn center(&self) -> Vec<f64> {
        match self {
            ConvexDomain::Interval { a, b } => vec![0.5 * (a + b)],
            ConvexDomain::Ball { center, .. } => center.clone(),
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len() as f64;
                let sx: f64 = vertices.iter().map(|v| v[0]).sum();
                let sy: f64 = vertices.iter().map(|v| v[1]).sum();
                vec![sx / n, sy / n]
            }
        }
    }

    /// Axis-aligned bounding box as (lower corner, upper corner).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ConvexDomain::Interval { a, b } => (vec![*a], vec![*b]),
            ConvexDomain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            ConvexDomain::Polygon { vertices } => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Signed distance to the boundary: positive inside, negative outside.
    fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            ConvexDomain::Interval { a, b } => (x[0] - a).min(b - x[0]),
            ConvexDomain::Ball { center, radius } => {
                radius - x.iter().zip(center).map(|(p, c)| (p - c).powi(2)).sum::<f64>().sqrt()
            }
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                let mut inside = f64::INFINITY;
                for i in 0..n {
                    let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                    let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
                    let len = (ex * ex + ey * ey).sqrt();
                    if len == 0.0 {
                        continue;
                    }
                    // inward normal of a CCW edge is (-ey, ex)
                    let s = (-(ey) * (x[0] - p[0]) + ex * (x[1] - p[1])) / len;
                    inside = inside.min(s);
                }
                if inside >= 0.0 {
                    // exact projection onto each edge segment
                    let mut best = f64::INFINITY;
                    for i in 0..n {
                        best = best.min(segment_distance(x, vertices[i], vertices[(i + 1) % n]));
                    }
                    best
                } else {
                    inside
                }
            }
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(MaError::Shape(format!(
                "point has dimension {}, domain has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.signed_distance(x) >= -BOUNDARY_TOL * self.diameter()
    }

    /// Distance from `x` to the boundary of the domain.
    pub fn dist_to_boundary(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let s = self.signed_distance(x);
        if s < -BOUNDARY_TOL * self.diameter() {
            return Err(MaError::Domain(format!("point {x:?} lies outside the domain")));
        }
        Ok(s.max(0.0))
    }

    /// Distance along a ray from an interior point to the boundary.
    fn ray_exit(&self, x: &[f64], e: &[f64]) -> f64 {
        match self {
            ConvexDomain::Interval { a, b } => {
                if e[0] > 0.0 {
                    (b - x[0]) / e[0]
                } else {
                    (x[0] - a) / -e[0]
                }
            }
            ConvexDomain::Ball { center, radius } => {
                // |x - c + t e|^2 = R^2 with |e| = 1
                let d: Vec<f64> = x.iter().zip(center).map(|(p, c)| p - c).collect();
                let bq: f64 = d.iter().zip(e).map(|(p, q)| p * q).sum();
                let cq: f64 = d.iter().map(|p| p * p).sum::<f64>() - radius * radius;
                -bq + (bq * bq - cq).max(0.0).sqrt()
            }
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                let mut t = f64::INFINITY;
                for i in 0..n {
                    let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                    let nx = q[1] - p[1];
                    let ny = -(q[0] - p[0]);
                    let den = nx * e[0] + ny * e[1];
                    if den > 0.0 {
                        let num = nx * (p[0] - x[0]) + ny * (p[1] - x[1]);
                        t = t.min(num / den);
                    }
                }
                t.max(0.0)
            }
        }
    }

    /// Minimum over chords through `x` of the ratio of the shorter to the longer piece.
    pub fn normalized_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        if self.signed_distance(x) <= BOUNDARY_TOL * self.diameter() {
            return Err(MaError::Domain(format!("point {x:?} is not interior")));
        }
        match self {
            ConvexDomain::Interval { a, b } => {
                let (l, r) = (x[0] - a, b - x[0]);
                Ok(l.min(r) / l.max(r))
            }
            ConvexDomain::Ball { center, radius } if center.len() != 2 => {
                let rho = x.iter().zip(center).map(|(p, c)| (p - c).powi(2)).sum::<f64>().sqrt();
                Ok((radius - rho) / (radius + rho))
            }
            _ => Ok(self.chord_sweep(x)),
        }
    }

    fn chord_ratio(&self, x: &[f64], theta: f64) -> f64 {
        let e = [theta.cos(), theta.sin()];
        let t1 = self.ray_exit(x, &e);
        let t2 = self.ray_exit(x, &[-e[0], -e[1]]);
        t1.min(t2) / t1.max(t2)
    }

    fn chord_sweep(&self, x: &[f64]) -> f64 {
        let step = PI / SWEEP_DIRECTIONS as f64;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..SWEEP_DIRECTIONS {
            let th = k as f64 * step;
            let r = self.chord_ratio(x, th);
            if r < best.0 {
                best = (r, th);
            }
        }
        let (mut lo, mut hi) = (best.1 - step, best.1 + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = hi - g * (hi - lo);
        let mut d = lo + g * (hi - lo);
        let (mut fc, mut fd) = (self.chord_ratio(x, c), self.chord_ratio(x, d));
        for _ in 0..60 {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = self.chord_ratio(x, c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = self.chord_ratio(x, d);
            }
        }
        best.0.min(fc).min(fd)
    }

    /// Minkowski gauge of the domain with respect to an interior point `c`:
    /// equals 1 on the boundary, 0 at `c`, and is convex.
    pub fn gauge(&self, c: &[f64], x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(c).map(|(p, q)| p - q).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let e: Vec<f64> = d.iter().map(|v| v / norm).collect();
        let exit = self.ray_exit(c, &e);
        if exit <= 0.0 {
            return f64::INFINITY;
        }
        norm / exit
    }

    /// Boundary-defining function comparable to the distance: for an interval
    /// `(x-a)(b-x)/((b-a)/2)`, for a ball `(R^2-|x-c|^2)/R`, for a polygon the distance itself.
    pub fn defining_function(&self, x: &[f64]) -> f64 {
        match self {
            ConvexDomain::Interval { a, b } => (x[0] - a) * (b - x[0]) / (0.5 * (b - a)),
            ConvexDomain::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(p, c)| (p - c).powi(2)).sum();
                (radius * radius - r2) / radius
            }
            ConvexDomain::Polygon { .. } => self.signed_distance(x).max(0.0),
        }
    }
}

fn segment_distance(x: &[f64], p: [f64; 2], q: [f64; 2]) -> f64 {
    let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
    let len2 = ex * ex + ey * ey;
    let t = if len2 > 0.0 {
        (((x[0] - p[0]) * ex + (x[1] - p[1]) * ey) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((x[0] - p[0] - t * ex).powi(2) + (x[1] - p[1] - t * ey).powi(2)).sqrt()
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Storage layout of a mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeshKind {
    /// Nodes on an interval; cells are the intervals between consecutive nodes.
    Line,
    /// Radius grid of a radially symmetric profile in dimension `dim`; cells are shells.
    Radial { dim: usize },
    /// Planar grid nodes with boundary nodes on the domain boundary; each cell is
    /// the Voronoi cell of one interior node clipped to the boundary polygon.
    Grid { h: f64 },
}

/// Cell of a mesh together with how its mass lumps onto nodes.
#[derive(Clone, Debug)]
pub struct Cell {
    pub volume: f64,
    /// Representative point: segment midpoint, mid-radius, or owning node.
    pub midpoint: [f64; 2],
    /// (node, weight) pairs; weights sum to one.
    pub lumping: Vec<(usize, f64)>,
    /// Endpoints for 1D and radial cells, owner for grid cells.
    pub nodes: Vec<usize>,
    /// Clipped Voronoi polygon for grid cells.
    pub polygon: Option<Poly>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    domain: ConvexDomain,
    kind: MeshKind,
    points: Vec<[f64; 2]>,
    boundary: Vec<bool>,
    cells: Vec<Cell>,
    neighbors: Vec<Vec<usize>>,
    hull: Poly,
    clearance: f64,
}

impl Mesh {
    /// Uniform 1D mesh with `n_nodes` nodes on an interval.
    pub fn line(domain: &ConvexDomain, n_nodes: usize) -> Result<Self> {
        let ConvexDomain::Interval { a, b } = *domain else {
            return Err(MaError::Shape("line meshes need an interval domain".into()));
        };
        if n_nodes < 3 {
            return Err(MaError::Parameter("line mesh needs at least 3 nodes".into()));
        }
        let h = (b - a) / (n_nodes - 1) as f64;
        let mut xs: Vec<f64> = (0..n_nodes).map(|i| a + i as f64 * h).collect();
        xs[n_nodes - 1] = b;
        Self::line_from_nodes(domain, xs)
    }

    /// 1D mesh with arbitrary strictly increasing nodes spanning the interval.
    pub fn line_from_nodes(domain: &ConvexDomain, xs: Vec<f64>) -> Result<Self> {
        let ConvexDomain::Interval { a, b } = *domain else {
            return Err(MaError::Shape("line meshes need an interval domain".into()));
        };
        if xs.len() < 3 {
            return Err(MaError::Parameter("line mesh needs at least 3 nodes".into()));
        }
        let tol = BOUNDARY_TOL * (b - a);
        if (xs[0] - a).abs() > tol || (xs[xs.len() - 1] - b).abs() > tol {
            return Err(MaError::InvalidMesh("first and last nodes must be the interval ends".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MaError::InvalidMesh("nodes must be strictly increasing".into()));
        }
        let n = xs.len();
        let points: Vec<[f64; 2]> = xs.iter().map(|&x| [x, 0.0]).collect();
        let mut boundary = vec![false; n];
        boundary[0] = true;
        boundary[n - 1] = true;
        let cells = (0..n - 1)
            .map(|k| Cell {
                volume: xs[k + 1] - xs[k],
                midpoint: [0.5 * (xs[k] + xs[k + 1]), 0.0],
                lumping: vec![(k, 0.5), (k + 1, 0.5)],
                nodes: vec![k, k + 1],
                polygon: None,
            })
            .collect();
        Ok(Mesh {
            domain: domain.clone(),
            kind: MeshKind::Line,
            points,
            boundary,
            cells,
            neighbors: Vec::new(),
            hull: Vec::new(),
            clearance: 0.0,
        })
    }

    /// Uniform radius grid on a ball with `n_nodes` radii from 0 to R.
    pub fn radial(domain: &ConvexDomain, n_nodes: usize) -> Result<Self> {
        let ConvexDomain::Ball { radius, .. } = domain else {
            return Err(MaError::Shape("radial meshes need a ball domain".into()));
        };
        if n_nodes < 3 {
            return Err(MaError::Parameter("radial mesh needs at least 3 nodes".into()));
        }
        let h = radius / (n_nodes - 1) as f64;
        let mut rs: Vec<f64> = (0..n_nodes).map(|i| i as f64 * h).collect();
        rs[n_nodes - 1] = *radius;
        Self::radial_from_radii(domain, rs)
    }

    /// Radius grid refined geometrically towards the boundary sphere: `n_uniform`
    /// uniform radii on [0, R/2), then `n_graded` radii with R - r geometric from
    /// R/2 down to `gap`, then R.
    pub fn radial_graded(domain: &ConvexDomain, n_uniform: usize, n_graded: usize, gap: f64) -> Result<Self> {
        let ConvexDomain::Ball { radius, .. } = domain else {
            return Err(MaError::Shape("radial meshes need a ball domain".into()));
        };
        let r = *radius;
        if n_uniform < 1 || n_graded < 2 || !(gap > 0.0 && gap < 0.5 * r) {
            return Err(MaError::Parameter("graded radial mesh parameters out of range".into()));
        }
        let mut rs: Vec<f64> = (0..n_uniform).map(|i| 0.5 * r * i as f64 / n_uniform as f64).collect();
        let ratio = (gap / (0.5 * r)).powf(1.0 / (n_graded - 1) as f64);
        let mut t = 0.5 * r;
        for _ in 0..n_graded {
            rs.push(r - t);
            t *= ratio;
        }
        rs.push(r);
        Self::radial_from_radii(domain, rs)
    }

    pub fn radial_from_radii(domain: &ConvexDomain, rs: Vec<f64>) -> Result<Self> {
        let ConvexDomain::Ball { center, radius } = domain else {
            return Err(MaError::Shape("radial meshes need a ball domain".into()));
        };
        let dim = center.len();
        let n = rs.len();
        if n < 3 {
            return Err(MaError::Parameter("radial mesh needs at least 3 nodes".into()));
        }
        if rs[0] != 0.0 || (rs[n - 1] - radius).abs() > BOUNDARY_TOL * radius {
            return Err(MaError::InvalidMesh("radii must run from 0 to R".into()));
        }
        if rs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MaError::InvalidMesh("radii must be strictly increasing".into()));
        }
        let w = unit_ball_volume(dim);
        let nn = dim as i32;
        let points: Vec<[f64; 2]> = rs.iter().map(|&r| [r, 0.0]).collect();
        let mut boundary = vec![false; n];
        boundary[n - 1] = true;
        let cells = (0..n - 1)
            .map(|k| {
                let (r0, r1) = (rs[k], rs[k + 1]);
                let mid = 0.5 * (r0 + r1);
                let vol = w * (r1.powi(nn) - r0.powi(nn));
                let inner = w * (mid.powi(nn) - r0.powi(nn)) / vol;
                Cell {
                    volume: vol,
                    midpoint: [mid, 0.0],
                    lumping: vec![(k, inner), (k + 1, 1.0 - inner)],
                    nodes: vec![k, k + 1],
                    polygon: None,
                }
            })
            .collect();
        Ok(Mesh {
            domain: domain.clone(),
            kind: MeshKind::Radial { dim },
            points,
            boundary,
            cells,
            neighbors: Vec::new(),
            hull: Vec::new(),
            clearance: 0.0,
        })
    }

    /// `n` x `n` grid over the bounding box of a planar ball or polygon. Grid points
    /// farther than `0.1 h` from the boundary become interior nodes; boundary nodes
    /// are the intersections of grid lines with the boundary, plus polygon vertices.
    pub fn grid(domain: &ConvexDomain, n: usize) -> Result<Self> {
        if domain.dim() != 2 || matches!(domain, ConvexDomain::Interval { .. }) {
            return Err(MaError::Shape("grid meshes need a planar ball or polygon".into()));
        }
        if n < 3 {
            return Err(MaError::Parameter("grid needs n >= 3".into()));
        }
        let (lo, hi) = domain.bounding_box();
        let side = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let h = side / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| lo[0] + i as f64 * h).collect();
        let ys: Vec<f64> = (0..n).map(|i| lo[1] + i as f64 * h).collect();

        let mut bnd: Vec<[f64; 2]> = Vec::new();
        match domain {
            ConvexDomain::Ball { center, radius } => {
                let (cx, cy, r) = (center[0], center[1], *radius);
                for &x in &xs {
                    let d = r * r - (x - cx).powi(2);
                    if d >= 0.0 {
                        let s = d.sqrt();
                        bnd.push([x, cy + s]);
                        bnd.push([x, cy - s]);
                    }
                }
                for &y in &ys {
                    let d = r * r - (y - cy).powi(2);
                    if d >= 0.0 {
                        let s = d.sqrt();
                        bnd.push([cx + s, y]);
                        bnd.push([cx - s, y]);
                    }
                }
            }
            ConvexDomain::Polygon { vertices } => {
                let m = vertices.len();
                bnd.extend(vertices.iter().copied());
                for i in 0..m {
                    let (p, q) = (vertices[i], vertices[(i + 1) % m]);
                    for &x in &xs {
                        if (p[0] - x) * (q[0] - x) < 0.0 {
                            let t = (x - p[0]) / (q[0] - p[0]);
                            bnd.push([x, p[1] + t * (q[1] - p[1])]);
                        }
                    }
                    for &y in &ys {
                        if (p[1] - y) * (q[1] - y) < 0.0 {
                            let t = (y - p[1]) / (q[1] - p[1]);
                            bnd.push([p[0] + t * (q[0] - p[0]), y]);
                        }
                    }
                }
            }
            ConvexDomain::Interval { .. } => unreachable!(),
        }
        let c = domain.center();
        bnd.sort_by(|p, q| {
            let a = (p[1] - c[1]).atan2(p[0] - c[0]);
            let b = (q[1] - c[1]).atan2(q[0] - c[0]);
            a.partial_cmp(&b).unwrap()
        });
        let dedup = 1e-9 * side;
        let mut boundary_pts: Vec<[f64; 2]> = Vec::new();
        for p in bnd {
            if let Some(last) = boundary_pts.last() {
                if (p[0] - last[0]).abs() < dedup && (p[1] - last[1]).abs() < dedup {
                    continue;
                }
            }
            boundary_pts.push(p);
        }
        if boundary_pts.len() > 1 {
            let (f, l) = (boundary_pts[0], boundary_pts[boundary_pts.len() - 1]);
            if (f[0] - l[0]).abs() < dedup && (f[1] - l[1]).abs() < dedup {
                boundary_pts.pop();
            }
        }

        let mut points = Vec::new();
        for &y in &ys {
            for &x in &xs {
                let p = [x, y];
                if domain.signed_distance(&p) > 0.1 * h {
                    points.push(p);
                }
            }
        }
        let n_interior = points.len();
        let mut boundary = vec![false; n_interior];
        let hull = boundary_pts.clone();
        for p in boundary_pts {
            points.push(p);
            boundary.push(true);
        }
        let neighbors = neighbor_lists(&points, 3.0 * h);

        let cells: Vec<Cell> = (0..n_interior)
            .map(|i| {
                let xi = points[i];
                let mut poly = hull.clone();
                for &j in &neighbors[i] {
                    let xj = points[j];
                    let a = [xj[0] - xi[0], xj[1] - xi[1]];
                    let mid = [0.5 * (xj[0] + xi[0]), 0.5 * (xj[1] + xi[1])];
                    let cval = a[0] * mid[0] + a[1] * mid[1];
                    poly = clip_halfplane(&poly, a, cval);
                }
                Cell {
                    volume: polygon_area(&poly),
                    midpoint: xi,
                    lumping: vec![(i, 1.0)],
                    nodes: vec![i],
                    polygon: Some(poly),
                }
            })
            .collect();
        let mut mesh = Mesh {
            domain: domain.clone(),
            kind: MeshKind::Grid { h },
            points,
            boundary,
            cells,
            neighbors,
            hull,
            clearance: 0.0,
        };
        mesh.clearance = mesh.compute_clearance();
        Ok(mesh)
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Dimension of the underlying domain (for radial meshes, the ball dimension).
    pub fn dim(&self) -> usize {
        match self.kind {
            MeshKind::Line => 1,
            MeshKind::Radial { dim } => dim,
            MeshKind::Grid { .. } => 2,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Node coordinates: `x` for 1D, `r` for radial, `(x, y)` for grids.
    pub fn node(&self, i: usize) -> &[f64] {
        match self.kind {
            MeshKind::Grid { .. } => &self.points[i][..],
            _ => &self.points[i][..1],
        }
    }

    pub(crate) fn point(&self, i: usize) -> [f64; 2] {
        self.points[i]
    }

    pub(crate) fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| !self.boundary[i])
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.boundary[i])
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub(crate) fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Grid spacing for grid meshes, largest cell width otherwise.
    pub fn spacing(&self) -> f64 {
        match self.kind {
            MeshKind::Grid { h } => h,
            _ => self.points.windows(2).map(|w| w[1][0] - w[0][0]).fold(0.0, f64::max),
        }
    }

    /// Full-dimensional coordinates of a node, placing radial nodes on the first axis.
    pub fn embed(&self, i: usize) -> Vec<f64> {
        self.embed_point(self.points[i])
    }

    fn embed_point(&self, p: [f64; 2]) -> Vec<f64> {
        match (&self.kind, &self.domain) {
            (MeshKind::Radial { dim }, ConvexDomain::Ball { center, .. }) => {
                let mut x = center.clone();
                x[0] += p[0];
                debug_assert_eq!(x.len(), *dim);
                x
            }
            (MeshKind::Line, _) => vec![p[0]],
            _ => vec![p[0], p[1]],
        }
    }

    pub fn node_dist(&self, i: usize) -> f64 {
        self.dist_at(self.points[i])
    }

    pub fn cell_dist(&self, k: usize) -> f64 {
        self.dist_at(self.cells[k].midpoint)
    }

    pub(crate) fn dist_at(&self, p: [f64; 2]) -> f64 {
        match (&self.kind, &self.domain) {
            (MeshKind::Radial { .. }, ConvexDomain::Ball { radius, .. }) => (radius - p[0]).max(0.0),
            _ => self.domain.signed_distance(&self.embed_point(p)).max(0.0),
        }
    }

    /// Boundary-defining function at a point given in mesh coordinates.
    pub(crate) fn defining_of(&self, p: [f64; 2]) -> f64 {
        match (&self.kind, &self.domain) {
            (MeshKind::Radial { .. }, ConvexDomain::Ball { radius, .. }) => {
                (radius - p[0]) * (radius + p[0]) / radius
            }
            (MeshKind::Line, ConvexDomain::Interval { a, b }) => (p[0] - a) * (b - p[0]) / (0.5 * (b - a)),
            _ => self.domain.defining_function(&self.embed_point(p)),
        }
    }

    /// Fraction of cell `k` lying at boundary distance greater than `t`.
    pub fn cell_fraction_beyond(&self, k: usize, t: f64) -> f64 {
        let cell = &self.cells[k];
        match (&self.kind, &self.domain) {
            (MeshKind::Line, ConvexDomain::Interval { a, b }) => {
                let (x0, x1) = (self.points[cell.nodes[0]][0], self.points[cell.nodes[1]][0]);
                let lo = x0.max(a + t);
                let hi = x1.min(b - t);
                ((hi - lo).max(0.0) / (x1 - x0)).min(1.0)
            }
            (MeshKind::Radial { dim }, ConvexDomain::Ball { radius, .. }) => {
                let (r0, r1) = (self.points[cell.nodes[0]][0], self.points[cell.nodes[1]][0]);
                let cut = (radius - t).clamp(r0, r1);
                let nn = *dim as i32;
                ((cut.powi(nn) - r0.powi(nn)) / (r1.powi(nn) - r0.powi(nn))).clamp(0.0, 1.0)
            }
            _ => {
                if self.dist_at(cell.midpoint) > t {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Value at cell `k`'s representative point of a nodal field.
    pub fn cell_value(&self, k: usize, values: &[f64]) -> f64 {
        let cell = &self.cells[k];
        match self.kind {
            MeshKind::Grid { .. } => values[cell.nodes[0]],
            _ => 0.5 * (values[cell.nodes[0]] + values[cell.nodes[1]]),
        }
    }

    /// Minimum distance from an interior grid node to the boundary polygon.
    pub(crate) fn clearance(&self) -> f64 {
        self.clearance
    }

    fn compute_clearance(&self) -> f64 {
        let hull = &self.hull;
        let m = hull.len();
        let mut best = f64::INFINITY;
        for i in self.interior_nodes() {
            let x = self.points[i];
            for k in 0..m {
                best = best.min(segment_distance(&x, hull[k], hull[(k + 1) % m]));
            }
        }
        best
    }
}

fn neighbor_lists(points: &[[f64; 2]], radius: f64) -> Vec<Vec<usize>> {
    use std::collections::HashMap;
    let key = |p: [f64; 2]| ((p[0] / radius).floor() as i64, (p[1] / radius).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in points.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(i);
    }
    let r2 = radius * radius;
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let (kx, ky) = key(p);
            let mut out = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(b) = buckets.get(&(kx + dx, ky + dy)) {
                        for &j in b {
                            if j != i && (points[j][0] - p[0]).powi(2) + (points[j][1] - p[1]).powi(2) <= r2 {
                                out.push(j);
                            }
                        }
                    }
                }
            }
            out.sort_by(|&a, &b| {
                let da = (points[a][0] - p[0]).powi(2) + (points[a][1] - p[1]).powi(2);
                let db = (points[b][0] - p[0]).powi(2) + (points[b][1] - p[1]).powi(2);
                da.partial_cmp(&db).unwrap()
            });
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_distance() {
        let d = ConvexDomain::interval(-1.0, 1.0).unwrap();
        assert_relative_eq!(d.dist_to_boundary(&[0.3]).unwrap(), 0.7, epsilon = 1e-15);
        assert!(d.dist_to_boundary(&[1.5]).is_err());
        assert_eq!(d.dist_to_boundary(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn ball_distance() {
        let d = ConvexDomain::unit_ball(2);
        assert_relative_eq!(d.dist_to_boundary(&[0.5, 0.0]).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn square_distance_matches_edge_projection() {
        let d = ConvexDomain::unit_square();
        assert_relative_eq!(d.dist_to_boundary(&[0.25, 0.5]).unwrap(), 0.25, epsilon = 1e-15);
        assert!(d.dist_to_boundary(&[1.2, 0.5]).is_err());
    }

    #[test]
    fn normalized_distance_examples() {
        let i = ConvexDomain::interval(-1.0, 1.0).unwrap();
        assert_relative_eq!(i.normalized_distance(&[0.0]).unwrap(), 1.0);
        assert_relative_eq!(i.normalized_distance(&[0.5]).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let b = ConvexDomain::unit_ball(2);
        assert_relative_eq!(b.normalized_distance(&[0.5, 0.0]).unwrap(), 1.0 / 3.0, epsilon = 1e-6);
        assert!(b.normalized_distance(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(ConvexDomain::interval(1.0, 1.0).is_err());
        assert!(ConvexDomain::ball(vec![0.0, 0.0], 0.0).is_err());
        assert!(ConvexDomain::polygon(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(ConvexDomain::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(ConvexDomain::polygon(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert_relative_eq!(unit_ball_volume(1), 2.0);
        assert_relative_eq!(unit_ball_volume(2), PI, epsilon = 1e-15);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn grid_cells_cover_almost_all_of_the_disk() {
        let d = ConvexDomain::unit_ball(2);
        let m = Mesh::grid(&d, 33).unwrap();
        let total: f64 = m.cells().iter().map(|c| c.volume).sum();
        assert!(total < PI && total > 0.95 * PI, "{total}");
        for i in m.boundary_nodes() {
            assert!(m.node_dist(i) < 1e-12);
        }
        for c in m.cells() {
            assert!(c.volume > 0.0);
        }
    }

    #[test]
    fn radial_lumping_weights_split_at_mid_radius() {
        let d = ConvexDomain::unit_ball(2);
        let m = Mesh::radial(&d, 11).unwrap();
        let total: f64 = m.cells().iter().map(|c| c.volume).sum();
        assert_relative_eq!(total, PI, epsilon = 1e-13);
        let c0 = &m.cells()[0];
        assert_relative_eq!(c0.lumping[0].1, 0.25, epsilon = 1e-14);
    }

    #[test]
    fn gauge_is_one_on_boundary() {
        let sq = ConvexDomain::unit_square();
        assert_relative_eq!(sq.gauge(&[0.5, 0.5], &[1.0, 0.7]), 1.0, epsilon = 1e-14);
        let b = ConvexDomain::unit_ball(2);
        assert_relative_eq!(b.gauge(&[0.3, 0.0], &[0.0, 1.0]), 1.0, epsilon = 1e-14);
        assert_relative_eq!(b.gauge(&[0.0, 0.0], &[0.5, 0.0]), 0.5, epsilon = 1e-14);
    }
}
