//! Subgradient cells of planar piecewise-linear convex functions.

use rayon::prelude::*;

use crate::geometry::Mesh;
use crate::polygon::TaggedPoly;

/// Cells of interior nodes; boundary nodes carry empty cells.
pub(crate) struct CellSet {
    pub polys: Vec<TaggedPoly>,
    pub clipped: bool,
}

/// Box half-width that contains every subgradient of an interior node.
pub(crate) fn lipschitz_box(mesh: &Mesh, values: &[f64], active: Option<&[bool]>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if active.is_none_or(|a| a[i]) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let osc = (hi - lo).max(0.0);
    2.0 * osc / mesh.clearance().max(1e-300) + 1.0
}

/// Subgradient cell at node `i` when node `i` takes the value `z`.
///
/// Nodes with `active[j] == false` are ignored; node `i` itself never constrains.
pub(crate) fn node_cell(
    mesh: &Mesh,
    values: &[f64],
    i: usize,
    z: f64,
    active: Option<&[bool]>,
    l: f64,
    global: bool,
) -> TaggedPoly {
    let pts = mesh.points();
    let xi = pts[i];
    let mut poly = TaggedPoly::square(l);
    let use_node = |j: usize| j != i && active.is_none_or(|a| a[j]);
    for &j in mesh.neighbors(i) {
        if !use_node(j) {
            continue;
        }
        let a = [pts[j][0] - xi[0], pts[j][1] - xi[1]];
        poly.clip(a, values[j] - z, j);
        if poly.is_empty() {
            return poly;
        }
    }
    if global {
        let mut rad = poly.max_norm();
        for j in 0..pts.len() {
            if !use_node(j) {
                continue;
            }
            let a = [pts[j][0] - xi[0], pts[j][1] - xi[1]];
            let c = values[j] - z;
            let an = (a[0] * a[0] + a[1] * a[1]).sqrt();
            if an * rad <= c {
                continue;
            }
            if poly.support(a) > c {
                poly.clip(a, c, j);
                if poly.is_empty() {
                    return poly;
                }
                rad = poly.max_norm();
            }
        }
    }
    poly
}

/// Cells of all interior (and active) nodes at their own values.
pub(crate) fn grid_cells(mesh: &Mesh, values: &[f64], active: Option<&[bool]>) -> CellSet {
    let l = lipschitz_box(mesh, values, active);
    let polys: Vec<TaggedPoly> = (0..mesh.len())
        .into_par_iter()
        .map(|i| {
            if mesh.is_boundary(i) || active.is_some_and(|a| !a[i]) {
                TaggedPoly::default()
            } else {
                node_cell(mesh, values, i, values[i], active, l, true)
            }
        })
        .collect();
    let clipped = polys
        .iter()
        .any(|p| !p.is_empty() && p.tags.iter().any(|t| t.is_none()));
    CellSet { polys, clipped }
}

/// Largest value `z <= values[i]` such that the point `(x_i, z)` lies on the
/// lower convex hull of the other (active) nodes, found by bisection.
pub(crate) fn hull_value(mesh: &Mesh, values: &[f64], i: usize, active: Option<&[bool]>, l: f64, tol: f64) -> f64 {
    let top = values[i];
    let probe = node_cell(mesh, values, i, top - tol, active, l, true);
    if !probe.is_empty() {
        return top;
    }
    let mut lo = values
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i && active.is_none_or(|a| a[*j]))
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    let mut hi = top;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + hi.abs().max(lo.abs())) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if node_cell(mesh, values, i, mid, active, l, true).is_empty() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}
