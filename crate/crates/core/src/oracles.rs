//! Closed-form convex functions, measures and eigenpairs used to validate the
//! discrete machinery.
//!
//! Every case carries two independent evaluations of its equation: `lhs` from
//! hand-derived derivatives of the exact functions, `rhs` from the closed-form
//! density. [`OracleCase::max_residual`] compares them pointwise.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::convex_core::{ConvexFn, DiscreteMeasure};
use crate::error::{MaError, Result};
use crate::geometry::{ConvexDomain, Mesh, MeshKind};
use crate::measures::{realize, realize_truncated, MeasureSpec, Profile};

/// Where the exact density blows up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Singular {
    None,
    Boundary,
    Center,
}

#[derive(Clone, Debug)]
pub struct OracleCase {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub dim: usize,
    /// `None` when the natural domain is not a ball, interval or polygon.
    pub domain: Option<ConvexDomain>,
    /// Exact convex functions; the first one is sampled by [`sample`].
    pub functions: Vec<Profile>,
    /// Exact density of the measure `ν` (or `μ_u` when there is no eigen data).
    pub density: Profile,
    pub lambda: Option<f64>,
    /// Left side of the equation from hand-derived derivatives.
    pub lhs: Profile,
    /// Right side from the closed-form density.
    pub rhs: Profile,
    pub singular: Singular,
    /// The identity the case encodes.
    pub identity: String,
}

fn r2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `w = −(1−r²)^α` on the unit ball of `R^n`, with
/// `det D²w = (2α)ⁿ(1−r²)^{n(α−1)−1}[1 + r²(1−2α)]`.
pub fn radial_alpha(n: usize, alpha: f64) -> Result<OracleCase> {
    if !(n == 1 || n == 2) {
        return Err(MaError::Parameter(format!("radial_alpha needs n in {{1, 2}}, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MaError::Parameter(format!("α must lie in (0, 1), got {alpha}")));
    }
    let nf = n as f64;
    let w = Profile::new("w", move |x| -(1.0 - r2(x)).powf(alpha));
    let lhs = Profile::new("W''(W'/r)^(n-1)", move |x| {
        let r = r2(x).sqrt();
        let s = 1.0 - r * r;
        let w2 = 2.0 * alpha * s.powf(alpha - 2.0) * (s - 2.0 * (alpha - 1.0) * r * r);
        // W'(r)/r = 2α(1−r²)^{α−1}
        w2 * (2.0 * alpha * s.powf(alpha - 1.0)).powi(n as i32 - 1)
    });
    let density = Profile::new("det D²w", move |x| {
        let r = r2(x);
        (2.0 * alpha).powf(nf) * (1.0 - r).powf(nf * (alpha - 1.0) - 1.0) * (1.0 + r * (1.0 - 2.0 * alpha))
    });
    let domain = if n == 1 {
        ConvexDomain::interval(-1.0, 1.0)?
    } else {
        ConvexDomain::unit_ball(2)
    };
    Ok(OracleCase {
        name: "radial_alpha".into(),
        params: vec![("n".into(), nf), ("alpha".into(), alpha)],
        dim: n,
        domain: Some(domain),
        functions: vec![w],
        rhs: density.clone(),
        density,
        lambda: None,
        lhs,
        singular: Singular::Boundary,
        identity: "det D²w = (2α)ⁿ(1−r²)^{n(α−1)−1}[1 + r²(1−2α)]".into(),
    })
}

/// `v_α = −(1−x²)^{1/2}((1+x)/(1−x))^α` on `(−1, 1)`, solving
/// `v'' = λ_α|v|/(1−x²)²` with `λ_α = 1 − 4α²`.
pub fn hardy_family(alpha: f64) -> Result<OracleCase> {
    if !(alpha.abs() < 0.5) {
        return Err(MaError::Parameter(format!("|α| must be < 1/2, got {alpha}")));
    }
    let (a, b) = (0.5 + alpha, 0.5 - alpha);
    let lambda = 1.0 - 4.0 * alpha * alpha;
    let v = Profile::new("v_alpha", move |x| -(1.0 + x[0]).powf(a) * (1.0 - x[0]).powf(b));
    let lhs = Profile::new("v''", move |x| {
        let (p, q) = (1.0 + x[0], 1.0 - x[0]);
        -p.powf(a) * q.powf(b) * (a * (a - 1.0) / (p * p) - 2.0 * a * b / (p * q) + b * (b - 1.0) / (q * q))
    });
    let density = Profile::new("(1-x²)^-2", |x| (1.0 - x[0] * x[0]).powi(-2));
    let rhs = Profile::new("λ|v|ν", move |x| {
        let s = 1.0 - x[0] * x[0];
        lambda * (1.0 + x[0]).powf(a) * (1.0 - x[0]).powf(b) / (s * s)
    });
    Ok(OracleCase {
        name: "hardy_family".into(),
        params: vec![("alpha".into(), alpha)],
        dim: 1,
        domain: Some(ConvexDomain::interval(-1.0, 1.0)?),
        functions: vec![v],
        density,
        lambda: Some(lambda),
        lhs,
        rhs,
        singular: Singular::Boundary,
        identity: "v_α'' = (1 − 4α²)|v_α|(1−x²)^{-2}".into(),
    })
}

/// `u = |x|²/2`, `v = |x|` on the unit disk; the mixed measure with `2 − k`
/// copies of `u` and `k` copies of `v` has density `(2−k)/2 · r^{−k}`.
pub fn mixed_parabola_cone(k: usize) -> Result<OracleCase> {
    if k > 2 {
        return Err(MaError::Parameter(format!("k must be 0, 1 or 2, got {k}")));
    }
    let u = Profile::new("|x|²/2", |x| 0.5 * r2(x));
    let v = Profile::new("|x|", |x| r2(x).sqrt());
    let lhs = Profile::new("mixed Hessian determinant", move |x| {
        let r = r2(x).sqrt();
        let hu = [1.0, 0.0, 1.0];
        let hv = [x[1] * x[1] / r.powi(3), -x[0] * x[1] / r.powi(3), x[0] * x[0] / r.powi(3)];
        let (a, b) = match k {
            0 => (hu, hu),
            1 => (hu, hv),
            _ => (hv, hv),
        };
        0.5 * (a[0] * b[2] + a[2] * b[0] - 2.0 * a[1] * b[1])
    });
    let kf = k as f64;
    let density = Profile::new("(2-k)/2 r^-k", move |x| (2.0 - kf) / 2.0 * r2(x).sqrt().powi(-(k as i32)));
    Ok(OracleCase {
        name: "mixed_parabola_cone".into(),
        params: vec![("n".into(), 2.0), ("k".into(), kf)],
        dim: 2,
        domain: Some(ConvexDomain::unit_ball(2)),
        functions: vec![u, v],
        rhs: density.clone(),
        density,
        lambda: None,
        lhs,
        singular: if k == 0 { Singular::None } else { Singular::Center },
        identity: "μ_2[u,…,v,…] = (n−k)/n r^{−k} dx".into(),
    })
}

/// `w = x_n − x_n^a(1−|x′|²)^{1−a}` on `{0 < x_n < 1 − |x′|²}` with
/// `det D²w = a(1−a)(2−2a)^{n−1} x_n^{na−2}(1−|x′|²)^{1−na}`.
pub fn flat_boundary_witness(n: usize, a: f64) -> Result<OracleCase> {
    if !(n == 1 || n == 2) {
        return Err(MaError::Parameter(format!("flat_boundary_witness needs n in {{1, 2}}, got {n}")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(MaError::Parameter(format!("a must lie in (0, 1), got {a}")));
    }
    let nf = n as f64;
    let split = move |x: &[f64]| -> (f64, f64) {
        if n == 1 {
            (0.0, x[0])
        } else {
            (x[0], x[1])
        }
    };
    let w = Profile::new("w", move |x| {
        let (y, t) = split(x);
        t - t.powf(a) * (1.0 - y * y).powf(1.0 - a)
    });
    let lhs = Profile::new("det D²w", move |x| {
        let (y, t) = split(x);
        let s = 1.0 - y * y;
        let wtt = a * (1.0 - a) * t.powf(a - 2.0) * s.powf(1.0 - a);
        if n == 1 {
            return wtt;
        }
        let wyy = 2.0 * (1.0 - a) * t.powf(a) * s.powf(-a - 1.0) * (s + 2.0 * a * y * y);
        let wyt = 2.0 * (1.0 - a) * a * y * t.powf(a - 1.0) * s.powf(-a);
        wyy * wtt - wyt * wyt
    });
    let density = Profile::new("a(1-a)(2-2a)^(n-1) x_n^(na-2)(1-|x'|²)^(1-na)", move |x| {
        let (y, t) = split(x);
        a * (1.0 - a) * (2.0 - 2.0 * a).powf(nf - 1.0) * t.powf(nf * a - 2.0) * (1.0 - y * y).powf(1.0 - nf * a)
    });
    Ok(OracleCase {
        name: "flat_boundary_witness".into(),
        params: vec![("n".into(), nf), ("a".into(), a)],
        dim: n,
        domain: if n == 1 { Some(ConvexDomain::interval(0.0, 1.0)?) } else { None },
        functions: vec![w],
        rhs: density.clone(),
        density,
        lambda: None,
        lhs,
        singular: Singular::Boundary,
        identity: "det D²w = a(1−a)(2−2a)^{n−1} x_n^{na−2}(1−|x′|²)^{1−na}".into(),
    })
}

/// `u = −cos(πx/2)` on `(−1, 1)` with `u'' = (π²/4)|u|`.
pub fn lebesgue_1d_eigen() -> OracleCase {
    let lambda = PI * PI / 4.0;
    OracleCase {
        name: "lebesgue_1d_eigen".into(),
        params: Vec::new(),
        dim: 1,
        domain: Some(ConvexDomain::interval(-1.0, 1.0).expect("valid interval")),
        functions: vec![Profile::new("-cos(πx/2)", |x| -(PI * x[0] / 2.0).cos())],
        density: Profile::new("1", |_| 1.0),
        lambda: Some(lambda),
        lhs: Profile::new("u''", |x| (PI / 2.0).powi(2) * (PI * x[0] / 2.0).cos()),
        rhs: Profile::new("λ|u|", move |x| lambda * (PI * x[0] / 2.0).cos().abs()),
        singular: Singular::None,
        identity: "u'' = (π²/4)|u|".into(),
    }
}

/// `u_m = |x|^{2m} − 1` on `(−1, 1)` with `μ_{u_m} = 2m(2m−1)x^{2m−2} dx`.
pub fn noncompact_sequence(m: u32) -> Result<OracleCase> {
    if m == 0 {
        return Err(MaError::Parameter("m must be >= 1".into()));
    }
    let k = 2 * m as i32;
    let kf = k as f64;
    let density = Profile::new("2m(2m-1)x^(2m-2)", move |x| kf * (kf - 1.0) * x[0].powi(k - 2));
    Ok(OracleCase {
        name: "noncompact_sequence".into(),
        params: vec![("m".into(), m as f64)],
        dim: 1,
        domain: Some(ConvexDomain::interval(-1.0, 1.0)?),
        functions: vec![Profile::new("|x|^(2m)-1", move |x| x[0].abs().powi(k) - 1.0)],
        rhs: density.clone(),
        density,
        lambda: None,
        lhs: Profile::new("u''", move |x| kf * (kf - 1.0) * x[0].abs().powi(k - 2)),
        singular: Singular::None,
        identity: "u_m'' = 2m(2m−1)x^{2m−2}".into(),
    })
}

/// Names accepted by [`oracle`].
pub const REGISTRY: [&str; 6] = [
    "radial_alpha",
    "hardy_family",
    "mixed_parabola_cone",
    "flat_boundary_witness",
    "lebesgue_1d_eigen",
    "noncompact_sequence",
];

fn param(params: &[(&str, f64)], key: &str, default: f64) -> f64 {
    params.iter().find(|(k, _)| *k == key).map_or(default, |(_, v)| *v)
}

/// Looks up a case by name. Missing parameters take the defaults `n = 2`,
/// `α = 0` (`n/(n+1)` for `radial_alpha`), `k = 1`, `a = 1/4`, `m = 1`.
pub fn oracle(name: &str, params: &[(&str, f64)]) -> Result<OracleCase> {
    let int = |key: &str, default: f64| -> Result<usize> {
        let v = param(params, key, default);
        if v < 0.0 || v.fract() != 0.0 {
            return Err(MaError::Parameter(format!("{key} must be a nonnegative integer, got {v}")));
        }
        Ok(v as usize)
    };
    match name {
        "radial_alpha" => {
            let n = int("n", 2.0)?;
            radial_alpha(n, param(params, "alpha", n as f64 / (n as f64 + 1.0)))
        }
        "hardy_family" => hardy_family(param(params, "alpha", 0.0)),
        "mixed_parabola_cone" => mixed_parabola_cone(int("k", 1.0)?),
        "flat_boundary_witness" => flat_boundary_witness(int("n", 2.0)?, param(params, "a", 0.25)),
        "lebesgue_1d_eigen" => Ok(lebesgue_1d_eigen()),
        "noncompact_sequence" => noncompact_sequence(int("m", 1.0)? as u32),
        _ => Err(MaError::Lookup(name.to_string())),
    }
}

impl OracleCase {
    /// Deterministic interior sample points, kept away from singular sets.
    pub fn interior_points(&self, count: usize) -> Vec<Vec<f64>> {
        let margin = 0.02;
        match (self.dim, &self.domain) {
            (1, Some(ConvexDomain::Interval { a, b })) => (0..count)
                .map(|k| {
                    let t = (k as f64 + 0.5) / count as f64;
                    vec![a + (b - a) * (margin + (1.0 - 2.0 * margin) * t)]
                })
                .collect(),
            _ => {
                let side = (count as f64).sqrt().ceil() as usize;
                let mut out = Vec::with_capacity(count);
                for k in 0..count {
                    let (i, j) = (k / side, k % side);
                    let s = margin + (1.0 - 2.0 * margin) * (i as f64 + 0.5) / side as f64;
                    let t = margin + (1.0 - 2.0 * margin) * (j as f64 + 0.5) / side as f64;
                    out.push(if self.domain.is_none() {
                        let y = 2.0 * s - 1.0;
                        vec![y, t * (1.0 - y * y)]
                    } else {
                        let th = 2.0 * PI * t;
                        vec![s * th.cos(), s * th.sin()]
                    });
                }
                out
            }
        }
    }

    /// Largest `|lhs − rhs| / max(1, |rhs|)` over `count` interior points.
    pub fn max_residual(&self, count: usize) -> f64 {
        self.interior_points(count)
            .iter()
            .map(|x| {
                let (l, r) = (self.lhs.eval(x), self.rhs.eval(x));
                (l - r).abs() / r.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Samples the first exact function at the nodes and integrates the exact
/// density over the cells, optionally truncated at `dist > 1/m`.
pub fn sample(case: &OracleCase, mesh: &Arc<Mesh>, truncation: Option<u64>) -> Result<(ConvexFn, DiscreteMeasure)> {
    let Some(domain) = &case.domain else {
        return Err(MaError::Unsupported(format!("{} has no mesh-compatible domain", case.name)));
    };
    if mesh.domain() != domain {
        return Err(MaError::Domain(format!("mesh domain does not match the {} domain", case.name)));
    }
    if case.singular == Singular::Boundary && truncation.is_none() {
        return Err(MaError::TruncationRequired(format!(
            "{} has a density singular at the boundary",
            case.name
        )));
    }
    let radial = matches!(mesh.kind(), MeshKind::Radial { .. });
    if case.singular == Singular::Center && matches!(mesh.kind(), MeshKind::Grid { .. }) {
        let c = domain.center();
        let hit = mesh
            .cells()
            .iter()
            .any(|cell| (cell.midpoint[0] - c[0]).hypot(cell.midpoint[1] - c[1]) < 1e-12);
        if hit {
            return Err(MaError::TruncationRequired(format!(
                "a cell of the mesh is centered on the singular point of {}",
                case.name
            )));
        }
    }
    let f = case.functions[0].clone();
    let values: Vec<f64> = (0..mesh.len()).map(|i| f.eval(&mesh.embed(i))).collect();
    let u = ConvexFn::new(mesh.clone(), values)?;
    let dens = case.density.clone();
    let spec = if radial {
        let center = domain.center();
        MeasureSpec::RadialDensity(Profile::new(dens.name().to_string(), move |r| {
            let mut x = center.clone();
            x[0] += r[0];
            dens.eval(&x)
        }))
    } else {
        MeasureSpec::Density(dens)
    };
    let nu = match truncation {
        Some(m) => realize_truncated(&spec, mesh, m)?,
        None => realize(&spec, mesh)?,
    };
    Ok((u, nu))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd2(f: &Profile, x: f64, h: f64) -> f64 {
        (f.eval(&[x + h]) - 2.0 * f.eval(&[x]) + f.eval(&[x - h])) / (h * h)
    }

    #[test]
    fn registry_residuals_vanish() {
        let mut cases = vec![
            radial_alpha(1, 0.5).unwrap(),
            radial_alpha(2, 2.0 / 3.0).unwrap(),
            hardy_family(0.0).unwrap(),
            hardy_family(0.25).unwrap(),
            hardy_family(0.4).unwrap(),
            flat_boundary_witness(1, 0.3).unwrap(),
            flat_boundary_witness(2, 0.3).unwrap(),
            lebesgue_1d_eigen(),
            noncompact_sequence(5).unwrap(),
        ];
        cases.extend((0..3).map(|k| mixed_parabola_cone(k).unwrap()));
        for c in &cases {
            let r = c.max_residual(1000);
            assert!(r < 1e-8, "{} {:?}: {r}", c.name, c.params);
        }
    }

    #[test]
    fn second_derivatives_match_differences() {
        let h = 1e-4;
        for c in [hardy_family(0.25).unwrap(), lebesgue_1d_eigen(), noncompact_sequence(3).unwrap()] {
            for x in [-0.7, -0.2, 0.1, 0.55] {
                let d = fd2(&c.functions[0], x, h);
                let l = c.lhs.eval(&[x]);
                assert!((d - l).abs() < 1e-5 * l.abs().max(1.0), "{} at {x}: {d} vs {l}", c.name);
            }
        }
    }

    #[test]
    fn hardy_defaults_and_lookup() {
        let c = oracle("hardy_family", &[]).unwrap();
        assert_eq!(c.lambda, Some(1.0));
        assert_eq!(oracle("hardy_family", &[("alpha", 0.25)]).unwrap().lambda, Some(0.75));
        assert!(matches!(oracle("nope", &[]), Err(MaError::Lookup(_))));
    }

    #[test]
    fn radial_alpha_center_value() {
        let c = radial_alpha(2, 2.0 / 3.0).unwrap();
        assert!((c.density.eval(&[0.0, 0.0]) - 16.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn singular_sampling_needs_truncation() {
        let m = Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0).unwrap(), 41).unwrap());
        let c = hardy_family(0.1).unwrap();
        assert!(matches!(sample(&c, &m, None), Err(MaError::TruncationRequired(_))));
        let (v, nu) = sample(&c, &m, Some(8)).unwrap();
        assert!(v.has_zero_boundary() && nu.total() > 0.0);
    }
}
