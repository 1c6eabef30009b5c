use crate::checks::CheckReport;
use crate::error::{MaError, Result};
use crate::geometry::{unit_ball_volume, ConvexDomain};
use crate::measures::{gauss5, MeasureSpec, Profile};

#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub report: CheckReport,
    /// `(m, sup over probes of ∫_{dist ≤ 1/m} |v|^{n+1} dν)`.
    pub collars: Vec<(u64, f64)>,
}

/// Boundary-defining function of an interval or ball in terms of the
/// boundary distance `d`, free of cancellation for small `d`.
pub fn defining_at_distance(domain: &ConvexDomain, d: f64) -> f64 {
    match domain {
        ConvexDomain::Interval { a, b } => (b - a - d) * d / (0.5 * (b - a)),
        ConvexDomain::Ball { radius, .. } => d * (2.0 * radius - d) / radius,
        ConvexDomain::Polygon { .. } => d,
    }
}

/// `−√ε ρ^{1/2+ε}` as a function of the boundary distance.
pub fn hardy_probe(domain: &ConvexDomain, eps: f64) -> Profile {
    let dom = domain.clone();
    Profile::new(format!("u_eps({eps})"), move |d| {
        -eps.sqrt() * defining_at_distance(&dom, d[0]).max(0.0).powf(0.5 + eps)
    })
}

/// Probes for level `m` in the boundary distance: `u_{1/m}`, `u_{1/4}`, the
/// cone and `−ρ`.
pub fn standard_probes(domain: &ConvexDomain, m: u64) -> Vec<Profile> {
    let inr = match domain {
        ConvexDomain::Interval { a, b } => 0.5 * (b - a),
        ConvexDomain::Ball { radius, .. } => *radius,
        ConvexDomain::Polygon { .. } => domain.diameter(),
    };
    let dom = domain.clone();
    vec![
        hardy_probe(domain, 1.0 / m as f64),
        hardy_probe(domain, 0.25),
        Profile::new("cone", move |d| -d[0] / inr),
        Profile::new("-rho", move |d| -defining_at_distance(&dom, d[0])),
    ]
}

/// Density of a generator in the boundary distance, for symmetric generators
/// on intervals and balls.
pub fn collar_density(spec: &MeasureSpec, domain: &ConvexDomain) -> Result<Profile> {
    let dom = domain.clone();
    match spec {
        MeasureSpec::Lebesgue => Ok(Profile::new("lebesgue", |_| 1.0)),
        MeasureSpec::Hardy { s } => {
            let s = *s;
            Ok(Profile::new(format!("hardy:s={s}"), move |d| defining_at_distance(&dom, d[0]).powf(-s)))
        }
        MeasureSpec::RadialDensity(f) => {
            let (f, r0) = (f.clone(), radius_of(domain)?);
            Ok(Profile::new(f.name().to_string(), move |d| f.eval(&[r0 - d[0]])))
        }
        MeasureSpec::Density(f) => {
            let f = f.clone();
            let p = move |d: f64| -> Vec<f64> {
                let mut x = dom.center();
                x[0] += radius_of(&dom).unwrap_or(0.0) - d;
                x
            };
            Ok(Profile::new(f.name().to_string(), move |d| f.eval(&p(d[0]))))
        }
        _ => Err(MaError::Unsupported(format!("no collar density for {}", spec.label()))),
    }
}

fn radius_of(domain: &ConvexDomain) -> Result<f64> {
    match domain {
        ConvexDomain::Interval { a, b } => Ok(0.5 * (b - a)),
        ConvexDomain::Ball { radius, .. } => Ok(*radius),
        ConvexDomain::Polygon { .. } => Err(MaError::Unsupported("collar integrals need an interval or a ball".into())),
    }
}

fn adaptive(a: f64, b: f64, f: &dyn Fn(f64) -> f64, whole: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let (l, r) = (gauss5(a, mid, f), gauss5(mid, b, f));
    if depth == 0 || (l + r - whole).abs() <= 1e-11 * (l + r).abs().max(1e-300) {
        return l + r;
    }
    adaptive(a, mid, f, l, depth - 1) + adaptive(mid, b, f, r, depth - 1)
}

/// `∫_0^δ g(d) dd` through `d = δe^{−t}`, which turns power singularities at
/// `d = 0` into exponentials. Quadrature stops at `d = 1e-100` and the
/// remaining tail is closed with the exponential rate fitted at the cutoff.
fn collar_integral(delta: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let h = |t: f64| {
        let d = delta * (-t).exp();
        g(d) * d
    };
    let t_max = (delta / 1e-100).ln();
    let panels = (t_max / 2.0).ceil() as usize;
    let w = t_max / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let (a, b) = (k as f64 * w, (k + 1) as f64 * w);
        total += adaptive(a, b, &h, gauss5(a, b, &h), 30);
    }
    let (h1, h2) = (h(t_max - 1.0), h(t_max));
    if h2 > 0.0 {
        let rate = (h1 / h2).ln();
        total += if rate > 0.0 { h2 / rate } else { f64::INFINITY };
    }
    total
}

/// Evaluates the boundary collar integrals `∫_{dist ≤ 1/m} |v|^{n+1} dν` for the
/// probes of each level. Densities and probes are functions of the boundary
/// distance `d` and are taken symmetric: both ends of an interval, every
/// direction of a ball. Passes when the last level is below `1e-3`.
pub fn check_vanishing_mass(
    domain: &ConvexDomain,
    density: &Profile,
    probes: &dyn Fn(u64) -> Vec<Profile>,
    schedule: &[u64],
) -> Result<VanishingReport> {
    if schedule.is_empty() || schedule.iter().any(|m| *m == 0) {
        return Err(MaError::Parameter("schedule must be nonempty with m >= 1".into()));
    }
    let n = domain.dim();
    let r0 = radius_of(domain)?;
    let shell = |d: f64| match domain {
        ConvexDomain::Ball { .. } => n as f64 * unit_ball_volume(n) * (r0 - d).powi(n as i32 - 1),
        _ => 2.0,
    };
    let mut collars = Vec::with_capacity(schedule.len());
    for &m in schedule {
        let delta = (1.0 / m as f64).min(r0);
        let mut worst: f64 = 0.0;
        for v in probes(m) {
            let g = |d: f64| v.eval(&[d]).abs().powi(n as i32 + 1) * density.eval(&[d]) * shell(d);
            worst = worst.max(collar_integral(delta, &g));
        }
        collars.push((m, worst));
    }
    let last = collars.last().map_or(f64::NAN, |c| c.1);
    Ok(VanishingReport {
        report: CheckReport::new(format!("vanishing_mass({})", density.name()), last, 1e-3, 0.0),
        collars,
    })
}
