//! Run configuration.
//!
//! ```toml
//! seed = 41445
//! output = "out"
//! tol = 1e-10
//! max_k = 200
//! m_schedule = [2, 4, 8, 16, 32, 64, 128, 256]
//! domain = { kind = "interval", a = -1.0, b = 1.0 }
//! mesh = { kind = "line", nodes = 801 }
//! measure = { kind = "hardy", s = 2.0 }
//!
//! [check]
//! suite = "blocki"
//! trials = 200
//!
//! [oracle]
//! name = "hardy_family"
//! params = { alpha = 0.25 }
//! ```
//!
//! Meshes are `line { nodes }`, `radial { nodes }`,
//! `radial_graded { uniform, graded, gap }` or `grid { n }`. Measures are
//! `lebesgue`, `hardy { s }`, `from_convex { q, v }` with `v` one of
//! [`PROFILES`], `oracle { name, params }` (the oracle's density) and
//! `atoms { atoms = [[[x, y], mass], ...] }`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ma_core::checks::{Suite, SEED};
use ma_core::dirichlet::{default_schedule, SolverBackend};
use ma_core::measures::{MeasureSpec, Profile};
use ma_core::oracles::{oracle, REGISTRY};
use ma_core::{ConvexDomain, Mesh};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Names accepted by `from_convex { v }`.
pub const PROFILES: [&str; 4] = ["sqrt_profile", "parabola", "cone", "power"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshConfig {
    Line { nodes: usize },
    Radial { nodes: usize },
    RadialGraded { uniform: usize, graded: usize, gap: f64 },
    Grid { n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureConfig {
    Lebesgue,
    Hardy {
        s: f64,
    },
    FromConvex {
        q: f64,
        v: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
    },
    Oracle {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Atoms {
        atoms: Vec<(Vec<f64>, f64)>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub suite: Option<String>,
    pub trials: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub name: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Sampling mesh size; no sampling when absent.
    pub mesh: Option<usize>,
    pub truncate: Option<u64>,
}

/// Every key is optional; [`RunConfig::resolve`] fills defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_k: Option<usize>,
    pub m_schedule: Option<Vec<u64>>,
    pub p: Option<f64>,
    pub backend: Option<SolverBackend>,
    pub domain: Option<ConvexDomain>,
    pub mesh: Option<MeshConfig>,
    pub measure: Option<MeasureConfig>,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

/// Fully resolved configuration; this is what the manifest hashes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub seed: u64,
    pub output: PathBuf,
    pub tol: f64,
    pub max_k: usize,
    pub m_schedule: Vec<u64>,
    pub p: Option<f64>,
    pub backend: Option<SolverBackend>,
    pub domain: ConvexDomain,
    pub mesh: MeshConfig,
    pub measure: MeasureConfig,
    pub suite: String,
    pub trials: usize,
    pub oracle: OracleConfig,
}

fn invalid(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: field.into(),
        msg: msg.into(),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses TOML; errors carry line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Fills defaults, applies `MA_SEED` and validates every field.
    pub fn resolve(self, env_seed: Option<&str>) -> Result<Resolved, CliError> {
        let mut seed = self.seed.unwrap_or(SEED);
        if let Some(s) = env_seed {
            seed = parse_seed(s).ok_or_else(|| invalid("MA_SEED", format!("not an integer: {s:?}")))?;
        }
        let domain = self.domain.unwrap_or(ConvexDomain::Interval { a: -1.0, b: 1.0 });
        domain.validate().map_err(|e| invalid("domain", e.to_string()))?;
        let mesh = self.mesh.unwrap_or(match domain {
            ConvexDomain::Interval { .. } => MeshConfig::Line { nodes: 801 },
            ConvexDomain::Ball { .. } if domain.dim() != 2 => MeshConfig::Radial { nodes: 401 },
            _ => MeshConfig::Grid { n: 33 },
        });
        let resolved = Resolved {
            seed,
            output: self.output.unwrap_or_else(|| PathBuf::from("out")),
            tol: self.tol.unwrap_or(1e-10),
            max_k: self.max_k.unwrap_or(200),
            m_schedule: self.m_schedule.unwrap_or_else(default_schedule),
            p: self.p,
            backend: self.backend,
            domain,
            mesh,
            measure: self.measure.unwrap_or(MeasureConfig::Lebesgue),
            suite: self.check.suite.unwrap_or_else(|| "maxprin".into()),
            trials: self.check.trials.unwrap_or(200),
            oracle: self.oracle,
        };
        resolved.validate()?;
        Ok(resolved)
    }
}

pub fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

impl Resolved {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_k == 0 {
            return Err(invalid("max_k", "must be at least 1"));
        }
        if self.m_schedule.is_empty() || self.m_schedule[0] == 0 || self.m_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("m_schedule", "must be nonempty, start at m >= 1 and increase strictly"));
        }
        if let Some(p) = self.p {
            if !p.is_finite() {
                return Err(invalid("p", "must be finite"));
            }
        }
        match (&self.mesh, &self.domain) {
            (MeshConfig::Line { nodes }, ConvexDomain::Interval { .. }) if *nodes >= 3 => {}
            (MeshConfig::Radial { nodes }, ConvexDomain::Ball { .. }) if *nodes >= 3 => {}
            (MeshConfig::RadialGraded { .. }, ConvexDomain::Ball { .. }) => {}
            (MeshConfig::Grid { n }, d) if d.dim() == 2 && *n >= 3 => {}
            (m, d) => return Err(invalid("mesh", format!("{m:?} does not fit the domain {d:?}"))),
        }
        self.measure_spec().map_err(|e| match e {
            CliError::Invalid { .. } => e,
            other => invalid("measure", other.to_string()),
        })?;
        self.suite.parse::<Suite>().map_err(|e| invalid("check.suite", e.to_string()))?;
        if self.trials == 0 {
            return Err(invalid("check.trials", "must be at least 1"));
        }
        if let Some(name) = &self.oracle.name {
            if !REGISTRY.contains(&name.as_str()) {
                return Err(invalid("oracle.name", format!("unknown oracle {name:?}; known: {}", REGISTRY.join(", "))));
            }
        }
        if self.oracle.mesh.is_some_and(|n| n < 3) {
            return Err(invalid("oracle.mesh", "must be at least 3"));
        }
        if self.oracle.truncate == Some(0) {
            return Err(invalid("oracle.truncate", "must be at least 1"));
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<Arc<Mesh>, CliError> {
        let d = &self.domain;
        let mesh = match self.mesh {
            MeshConfig::Line { nodes } => Mesh::line(d, nodes),
            MeshConfig::Radial { nodes } => Mesh::radial(d, nodes),
            MeshConfig::RadialGraded { uniform, graded, gap } => Mesh::radial_graded(d, uniform, graded, gap),
            MeshConfig::Grid { n } => Mesh::grid(d, n),
        };
        mesh.map(Arc::new).map_err(|e| invalid("mesh", e.to_string()))
    }

    pub fn measure_spec(&self) -> Result<MeasureSpec, CliError> {
        let spec = match &self.measure {
            MeasureConfig::Lebesgue => MeasureSpec::Lebesgue,
            MeasureConfig::Hardy { s } => MeasureSpec::hardy(*s),
            MeasureConfig::FromConvex { q, v, a } => MeasureSpec::FromConvex {
                v: profile(v, *a, &self.domain)?,
                q: *q,
            },
            MeasureConfig::Oracle { name, params } => {
                let ps: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
                let case = oracle(name, &ps).map_err(|e| invalid("measure.name", e.to_string()))?;
                if case.domain.as_ref() != Some(&self.domain) {
                    return Err(invalid("measure", format!("oracle {name} lives on {:?}", case.domain)));
                }
                MeasureSpec::Density(case.density)
            }
            MeasureConfig::Atoms { atoms } => MeasureSpec::Atoms(atoms.clone()),
        };
        spec.validate().map_err(|e| invalid("measure", e.to_string()))?;
        Ok(spec)
    }
}

/// Named convex profiles on the configured domain, in terms of the
/// boundary-defining function `ρ`. Radial meshes pass `[r]`.
pub fn profile(name: &str, a: Option<f64>, domain: &ConvexDomain) -> Result<Profile, CliError> {
    let dom = domain.clone();
    let rho = move |x: &[f64]| -> f64 {
        if x.len() == dom.dim() {
            dom.defining_function(x)
        } else {
            let mut p = dom.center();
            p[0] += x[0];
            dom.defining_function(&p)
        }
    };
    let c = domain.center();
    let dim = domain.dim();
    Ok(match name {
        "sqrt_profile" => Profile::new("sqrt_profile", move |x| -rho(x).max(0.0).sqrt()),
        "parabola" => Profile::new("parabola", move |x| -rho(x)),
        "cone" => {
            let dom = domain.clone();
            Profile::new("cone", move |x| {
                if x.len() == dim {
                    dom.gauge(&c, x).min(1.0) - 1.0
                } else {
                    let r = match &dom {
                        ConvexDomain::Ball { radius, .. } => x[0] / radius,
                        _ => x[0],
                    };
                    r.min(1.0) - 1.0
                }
            })
        }
        "power" => {
            let a = a.ok_or_else(|| invalid("measure.a", "the power profile needs an exponent a"))?;
            if !(a > 0.0 && a <= 1.0) {
                return Err(invalid("measure.a", format!("must lie in (0, 1], got {a}")));
            }
            Profile::new(format!("power:a={a}"), move |x| -rho(x).max(0.0).powf(a))
        }
        other => {
            return Err(invalid(
                "measure.v",
                format!("unknown profile {other:?}; known: {}", PROFILES.join(", ")),
            ))
        }
    })
}

/// `lebesgue`, `hardy:s=2`, `from_convex:q=1:v=sqrt_profile`,
/// `oracle:name=radial_alpha:n=1:alpha=0.5`.
pub fn parse_measure(s: &str) -> Result<MeasureConfig, CliError> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let mut kv = BTreeMap::new();
    for p in parts {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| invalid("measure", format!("expected key=value, got {p:?}")))?;
        kv.insert(k.to_string(), v.to_string());
    }
    let num = |k: &str| -> Result<f64, CliError> {
        kv.get(k)
            .ok_or_else(|| invalid("measure", format!("{kind} needs {k}=...")))?
            .parse()
            .map_err(|_| invalid("measure", format!("{k} is not a number")))
    };
    Ok(match kind {
        "lebesgue" => MeasureConfig::Lebesgue,
        "hardy" => MeasureConfig::Hardy { s: num("s")? },
        "from_convex" => MeasureConfig::FromConvex {
            q: num("q")?,
            v: kv.get("v").cloned().unwrap_or_else(|| "sqrt_profile".into()),
            a: kv.get("a").map(|_| num("a")).transpose()?,
        },
        "oracle" => {
            let name = kv
                .get("name")
                .cloned()
                .ok_or_else(|| invalid("measure", "oracle needs name=..."))?;
            let mut params = BTreeMap::new();
            for k in kv.keys().filter(|k| *k != "name") {
                params.insert(k.clone(), num(k)?);
            }
            MeasureConfig::Oracle { name, params }
        }
        other => return Err(invalid("measure", format!("unknown measure kind {other:?}"))),
    })
}

/// `2:256` doubles from 2 to 256; `2,4,8` lists levels.
pub fn parse_schedule(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || invalid("m_schedule", format!("cannot parse {s:?}"));
    if let Some((a, b)) = s.split_once(':') {
        let (mut m, hi): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if m == 0 || hi < m {
            return Err(bad());
        }
        let mut out = Vec::new();
        while m <= hi {
            out.push(m);
            m *= 2;
        }
        return Ok(out);
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

/// `interval:-1:1`, `ball:<dim>:<radius>`, `square`.
pub fn parse_domain(s: &str) -> Result<ConvexDomain, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| invalid("domain", format!("{t:?} is not a number")));
    let d = match parts.as_slice() {
        ["interval", a, b] => ConvexDomain::interval(num(a)?, num(b)?),
        ["ball", n, r] => {
            let n = n.parse::<usize>().map_err(|_| invalid("domain", "dimension must be an integer"))?;
            ConvexDomain::ball(vec![0.0; n], num(r)?)
        }
        ["square"] => Ok(ConvexDomain::unit_square()),
        _ => return Err(invalid("domain", format!("cannot parse {s:?}"))),
    };
    d.map_err(|e| invalid("domain", e.to_string()))
}
