use std::sync::Arc;

use ma_core::checks::{run_suite, CheckReport, Suite};
use ma_core::dirichlet::{solve_dirichlet_singular, solve_power, LevelRow, SolverBackend};
use ma_core::eigen::eigen_ladder;
use ma_core::oracles::{oracle, sample, OracleCase};
use ma_core::{ConvexDomain, Mesh};
use serde::Serialize;

use crate::config::Resolved;
use crate::output::{num, Artifacts, FnDump, MeasureDump};
use crate::repro;
use crate::CliError;

/// Outcome of a subcommand: `pass` selects exit code 0 or 1.
pub struct Status {
    pub pass: bool,
    pub summary: String,
}

fn level_rows(levels: &[LevelRow]) -> Vec<Vec<String>> {
    levels
        .iter()
        .map(|l| vec![l.m.to_string(), num(l.sup_gap), num(l.residual), num(l.energy)])
        .collect()
}

const LEVEL_HEADER: [&str; 4] = ["m [level]", "sup_gap [sup norm]", "residual [mass]", "energy [energy]"];

pub fn solve(cfg: &Resolved) -> Result<Status, CliError> {
    let mesh = cfg.build_mesh()?;
    if let Some(b) = cfg.backend {
        if b != SolverBackend::for_mesh(&mesh) {
            return Err(CliError::Invalid {
                field: "backend".into(),
                msg: format!("{b:?} does not match the {:?} mesh", mesh.kind()),
            });
        }
    }
    let spec = cfg.measure_spec()?;
    let mut out = Artifacts::create(&cfg.output)?;
    #[derive(Serialize)]
    struct SolveJson {
        measure: String,
        p: Option<f64>,
        solution: FnDump,
        residual: f64,
        iterations: usize,
        weighted_mass: Option<String>,
        cauchy: Option<bool>,
        bound: Option<(f64, f64)>,
        sup_bounds: Option<(f64, f64)>,
        warnings: Vec<String>,
    }
    let (json, levels) = match cfg.p {
        Some(p) => {
            let rep = solve_power(&mesh, &spec, p, cfg.tol, &cfg.m_schedule)?;
            let json = SolveJson {
                measure: spec.label(),
                p: Some(p),
                solution: (&rep.report.solution).into(),
                residual: rep.report.residual,
                iterations: rep.report.iterations,
                weighted_mass: None,
                cauchy: None,
                bound: None,
                sup_bounds: Some((rep.sup_lower, rep.sup_upper)),
                warnings: Vec::new(),
            };
            (json, rep.levels)
        }
        None => {
            let rep = solve_dirichlet_singular(&mesh, &spec, None, &cfg.m_schedule, cfg.tol)?;
            let json = SolveJson {
                measure: spec.label(),
                p: None,
                solution: (&rep.report.solution).into(),
                residual: rep.report.residual,
                iterations: rep.report.iterations,
                weighted_mass: Some(rep.weighted_mass.to_string()),
                cauchy: Some(rep.cauchy),
                bound: Some((rep.bound_lhs, rep.bound_rhs)),
                sup_bounds: None,
                warnings: rep.warnings,
            };
            (json, rep.levels)
        }
    };
    let summary = format!(
        "solved {} on {} nodes, {} levels, residual {:.2e}",
        json.measure,
        mesh.len(),
        levels.len(),
        json.residual
    );
    out.json("result.json", &json)?;
    out.csv("ledger.csv", &LEVEL_HEADER, level_rows(&levels))?;
    out.finish("solve", cfg)?;
    Ok(Status { pass: true, summary })
}

pub fn eigen(cfg: &Resolved) -> Result<Status, CliError> {
    let mesh = cfg.build_mesh()?;
    let spec = cfg.measure_spec()?;
    let ladder = eigen_ladder(&mesh, &spec, &cfg.m_schedule, cfg.tol, cfg.max_k)?;
    let mut out = Artifacts::create(&cfg.output)?;
    out.csv(
        "ladder.csv",
        &["m [level]", "lambda_m [1]", "iters [count]", "residual [relative]"],
        ladder
            .rungs
            .iter()
            .map(|r| vec![r.m.to_string(), num(r.lambda), r.iterations.to_string(), num(r.residual)]),
    )?;
    out.csv(
        "ledger.csv",
        &[
            "m [level]",
            "step [count]",
            "energy [energy]",
            "norm [L^(n+1) power]",
            "rayleigh [1]",
            "residual [relative]",
            "sup_change [sup norm]",
        ],
        ladder.rungs.iter().flat_map(|r| {
            r.ledger.iter().map(move |row| {
                vec![
                    r.m.to_string(),
                    row.step.to_string(),
                    num(row.energy),
                    num(row.norm),
                    num(row.rayleigh),
                    num(row.residual),
                    num(row.sup_change),
                ]
            })
        }),
    )?;
    #[derive(Serialize)]
    struct EigenJson {
        measure: String,
        ladder: Vec<(u64, f64)>,
        limit: f64,
        limit_single: f64,
        eigenfunction: Option<FnDump>,
        warnings: Vec<String>,
    }
    let summary = format!("{} rungs, extrapolated limit {:.6}", ladder.rungs.len(), ladder.limit);
    out.json(
        "result.json",
        &EigenJson {
            measure: spec.label(),
            ladder: ladder.pairs(),
            limit: ladder.limit,
            limit_single: ladder.limit_single,
            eigenfunction: ladder.eigenfunction.as_ref().map(FnDump::from),
            warnings: ladder.warnings.clone(),
        },
    )?;
    out.finish("eigen", cfg)?;
    Ok(Status { pass: true, summary })
}

fn check_rows(rows: &[CheckReport]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.name.clone(),
                num(r.lhs),
                num(r.rhs),
                num(r.slack),
                num(r.tol),
                r.pass.to_string(),
                r.digest.clone(),
            ]
        })
        .collect()
}

const CHECK_HEADER: [&str; 7] = [
    "name",
    "lhs [check units]",
    "rhs [check units]",
    "slack [check units]",
    "tol [check units]",
    "pass [bool]",
    "digest [fnv1a]",
];

pub fn check(cfg: &Resolved) -> Result<Status, CliError> {
    let suite: Suite = cfg.suite.parse()?;
    let rows = run_suite(suite, cfg.trials, cfg.seed)?;
    let failures: Vec<&CheckReport> = rows.iter().filter(|r| !r.pass).collect();
    let mut out = Artifacts::create(&cfg.output)?;
    out.csv("checks.csv", &CHECK_HEADER, check_rows(&rows))?;
    #[derive(Serialize)]
    struct CheckJson<'a> {
        suite: &'a str,
        trials: usize,
        seed: u64,
        rows: usize,
        failed: usize,
        failures: Vec<&'a CheckReport>,
    }
    out.json(
        "result.json",
        &CheckJson {
            suite: suite.name(),
            trials: cfg.trials,
            seed: cfg.seed,
            rows: rows.len(),
            failed: failures.len(),
            failures: failures.clone(),
        },
    )?;
    out.finish("check", cfg)?;
    Ok(Status {
        pass: failures.is_empty(),
        summary: format!("{suite}: {} of {} checks pass", rows.len() - failures.len(), rows.len()),
    })
}

fn oracle_mesh(case: &OracleCase, nodes: usize) -> Result<Arc<Mesh>, CliError> {
    let domain = case.domain.as_ref().ok_or_else(|| CliError::Invalid {
        field: "oracle.mesh".into(),
        msg: format!("{} has no mesh-compatible domain", case.name),
    })?;
    let mesh = match domain {
        ConvexDomain::Interval { .. } => Mesh::line(domain, nodes)?,
        ConvexDomain::Ball { .. } if case.dim == 2 && case.name == "mixed_parabola_cone" => Mesh::grid(domain, nodes)?,
        ConvexDomain::Ball { .. } => Mesh::radial(domain, nodes)?,
        ConvexDomain::Polygon { .. } => Mesh::grid(domain, nodes)?,
    };
    Ok(Arc::new(mesh))
}

pub fn oracle_cmd(cfg: &Resolved) -> Result<Status, CliError> {
    let name = cfg.oracle.name.clone().ok_or_else(|| CliError::Invalid {
        field: "oracle.name".into(),
        msg: "an oracle name is required".into(),
    })?;
    let params: Vec<(&str, f64)> = cfg.oracle.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let case = oracle(&name, &params)?;
    let residual = case.max_residual(1000);
    let mut out = Artifacts::create(&cfg.output)?;
    #[derive(Serialize)]
    struct Sampled {
        function: FnDump,
        measure: MeasureDump,
    }
    let sampled = match cfg.oracle.mesh {
        Some(nodes) => {
            let mesh = oracle_mesh(&case, nodes)?;
            let (u, nu) = sample(&case, &mesh, cfg.oracle.truncate)?;
            let lumped = nu.lumped();
            out.csv(
                "oracle.csv",
                &["x [coordinates]", "u [value]", "nu [mass]"],
                (0..mesh.len()).map(|i| {
                    let x: Vec<String> = mesh.node(i).iter().map(|c| num(*c)).collect();
                    vec![x.join(" "), num(u.value(i)), num(lumped[i])]
                }),
            )?;
            Some(Sampled {
                function: (&u).into(),
                measure: (&nu).into(),
            })
        }
        None => None,
    };
    #[derive(Serialize)]
    struct OracleJson {
        name: String,
        params: Vec<(String, f64)>,
        dim: usize,
        domain: Option<ConvexDomain>,
        lambda: Option<f64>,
        identity: String,
        singular: String,
        functions: Vec<String>,
        density: String,
        max_residual: f64,
        sample: Option<Sampled>,
    }
    out.json(
        "result.json",
        &OracleJson {
            name: case.name.clone(),
            params: case.params.clone(),
            dim: case.dim,
            domain: case.domain.clone(),
            lambda: case.lambda,
            identity: case.identity.clone(),
            singular: format!("{:?}", case.singular).to_lowercase(),
            functions: case.functions.iter().map(|f| f.name().to_string()).collect(),
            density: case.density.name().to_string(),
            max_residual: residual,
            sample: sampled,
        },
    )?;
    out.finish("oracle", cfg)?;
    let lambda = case.lambda.map_or("none".into(), |l| format!("{l}"));
    Ok(Status {
        pass: residual < 1e-8,
        summary: format!("{}: lambda {lambda}, identity residual {residual:.2e}", case.name),
    })
}

pub fn repro_cmd(cfg: &Resolved, only: &[u32]) -> Result<Status, CliError> {
    let results = repro::run(only);
    let mut out = Artifacts::create(&cfg.output)?;
    out.csv(
        "repro.csv",
        &["criterion [id]", "name", "pass [bool]", "value [criterion units]", "detail"],
        results.iter().map(|c| {
            vec![
                c.id.to_string(),
                c.name.clone(),
                c.pass.to_string(),
                num(c.value),
                c.detail.clone(),
            ]
        }),
    )?;
    out.json("result.json", &results)?;
    out.finish("repro", cfg)?;
    let mut table = String::new();
    for c in &results {
        table.push_str(&format!(
            "{:>2} {:<30} {}  {}\n",
            c.id,
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        ));
    }
    let passed = results.iter().filter(|c| c.pass).count();
    table.push_str(&format!("{passed}/{} criteria pass", results.len()));
    Ok(Status {
        pass: passed == results.len(),
        summary: table,
    })
}
