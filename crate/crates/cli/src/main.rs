use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ma_cli::commands::{self, Status};
use ma_cli::config::{parse_domain, parse_measure, parse_schedule, parse_seed, MeshConfig, RunConfig};
use ma_cli::CliError;
use ma_core::dirichlet::SolverBackend;

/// Monge–Ampère solvers, eigenvalue ladders and inequality checks.
#[derive(Parser)]
#[command(name = "ma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed (decimal or 0x-hex); overrides MA_SEED and the config.
    #[arg(long, global = true)]
    seed: Option<String>,
    /// `interval:-1:1`, `ball:<dim>:<radius>` or `square`.
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Mesh size: nodes of a line or radial mesh, points per side of a grid.
    #[arg(long, global = true)]
    mesh: Option<usize>,
    /// `lebesgue`, `hardy:s=2`, `from_convex:q=1:v=sqrt_profile`, `oracle:name=...`.
    #[arg(long, global = true)]
    measure: Option<String>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// `2:256` (doubling) or `2,4,8`.
    #[arg(long = "m-schedule", global = true)]
    m_schedule: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Dirichlet problem along a truncation schedule, or `μ_u = |u|^p ν` with `--p`.
    Solve {
        /// pl1d, radial or op2d; must match the mesh.
        #[arg(long, value_parser = parse_backend)]
        backend: Option<SolverBackend>,
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Eigenvalue ladder by inverse iteration.
    Eigen {
        #[arg(long = "max-k")]
        max_k: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs a check suite.
    Check {
        /// maxprin, blocki, energy, envelope, eigen-cert or vanishing.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Dumps a closed-form case, sampled when `--mesh` is given.
    Oracle {
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        /// Extra parameter as key=value.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Truncation level for boundary-singular densities.
        #[arg(long)]
        truncate: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the acceptance criteria and prints a pass/fail table.
    Repro {
        /// Criterion ids to run (all by default).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_backend(s: &str) -> Result<SolverBackend, String> {
    match s {
        "pl1d" => Ok(SolverBackend::Pl1d),
        "radial" => Ok(SolverBackend::Radial),
        "op2d" => Ok(SolverBackend::Op2d),
        _ => Err(format!("unknown backend {s:?}; expected pl1d, radial or op2d")),
    }
}

fn invalid(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: field.into(),
        msg: msg.into(),
    }
}

fn apply_common(cfg: &mut RunConfig, c: &Common) -> Result<(), CliError> {
    if let Some(d) = &c.domain {
        cfg.domain = Some(parse_domain(d)?);
    }
    if let Some(n) = c.mesh {
        let domain = cfg.domain.clone().unwrap_or(ma_core::ConvexDomain::Interval { a: -1.0, b: 1.0 });
        cfg.mesh = Some(match (&cfg.mesh, &domain) {
            (Some(MeshConfig::Radial { .. }), _) => MeshConfig::Radial { nodes: n },
            (Some(MeshConfig::Grid { .. }), _) => MeshConfig::Grid { n },
            (_, ma_core::ConvexDomain::Interval { .. }) => MeshConfig::Line { nodes: n },
            (_, d) if d.dim() == 2 => MeshConfig::Grid { n },
            _ => MeshConfig::Radial { nodes: n },
        });
    }
    if let Some(m) = &c.measure {
        cfg.measure = Some(parse_measure(m)?);
    }
    if c.tol.is_some() {
        cfg.tol = c.tol;
    }
    if let Some(s) = &c.m_schedule {
        cfg.m_schedule = Some(parse_schedule(s)?);
    }
    if let Some(o) = &c.out {
        cfg.output = Some(o.clone());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let common = match &cli.command {
        Command::Solve { common, .. }
        | Command::Eigen { common, .. }
        | Command::Check { common, .. }
        | Command::Oracle { common, .. }
        | Command::Repro { common, .. } => common.clone(),
    };
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    apply_common(&mut cfg, &common)?;
    match &cli.command {
        Command::Solve { backend, p, .. } => {
            cfg.backend = backend.or(cfg.backend);
            cfg.p = p.or(cfg.p);
        }
        Command::Eigen { max_k, .. } => cfg.max_k = max_k.or(cfg.max_k),
        Command::Check { suite, trials, .. } => {
            cfg.check.suite = suite.clone().or(cfg.check.suite.take());
            cfg.check.trials = trials.or(cfg.check.trials);
        }
        Command::Oracle {
            name,
            alpha,
            n,
            k,
            a,
            m,
            params,
            truncate,
            ..
        } => {
            cfg.oracle.name = name.clone().or(cfg.oracle.name.take());
            let mut extra = BTreeMap::new();
            for (key, v) in [("alpha", alpha), ("n", n), ("k", k), ("a", a), ("m", m)] {
                if let Some(v) = v {
                    extra.insert(key.to_string(), *v);
                }
            }
            for p in params {
                let (key, v) = p.split_once('=').ok_or_else(|| invalid("param", format!("expected key=value, got {p:?}")))?;
                let v: f64 = v.parse().map_err(|_| invalid("param", format!("{key} is not a number")))?;
                extra.insert(key.to_string(), v);
            }
            cfg.oracle.params.extend(extra);
            if common.mesh.is_some() {
                cfg.oracle.mesh = common.mesh;
            }
            cfg.oracle.truncate = truncate.or(cfg.oracle.truncate);
        }
        Command::Repro { .. } => {}
    }
    let env_seed = std::env::var("MA_SEED").ok();
    let mut resolved = cfg.resolve(env_seed.as_deref())?;
    if let Some(s) = &common.seed {
        resolved.seed = parse_seed(s).ok_or_else(|| invalid("seed", format!("not an integer: {s:?}")))?;
    }
    match &cli.command {
        Command::Solve { .. } => commands::solve(&resolved),
        Command::Eigen { .. } => commands::eigen(&resolved),
        Command::Check { .. } => commands::check(&resolved),
        Command::Oracle { .. } => commands::oracle_cmd(&resolved),
        Command::Repro { only, .. } => commands::repro_cmd(&resolved, only),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => {
            println!("{}", status.summary);
            ExitCode::from(if status.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
