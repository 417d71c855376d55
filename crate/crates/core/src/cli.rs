//! Command-line front end. Exit codes: 0 success, 1 input error, 2 contract
//! violation.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dsquare::{build_chain, default_levels, ChainConfig, DegreePolicy, DerandChain};
use crate::error::{Error, Result};
use crate::expander::{build_expander, ExpanderSpec};
use crate::harness::run_harness;
use crate::io::{emit_matrix, emit_vector, parse_graph, parse_vector};
use crate::metrics::MetricsSnapshot;
use crate::multigraph::regularize;
use crate::pinv::Backend;
use crate::solver::{self, ChainPolicy, SolverConfig, WalkKind, WalkQuery, WalkReport};

#[derive(Debug, Parser)]
#[command(name = "lapinv", version, about = "Laplacian pseudoinverses and random-walk statistics by derandomized squaring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate (D − A)⁺: dense rows, or streamed `i j value` entries.
    Pinv {
        #[command(flatten)]
        common: RunConfig,
        /// Entry to stream as `i,j` (repeatable); all entries when absent.
        #[arg(long = "entry", value_parser = parse_pair)]
        entries: Vec<(usize, usize)>,
    },
    /// Solve (D − A)x = b.
    Solve {
        #[command(flatten)]
        common: RunConfig,
        /// Right-hand side, one decimal per line.
        #[arg(long)]
        b: PathBuf,
    },
    /// Hitting time from u to v.
    Hit {
        #[command(flatten)]
        common: RunConfig,
        #[command(flatten)]
        pair: Pair,
    },
    /// Commute time between u and v.
    Commute {
        #[command(flatten)]
        common: RunConfig,
        #[command(flatten)]
        pair: Pair,
    },
    /// Probability, from every vertex, of reaching u before v.
    Escape {
        #[command(flatten)]
        common: RunConfig,
        #[command(flatten)]
        pair: Pair,
    },
    /// Build (or re-verify) a small-bias generator multiset over F₂^t.
    Expander {
        #[arg(long, required_unless_present = "spec")]
        t: Option<u32>,
        #[arg(long, required_unless_present = "spec")]
        mu: Option<f64>,
        /// Previously emitted JSON to re-verify.
        #[arg(long, conflicts_with_all = ["t", "mu"])]
        spec: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Per-level degrees, λ and certificates of the squaring chain.
    DsquareStats {
        #[command(flatten)]
        common: RunConfig,
        /// Skip dense λ measurements.
        #[arg(long)]
        no_measure: bool,
    },
    /// Run the randomized property harness.
    Verify {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Dense,
    Entrywise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainArg {
    Exact,
    Derandomized,
}

#[derive(Debug, Clone, Args)]
pub struct Pair {
    #[arg(long)]
    pub u: usize,
    #[arg(long)]
    pub v: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Edge list: `u v [mult]` per line.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Squaring chain: true squares, or derandomized with Cayley expanders.
    #[arg(long, value_enum, default_value_t = ChainArg::Exact)]
    pub chain: ChainArg,
    /// Expander bias (derandomized chain); default 1/(30k).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Number of squaring levels.
    #[arg(long)]
    pub k: Option<usize>,
    /// Shared expander degree (derandomized chain).
    #[arg(long, conflicts_with = "per_level")]
    pub c: Option<usize>,
    /// Build each level's expander over that level's label space.
    #[arg(long)]
    pub per_level: bool,
    #[arg(long, value_enum, default_value_t = BackendArg::Dense)]
    pub backend: BackendArg,
    /// Project b onto the image of the Laplacian instead of rejecting it.
    #[arg(long)]
    pub project: bool,
    /// Handle disconnected graphs component by component.
    #[arg(long)]
    pub auto_split: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `i,j`, got {s:?}"))?;
    let i = a.trim().parse().map_err(|_| format!("bad row index {a:?}"))?;
    let j = b.trim().parse().map_err(|_| format!("bad column index {b:?}"))?;
    Ok((i, j))
}

impl RunConfig {
    /// Check overrides before any work is done.
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid(format!("--eps {} must be positive", self.eps)));
        }
        let derand = self.chain == ChainArg::Derandomized;
        if let Some(mu) = self.mu {
            if !derand {
                return Err(Error::invalid("--mu needs --chain derandomized"));
            }
            if !(mu > 0.0 && mu < 1.0) {
                return Err(Error::invalid(format!("--mu {mu} must lie in (0, 1)")));
            }
        }
        if let Some(c) = self.c {
            if !derand {
                return Err(Error::invalid("--c needs --chain derandomized"));
            }
            if c == 0 || !c.is_power_of_two() {
                return Err(Error::invalid(format!("--c {c} must be a power of two")));
            }
        }
        if self.per_level && !derand {
            return Err(Error::invalid("--per-level needs --chain derandomized"));
        }
        if self.auto_split && self.backend == BackendArg::Entrywise {
            return Err(Error::invalid("--auto-split is only available with the dense backend"));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        let chain = match self.chain {
            ChainArg::Exact => ChainPolicy::ExactSquaring,
            ChainArg::Derandomized => ChainPolicy::Derandomized {
                mu: self.mu,
                degrees: if self.per_level {
                    DegreePolicy::PerLevel
                } else {
                    DegreePolicy::Shared(self.c)
                },
            },
        };
        SolverConfig {
            chain,
            k: self.k,
            backend: match self.backend {
                BackendArg::Dense => Backend::Dense,
                BackendArg::Entrywise => Backend::Entrywise,
            },
            project: self.project,
            auto_split: self.auto_split,
        }
    }
}

fn sink(output: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct PinvReport {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<(usize, usize, f64)>>,
    eps_requested: f64,
    eps_certified: f64,
    delta_chain: f64,
    f: u64,
    k: usize,
    mu: Option<f64>,
    c: Vec<Option<u64>>,
    boost_iterations: usize,
    metrics: MetricsSnapshot,
}

fn cmd_pinv(cfg: &RunConfig, entries: &[(usize, usize)], out: &mut dyn Write) -> Result<()> {
    let g = parse_graph(&cfg.graph)?;
    let n = g.n();
    for &(i, j) in entries {
        for x in [i, j] {
            if x >= n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
        }
    }
    let result = solver::approx_pinv(&g, cfg.eps, &cfg.solver_config())?;
    let streaming = cfg.backend == BackendArg::Entrywise || !entries.is_empty();
    let (matrix, list) = if streaming {
        let pairs: Vec<(usize, usize)> = if entries.is_empty() {
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
        } else {
            entries.to_vec()
        };
        let mut list = Vec::with_capacity(pairs.len());
        for (i, j) in pairs {
            list.push((i, j, result.pinv.entry(i, j)?));
        }
        (None, Some(list))
    } else {
        (Some(result.pinv.to_dense()?), None)
    };
    let text = match cfg.report {
        ReportFormat::Plain => match (&matrix, &list) {
            (Some(m), _) => emit_matrix(m),
            (_, Some(l)) => l.iter().map(|(i, j, x)| format!("{i} {j} {x:?}\n")).collect(),
            _ => unreachable!(),
        },
        ReportFormat::Json => {
            let info = &result.info;
            json(&PinvReport {
                n,
                matrix: matrix.map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect()),
                entries: list,
                eps_requested: cfg.eps,
                eps_certified: info.eps_certified,
                delta_chain: info.delta_chain,
                f: info.f,
                k: info.k,
                mu: info.mu,
                c: info.c.clone(),
                boost_iterations: info.boost_iterations,
                metrics: result.metrics(),
            })?
        }
    };
    sink(&cfg.output, &text, out)
}

fn cmd_solve(cfg: &RunConfig, b: &std::path::Path, out: &mut dyn Write) -> Result<()> {
    let g = parse_graph(&cfg.graph)?;
    let b = parse_vector(b)?;
    let rep = solver::solve(&g, &b, cfg.eps, &cfg.solver_config())?;
    let text = match cfg.report {
        ReportFormat::Json => json(&rep)?,
        ReportFormat::Plain => emit_vector(&rep.x),
    };
    sink(&cfg.output, &text, out)
}

fn cmd_walk(cfg: &RunConfig, pair: &Pair, kind: WalkKind, out: &mut dyn Write) -> Result<()> {
    let g = parse_graph(&cfg.graph)?;
    let q = WalkQuery {
        u: pair.u,
        v: pair.v,
        kind,
        eps: cfg.eps,
    };
    let rep: WalkReport = solver::walk(&g, &q, &cfg.solver_config())?;
    let text = match cfg.report {
        ReportFormat::Json => json(&rep)?,
        ReportFormat::Plain => match (&rep.value, &rep.p) {
            (Some(v), _) => format!("{v:?}\n"),
            (_, Some(p)) => emit_vector(p),
            _ => unreachable!(),
        },
    };
    sink(&cfg.output, &text, out)
}

fn cmd_expander(t: Option<u32>, mu: Option<f64>, spec: &Option<PathBuf>, output: &Option<PathBuf>, out: &mut dyn Write) -> Result<()> {
    let spec = match spec {
        Some(path) => ExpanderSpec::from_json(&std::fs::read_to_string(path)?)?,
        None => build_expander(t.unwrap(), mu.unwrap())?,
    };
    let mut text = spec.to_json()?;
    text.push('\n');
    sink(output, &text, out)
}

fn cmd_stats(cfg: &RunConfig, measure: bool, out: &mut dyn Write) -> Result<()> {
    let g = parse_graph(&cfg.graph)?;
    if !g.is_connected() {
        return Err(Error::Disconnected {
            components: g.components().len(),
        });
    }
    let reg = regularize(&g)?;
    let k = cfg.k.unwrap_or_else(|| default_levels(reg.f, g.n()));
    let chain = match cfg.solver_config().chain {
        ChainPolicy::ExactSquaring => DerandChain::exact_squaring(reg.graph, k)?,
        ChainPolicy::Derandomized { mu, degrees } => {
            let mu = mu.unwrap_or(1.0 / (30.0 * k.max(1) as f64));
            build_chain(reg.graph, &ChainConfig { mu, k, degrees })?
        }
    };
    let stats = chain.stats(measure)?;
    let text = match cfg.report {
        ReportFormat::Json => json(&stats)?,
        ReportFormat::Plain => {
            let mut s = String::from("level degree_log2 expander lambda_h lambda_bound lambda_measured\n");
            for l in &stats.levels {
                s.push_str(&format!(
                    "{} {} {} {} {} {}\n",
                    l.level,
                    l.degree_log2,
                    l.expander,
                    opt(l.lambda_h),
                    opt(l.lambda_bound),
                    opt(l.lambda_measured)
                ));
            }
            s
        }
    };
    sink(&cfg.output, &text, out)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:?}"))
}

fn cmd_verify(instances: usize, seed: u64, output: &Option<PathBuf>, out: &mut dyn Write) -> Result<bool> {
    let rep = run_harness(seed, instances)?;
    sink(output, &json(&rep)?, out)?;
    Ok(rep.pass)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Pinv { common, entries } => {
            common.validate()?;
            cmd_pinv(&common, &entries, out)?;
        }
        Command::Solve { common, b } => {
            common.validate()?;
            cmd_solve(&common, &b, out)?;
        }
        Command::Hit { common, pair } => {
            common.validate()?;
            cmd_walk(&common, &pair, WalkKind::Hitting, out)?;
        }
        Command::Commute { common, pair } => {
            common.validate()?;
            cmd_walk(&common, &pair, WalkKind::Commute, out)?;
        }
        Command::Escape { common, pair } => {
            common.validate()?;
            cmd_walk(&common, &pair, WalkKind::Escape, out)?;
        }
        Command::Expander { t, mu, spec, output } => cmd_expander(t, mu, &spec, &output, out)?,
        Command::DsquareStats { common, no_measure } => {
            common.validate()?;
            cmd_stats(&common, !no_measure, out)?;
        }
        Command::Verify { instances, seed, output } => {
            if !cmd_verify(instances, seed, &output, out)? {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_contract_violation() {
        2
    } else {
        1
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            let kind = if code == 2 { "contract violation" } else { "input error" };
            let _ = writeln!(err, "lapinv: {kind}: {e}");
            code
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
