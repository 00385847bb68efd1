//! Subcommands and the exit-code contract.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dsmc_core::logic::{
    clause_models, logic_estimate, translate_to_set_problem, ClauseQuery, Literal, LogicError, LogicProblem,
};
use dsmc_core::{
    bel_from_mass, combine_all_with, conflict_estimate, conflict_exact, enumerate_outcomes, estimate, plan_trials,
    pl_from_mass, CombineError, EvidenceProblem, ExactLimits, FocalSet, McError, TrialEngineConfig,
};
use thiserror::Error;

use crate::bench::{run_bench, sig7, BenchConfig, BenchSummary, CSV_HEADER};
use crate::format::{
    parse_clause_query, parse_logic_problem, parse_set_problem, parse_set_query, render_clause, render_problem,
    render_set, FormatError, ProblemText,
};
use crate::generate::{generate_measured, tune_to_conflict, GenerateError, GeneratorConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFLICT: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Resource(String),
    #[error("output error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Conflict(_) => EXIT_CONFLICT,
            CliError::Resource(_) => EXIT_RESOURCE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::ExcessiveConflict { .. } => CliError::Conflict(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<CombineError> for CliError {
    fn from(e: CombineError) -> Self {
        match e {
            CombineError::TotalConflict => CliError::Conflict(e.to_string()),
            e if e.is_resource_limit() => CliError::Resource(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<LogicError> for CliError {
    fn from(e: LogicError) -> Self {
        match e {
            LogicError::ExcessiveConflict { .. } => CliError::Conflict(e.to_string()),
            LogicError::TooManyAtoms { .. } => CliError::Resource(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::Mc(m) => m.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

/// Monte-Carlo belief estimation for Dempster-Shafer evidence.
#[derive(Debug, Parser)]
#[command(name = "dsmc", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate Bel(b) for each query by Monte-Carlo trials.
    Estimate(EstimateArgs),
    /// Compute Bel and Pl exactly by Dempster's rule or by enumeration.
    Exact(ExactArgs),
    /// Estimate the conflict κ and the mean number of draws per trial.
    Conflict(ConflictArgs),
    /// Time Monte-Carlo against exact combination over an (m, n) grid.
    #[command(long_about = BENCH_HELP)]
    Bench(BenchArgs),
    /// Write a random problem of simple support functions.
    Generate(GenerateArgs),
    /// Parse and check a problem file.
    Validate(ProblemArgs),
}

const BENCH_HELP: &str = "Time Monte-Carlo against exact combination over an (m, n) grid.

Each cell generates m simple support functions over x1..xn, runs the trial \
estimator and the mass-space combination (each timed as the median of the \
repetitions), and writes one CSV row to standard output. A summary goes to \
standard error.

CSV columns, in order:
  m, n             grid cell
  density          focus density used by the generator
  kappa_hat        estimated conflict from the trial run
  draws_per_trial  mean draws of ε per accepted trial
  trials           N
  mc_ms            Monte-Carlo wall time in milliseconds
  exact_ms         exact wall time in milliseconds, or \"capped\"
  mc_value         Monte-Carlo estimate of Bel(query)
  exact_value      exact Bel(query), empty when capped
  abs_error        |mc_value - exact_value|, empty when either is missing
  status           ok, or the reason a cell failed or was capped";

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Problem file.
    #[arg(long, value_name = "PATH")]
    pub problem: PathBuf,
    /// Read a logic problem ('atoms:' header); queries become clauses like "p | !q".
    #[arg(long)]
    pub logic: bool,
}

#[derive(Debug, Args)]
pub struct TrialArgs {
    /// Number of accepted trials.
    #[arg(long, value_name = "N", conflicts_with = "accuracy")]
    pub trials: Option<u64>,
    /// Plan N so that three standard deviations stay within K.
    #[arg(long, value_name = "K")]
    pub accuracy: Option<f64>,
    #[arg(long, value_name = "U64", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "W", default_value_t = 1)]
    pub workers: usize,
    /// Most rejected draws tolerated within one trial.
    #[arg(long, value_name = "R", default_value_t = 10_000)]
    pub restart_cap: u64,
}

pub const DEFAULT_TRIALS: u64 = 10_000;

impl TrialArgs {
    // Trial count plus a note when it was planned from an accuracy.
    fn resolve(&self) -> Result<(TrialEngineConfig, Option<String>), CliError> {
        let (trials, note) = match (self.trials, self.accuracy) {
            (Some(n), _) => (n, None),
            (None, Some(k)) => {
                let n = plan_trials(k)?;
                (n, Some(format!("planned N={n} trials for accuracy {k}")))
            }
            (None, None) => (DEFAULT_TRIALS, None),
        };
        let cfg = TrialEngineConfig {
            trials,
            seed: self.seed,
            restart_cap: self.restart_cap,
            worker_count: self.workers,
            ..TrialEngineConfig::default()
        };
        Ok((cfg, note))
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Query set such as "{x1 x2}", or "*" for the whole frame. Repeatable.
    #[arg(long = "query", value_name = "SETEXPR", required = true)]
    pub queries: Vec<String>,
    #[command(flatten)]
    pub trials: TrialArgs,
    /// Step budget per trial (logic problems only).
    #[arg(long, value_name = "STEPS")]
    pub budget: Option<u64>,
    /// Use the simple-support trial when every source qualifies.
    #[arg(long)]
    pub fast_path: bool,
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactMethod {
    /// Fold Dempster's rule over the sources' mass functions.
    Mass,
    /// Walk the product of the sources' outcome spaces.
    Enumerate,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Query set such as "{x1 x2}", or "*" for the whole frame. Repeatable.
    #[arg(long = "query", value_name = "SETEXPR", required = true)]
    pub queries: Vec<String>,
    #[arg(long, value_enum, default_value_t = ExactMethod::Mass)]
    pub method: ExactMethod,
    /// Most focal sets an intermediate combination may hold.
    #[arg(long, value_name = "COUNT", default_value_t = 1 << 20)]
    pub max_focal_sets: usize,
    /// Largest outcome space enumeration will walk.
    #[arg(long, value_name = "COUNT", default_value_t = 10_000_000)]
    pub max_outcomes: u128,
    /// Give up after this many seconds.
    #[arg(long, value_name = "SECS")]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct ConflictArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub trials: TrialArgs,
    /// Also compute κ exactly by enumeration.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Source counts of the grid.
    #[arg(long = "m", value_name = "LIST", value_delimiter = ',', default_value = "5,10,15")]
    pub ms: Vec<usize>,
    /// Frame sizes of the grid.
    #[arg(long = "n", value_name = "LIST", value_delimiter = ',', default_value = "5,10,15")]
    pub ns: Vec<usize>,
    #[arg(long, value_name = "N", default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, value_name = "U64", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "W", default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_name = "R", default_value_t = 10_000)]
    pub restart_cap: u64,
    /// Timing repetitions per cell; the median is reported.
    #[arg(long, value_name = "K", default_value_t = 3)]
    pub reps: usize,
    /// Wall-clock cap for exact combination per cell, in seconds.
    #[arg(long, value_name = "SECS", default_value_t = 60.0)]
    pub exact_timeout: f64,
    #[arg(long, value_name = "COUNT", default_value_t = 1 << 20)]
    pub max_focal_sets: usize,
    #[arg(long, value_name = "D", default_value_t = 0.5)]
    pub density: f64,
    #[arg(long, value_name = "LO", default_value_t = 0.1)]
    pub weight_lo: f64,
    #[arg(long, value_name = "HI", default_value_t = 0.9)]
    pub weight_hi: f64,
    /// Bisect each cell's density until κ̂ is near this value.
    #[arg(long, value_name = "KAPPA")]
    pub target_conflict: Option<f64>,
    /// Query over x1..xn; defaults to every element but the last.
    #[arg(long, value_name = "SETEXPR")]
    pub query: Option<String>,
    /// Skip exact combination.
    #[arg(long)]
    pub no_exact: bool,
    #[arg(long)]
    pub fast_path: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long = "m", value_name = "COUNT")]
    pub sources: usize,
    #[arg(long = "n", value_name = "COUNT")]
    pub frame_size: usize,
    #[arg(long, value_name = "D", default_value_t = 0.5)]
    pub density: f64,
    #[arg(long, value_name = "LO", default_value_t = 0.1)]
    pub weight_lo: f64,
    #[arg(long, value_name = "HI", default_value_t = 0.9)]
    pub weight_hi: f64,
    #[arg(long, value_name = "U64", default_value_t = 0)]
    pub seed: u64,
    /// Bisect the density until κ̂ is near this value.
    #[arg(long, value_name = "KAPPA")]
    pub target_conflict: Option<f64>,
}

enum Loaded {
    Set(EvidenceProblem),
    Logic(LogicProblem),
}

fn load(args: &ProblemArgs) -> Result<Loaded, CliError> {
    let text = read_file(&args.problem)?;
    Ok(if args.logic {
        Loaded::Logic(parse_logic_problem(&text)?)
    } else {
        Loaded::Set(parse_set_problem(&text)?)
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Runs one parsed command, writing results to `out` and notes to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, out, err),
        Command::Exact(a) => cmd_exact(&a, out),
        Command::Conflict(a) => cmd_conflict(&a, out),
        Command::Bench(a) => cmd_bench(&a, out, err),
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Validate(a) => cmd_validate(&a, out),
    }
}

/// [`run`] plus error reporting; returns the process exit code.
pub fn main_with(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        text.push_str(line.join("  ").trim_end());
        text.push('\n');
    }
    text
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn parse_clauses(p: &LogicProblem, queries: &[String]) -> Result<Vec<ClauseQuery>, CliError> {
    queries
        .iter()
        .map(|q| parse_clause_query(p, q).map_err(|e| CliError::Input(format!("query '{q}': {e}"))))
        .collect()
}

fn parse_sets(p: &EvidenceProblem, queries: &[String]) -> Result<Vec<FocalSet>, CliError> {
    queries
        .iter()
        .map(|q| parse_set_query(p.frame(), q).map_err(|e| CliError::Input(format!("query '{q}': {e}"))))
        .collect()
}

fn cmd_estimate(a: &EstimateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (mut cfg, note) = a.trials.resolve()?;
    cfg.simple_support_fast_path = a.fast_path;
    let problem = load(&a.problem)?;
    if let Some(n) = &note {
        if a.csv {
            writeln!(err, "{n}")?;
        } else {
            writeln!(out, "# {n}")?;
        }
    }
    match problem {
        Loaded::Set(p) => {
            if a.budget.is_some() {
                return Err(CliError::Input("--budget applies to logic problems only".into()));
            }
            let queries = parse_sets(&p, &a.queries)?;
            let start = Instant::now();
            let estimates = estimate(&p, &queries, &cfg)?;
            let wall = ms_since(start);
            let mut rows = vec![if a.csv {
                [
                    "query", "value", "sd_bound", "plugin_sd", "interval_lo", "interval_hi", "kappa_hat",
                    "draws_per_trial", "trials", "successes", "restarts", "wall_ms",
                ]
                .map(String::from)
                .to_vec()
            } else {
                ["query", "value", "sd_bound", "3sd_interval", "kappa_hat", "trials", "wall_ms"]
                    .map(String::from)
                    .to_vec()
            }];
            for (b, e) in queries.iter().zip(&estimates) {
                let q = render_set(p.frame(), b);
                rows.push(if a.csv {
                    vec![
                        csv_field(&q),
                        sig7(e.value),
                        sig7(e.sd_bound),
                        sig7(e.plugin_sd),
                        sig7(e.interval3sd.0),
                        sig7(e.interval3sd.1),
                        sig7(e.conflict_estimate),
                        sig7(e.draws_per_trial()),
                        e.trials.to_string(),
                        e.successes.to_string(),
                        e.restarts.to_string(),
                        sig7(wall),
                    ]
                } else {
                    vec![
                        q,
                        sig7(e.value),
                        sig7(e.sd_bound),
                        format!("[{}, {}]", sig7(e.interval3sd.0), sig7(e.interval3sd.1)),
                        sig7(e.conflict_estimate),
                        e.trials.to_string(),
                        format!("{wall:.3}"),
                    ]
                });
            }
            emit(out, &rows, a.csv)?;
        }
        Loaded::Logic(p) => {
            let clauses = parse_clauses(&p, &a.queries)?;
            let mut rows = vec![[
                "query", "lower", "upper", "sd_bound", "timeouts", "kappa_hat", "trials", "wall_ms",
            ]
            .map(String::from)
            .to_vec()];
            for c in &clauses {
                let start = Instant::now();
                let e = logic_estimate(&p, c, &cfg, a.budget)?;
                let wall = ms_since(start);
                let kappa = e.restarts as f64 / (e.restarts + e.trials) as f64;
                let q = render_clause(&p, c);
                rows.push(vec![
                    if a.csv { csv_field(&q) } else { q },
                    sig7(e.lower),
                    sig7(e.upper),
                    sig7(e.sd_bound),
                    e.timeouts.to_string(),
                    sig7(kappa),
                    e.trials.to_string(),
                    if a.csv { sig7(wall) } else { format!("{wall:.3}") },
                ]);
            }
            emit(out, &rows, a.csv)?;
        }
    }
    Ok(())
}

fn emit(out: &mut dyn Write, rows: &[Vec<String>], csv: bool) -> Result<(), CliError> {
    if csv {
        for r in rows {
            writeln!(out, "{}", r.join(","))?;
        }
    } else {
        write!(out, "{}", table(rows))?;
    }
    Ok(())
}

fn limits(a: &ExactArgs) -> Result<ExactLimits, CliError> {
    let deadline = match a.timeout {
        Some(s) if s.is_finite() && s > 0.0 => Some(Instant::now() + Duration::from_secs_f64(s)),
        Some(s) => return Err(CliError::Input(format!("timeout {s} must be positive"))),
        None => None,
    };
    Ok(ExactLimits {
        max_focal_sets: a.max_focal_sets,
        max_outcomes: a.max_outcomes,
        deadline,
    })
}

// (Bel, Pl) per query and κ.
fn exact_values(
    p: &EvidenceProblem,
    queries: &[FocalSet],
    method: ExactMethod,
    limits: &ExactLimits,
) -> Result<(Vec<(f64, f64)>, f64), CliError> {
    match method {
        ExactMethod::Mass => {
            let r = combine_all_with(p, limits)?;
            let values = queries
                .iter()
                .map(|b| Ok((bel_from_mass(&r.combined, b)?, pl_from_mass(&r.combined, b)?)))
                .collect::<Result<Vec<_>, dsmc_core::EvidenceError>>()
                .map_err(|e| CliError::Input(e.to_string()))?;
            Ok((values, r.conflict))
        }
        ExactMethod::Enumerate => {
            let mut sets = queries.to_vec();
            sets.extend(queries.iter().map(FocalSet::complement));
            let totals = enumerate_outcomes(p, &sets, limits)?;
            if totals.conflict() >= 1.0 - dsmc_core::exact::TOTAL_CONFLICT_TOLERANCE {
                return Err(CombineError::TotalConflict.into());
            }
            let k = queries.len();
            let values = (0..k).map(|i| (totals.belief(i), 1.0 - totals.belief(k + i))).collect();
            Ok((values, totals.conflict()))
        }
    }
}

fn cmd_exact(a: &ExactArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = load(&a.problem)?;
    let limits = limits(a)?;
    let (labels, values, kappa) = match problem {
        Loaded::Set(p) => {
            let queries = parse_sets(&p, &a.queries)?;
            let (values, kappa) = exact_values(&p, &queries, a.method, &limits)?;
            let labels: Vec<String> = queries.iter().map(|b| render_set(p.frame(), b)).collect();
            (labels, values, kappa)
        }
        Loaded::Logic(lp) => {
            let clauses = parse_clauses(&lp, &a.queries)?;
            let set = translate_to_set_problem(&lp)?;
            let queries: Vec<FocalSet> = clauses.iter().map(|c| clause_models(set.frame(), c)).collect();
            let (values, kappa) = exact_values(&set, &queries, a.method, &limits)?;
            (clauses.iter().map(|c| render_clause(&lp, c)).collect(), values, kappa)
        }
    };
    let mut rows = vec![["query", "bel", "pl"].map(String::from).to_vec()];
    for (q, (bel, pl)) in labels.into_iter().zip(values) {
        rows.push(vec![if a.csv { csv_field(&q) } else { q }, sig7(bel), sig7(pl)]);
    }
    if a.csv {
        rows[0].push("kappa".into());
        for r in rows.iter_mut().skip(1) {
            r.push(sig7(kappa));
        }
        emit(out, &rows, true)?;
    } else {
        emit(out, &rows, false)?;
        writeln!(out, "kappa {}", sig7(kappa))?;
    }
    Ok(())
}

fn cmd_conflict(a: &ConflictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (cfg, note) = a.trials.resolve()?;
    let problem = load(&a.problem)?;
    let (estimated, loops, restarts, accepted, exact) = match problem {
        Loaded::Set(p) => {
            let c = conflict_estimate(&p, &cfg)?;
            let exact = if a.exact { Some(conflict_exact(&p)?) } else { None };
            (c.conflict, c.expected_loops, c.restarts, c.accepted, exact)
        }
        Loaded::Logic(lp) => {
            // Any tautology runs the trial loop without affecting the draws.
            let taut = ClauseQuery::new([Literal::pos(0), Literal::neg(0)])?;
            let e = logic_estimate(&lp, &taut, &cfg, None)?;
            let total = (e.restarts + e.trials) as f64;
            let exact = if a.exact {
                Some(conflict_exact(&translate_to_set_problem(&lp)?)?)
            } else {
                None
            };
            (e.restarts as f64 / total, total / e.trials as f64, e.restarts, e.trials, exact)
        }
    };
    if a.csv {
        writeln!(out, "kappa_hat,draws_per_trial,restarts,accepted,kappa_exact")?;
        writeln!(
            out,
            "{},{},{restarts},{accepted},{}",
            sig7(estimated),
            sig7(loops),
            exact.map_or(String::new(), sig7)
        )?;
    } else {
        if let Some(n) = note {
            writeln!(out, "# {n}")?;
        }
        let mut rows = vec![
            vec!["kappa_hat".to_string(), sig7(estimated)],
            vec!["draws_per_trial".to_string(), sig7(loops)],
            vec!["restarts".to_string(), restarts.to_string()],
            vec!["accepted".to_string(), accepted.to_string()],
        ];
        if let Some(k) = exact {
            rows.push(vec!["kappa_exact".to_string(), sig7(k)]);
        }
        emit(out, &rows, false)?;
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if a.ms.is_empty() || a.ns.is_empty() || a.ms.contains(&0) || a.ns.contains(&0) {
        return Err(CliError::Input("grid sizes must be at least 1".into()));
    }
    if !(a.exact_timeout.is_finite() && a.exact_timeout > 0.0) {
        return Err(CliError::Input("--exact-timeout must be positive".into()));
    }
    if a.reps == 0 || a.trials == 0 || a.workers == 0 || a.restart_cap == 0 {
        return Err(CliError::Input("--reps, --trials, --workers and --restart-cap must be at least 1".into()));
    }
    let cfg = BenchConfig {
        ms: a.ms.clone(),
        ns: a.ns.clone(),
        trials: a.trials,
        seed: a.seed,
        reps: a.reps,
        exact_timeout: Duration::from_secs_f64(a.exact_timeout),
        max_focal_sets: a.max_focal_sets,
        density: a.density,
        weight_range: (a.weight_lo, a.weight_hi),
        target_conflict: a.target_conflict,
        workers: a.workers,
        restart_cap: a.restart_cap,
        fast_path: a.fast_path,
        query: a.query.clone(),
        skip_exact: a.no_exact,
    };
    writeln!(out, "{CSV_HEADER}")?;
    let mut write_error = None;
    let rows = run_bench(&cfg, |row| {
        if write_error.is_none() {
            if let Err(e) = writeln!(out, "{}", row.csv_line()).and_then(|_| out.flush()) {
                write_error = Some(e);
            }
        }
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    write!(err, "{}", BenchSummary::from_rows(&rows).render())?;
    Ok(())
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = GeneratorConfig {
        sources: a.sources,
        frame_size: a.frame_size,
        weight_range: (a.weight_lo, a.weight_hi),
        density: a.density,
        weight_scale: 1.0,
        seed: a.seed,
    };
    let g = match a.target_conflict {
        Some(t) => tune_to_conflict(&cfg, t)?,
        None => generate_measured(&cfg)?,
    };
    writeln!(
        out,
        "# generated: m={} n={} density={} weights={}..{} scale={} seed={}",
        a.sources, a.frame_size, g.density, a.weight_lo, a.weight_hi, g.weight_scale, a.seed
    )?;
    writeln!(out, "# kappa_hat={}", sig7(g.conflict_estimate))?;
    write!(out, "{}", render_problem(&ProblemText::Set(g.problem)))?;
    Ok(())
}

fn cmd_validate(a: &ProblemArgs, out: &mut dyn Write) -> Result<(), CliError> {
    match load(a)? {
        Loaded::Set(p) => writeln!(
            out,
            "ok: {} sources over a frame of {} elements",
            p.sources().len(),
            p.frame().len()
        )?,
        Loaded::Logic(p) => writeln!(
            out,
            "ok: {} sources over {} atoms",
            p.sources().len(),
            p.atoms().len()
        )?,
    }
    Ok(())
}
