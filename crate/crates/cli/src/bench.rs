//! Grid benchmark: Monte-Carlo against exact combination on generated
//! problems.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use dsmc_core::{
    bel_from_mass, combine_all_with, estimate, CombineError, Estimate, EvidenceProblem, ExactLimits, FocalSet,
    TrialEngineConfig,
};

use crate::format::parse_set_query;
use crate::generate::{generate_problem, tune_to_conflict, GenerateError, GeneratorConfig};

pub const CSV_HEADER: &str =
    "m,n,density,kappa_hat,draws_per_trial,trials,mc_ms,exact_ms,mc_value,exact_value,abs_error,status";

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub ms: Vec<usize>,
    pub ns: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub reps: usize,
    pub exact_timeout: Duration,
    pub max_focal_sets: usize,
    pub density: f64,
    pub weight_range: (f64, f64),
    /// Tune each cell's density so that κ̂ is near this value.
    pub target_conflict: Option<f64>,
    pub workers: usize,
    pub restart_cap: u64,
    pub fast_path: bool,
    /// Query over `x1..xn`; `None` means Θ without its last element.
    pub query: Option<String>,
    pub skip_exact: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            ms: vec![5, 10, 15],
            ns: vec![5, 10, 15],
            trials: 1000,
            seed: 0,
            reps: 3,
            exact_timeout: Duration::from_secs(60),
            max_focal_sets: 1 << 20,
            density: 0.5,
            weight_range: (0.1, 0.9),
            target_conflict: None,
            workers: 1,
            restart_cap: 10_000,
            fast_path: false,
            query: None,
            skip_exact: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExactCell {
    Done { ms: f64, value: f64 },
    Capped(String),
    Failed(String),
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McCell {
    pub ms: f64,
    pub value: f64,
    pub conflict_estimate: f64,
    pub draws_per_trial: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub m: usize,
    pub n: usize,
    pub density: f64,
    pub trials: u64,
    pub mc: Result<McCell, String>,
    pub exact: ExactCell,
}

impl BenchRow {
    pub fn abs_error(&self) -> Option<f64> {
        match (&self.mc, &self.exact) {
            (Ok(mc), ExactCell::Done { value, .. }) => Some((mc.value - value).abs()),
            _ => None,
        }
    }

    pub fn status(&self) -> String {
        let text = match (&self.mc, &self.exact) {
            (Err(e), _) => format!("mc failed: {e}"),
            (Ok(_), ExactCell::Done { .. } | ExactCell::Skipped) => "ok".into(),
            (Ok(_), ExactCell::Capped(why)) => format!("exact capped: {why}"),
            (Ok(_), ExactCell::Failed(why)) => format!("exact failed: {why}"),
        };
        text.replace([',', '\n'], ";")
    }

    pub fn csv_line(&self) -> String {
        let mut cells: Vec<String> = vec![self.m.to_string(), self.n.to_string(), sig7(self.density)];
        match &self.mc {
            Ok(mc) => {
                cells.push(sig7(mc.conflict_estimate));
                cells.push(sig7(mc.draws_per_trial));
            }
            Err(_) => cells.extend([String::new(), String::new()]),
        }
        cells.push(self.trials.to_string());
        cells.push(self.mc.as_ref().map_or(String::new(), |mc| sig7(mc.ms)));
        cells.push(match &self.exact {
            ExactCell::Done { ms, .. } => sig7(*ms),
            ExactCell::Capped(_) => "capped".into(),
            ExactCell::Failed(_) | ExactCell::Skipped => String::new(),
        });
        cells.push(self.mc.as_ref().map_or(String::new(), |mc| sig7(mc.value)));
        cells.push(match &self.exact {
            ExactCell::Done { value, .. } => sig7(*value),
            _ => String::new(),
        });
        cells.push(self.abs_error().map_or(String::new(), sig7));
        cells.push(self.status());
        cells.join(",")
    }
}

/// Seven significant digits in positional notation, trailing zeros kept.
pub fn sig7(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.000000".into();
    }
    let sci = format!("{x:.6e}");
    let exponent: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    let decimals = (6 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn cell_query(cfg: &BenchConfig, problem: &EvidenceProblem) -> Result<FocalSet, String> {
    let frame = problem.frame();
    match &cfg.query {
        Some(q) => parse_set_query(frame, q).map_err(|e| format!("query: {e}")),
        None => {
            let mut b = frame.full();
            b.remove(frame.len() - 1);
            Ok(b)
        }
    }
}

fn engine_config(cfg: &BenchConfig, seed: u64) -> TrialEngineConfig {
    TrialEngineConfig {
        trials: cfg.trials,
        seed,
        restart_cap: cfg.restart_cap,
        worker_count: cfg.workers,
        simple_support_fast_path: cfg.fast_path,
    }
}

fn timed_estimate(problem: &EvidenceProblem, b: &FocalSet, engine: &TrialEngineConfig) -> Result<(f64, Estimate), String> {
    let start = Instant::now();
    let e = estimate(problem, std::slice::from_ref(b), engine).map_err(|e| e.to_string())?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((ms, e.into_iter().next().expect("one query")))
}

/// Mass-space combination under a deadline and a focal-set cap. Repeats
/// only while the repetitions fit inside the timeout.
pub fn run_exact(cfg: &BenchConfig, problem: &EvidenceProblem, b: &FocalSet) -> ExactCell {
    let mut times = Vec::new();
    let mut value = 0.0;
    let budget_start = Instant::now();
    for rep in 0..cfg.reps.max(1) {
        let limits = ExactLimits {
            max_focal_sets: cfg.max_focal_sets,
            deadline: Some(Instant::now() + cfg.exact_timeout),
            ..ExactLimits::default()
        };
        let start = Instant::now();
        let result = combine_all_with(problem, &limits)
            .and_then(|r| bel_from_mass(&r.combined, b).map_err(CombineError::from));
        let elapsed = start.elapsed();
        match result {
            Ok(v) => value = v,
            Err(e) if e.is_resource_limit() => return ExactCell::Capped(e.to_string()),
            Err(e) => return ExactCell::Failed(e.to_string()),
        }
        times.push(elapsed.as_secs_f64() * 1e3);
        let spent = budget_start.elapsed();
        if rep + 1 < cfg.reps && spent + elapsed > cfg.exact_timeout {
            break;
        }
    }
    ExactCell::Done {
        ms: median(times),
        value,
    }
}

fn cell_problem(cfg: &BenchConfig, m: usize, n: usize, seed: u64) -> Result<(EvidenceProblem, f64), GenerateError> {
    let gen = GeneratorConfig {
        sources: m,
        frame_size: n,
        weight_range: cfg.weight_range,
        density: cfg.density,
        weight_scale: 1.0,
        seed,
    };
    match cfg.target_conflict {
        Some(t) => tune_to_conflict(&gen, t).map(|g| (g.problem, g.density)),
        None => generate_problem(&gen).map(|p| (p, cfg.density)),
    }
}

struct Cell {
    m: usize,
    n: usize,
    seed: u64,
    problem: EvidenceProblem,
    density: f64,
    query: Result<FocalSet, String>,
    mc: Result<(Vec<f64>, Estimate), String>,
}

/// Runs every (m, n) cell, handing each row to `sink` as it finishes.
///
/// Monte-Carlo repetitions are interleaved across the grid (one untimed
/// warm-up per cell, then repetition k of every cell before repetition
/// k + 1), so that a stall of the machine lands in one repetition of many
/// cells rather than in every repetition of one cell.
pub fn run_bench(cfg: &BenchConfig, mut sink: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>, GenerateError> {
    let mut cells = Vec::new();
    for &m in &cfg.ms {
        for &n in &cfg.ns {
            let seed = cfg.seed.wrapping_add(cells.len() as u64);
            let (problem, density) = cell_problem(cfg, m, n, seed)?;
            let query = cell_query(cfg, &problem);
            let mc = match &query {
                Ok(b) => timed_estimate(&problem, b, &engine_config(cfg, seed)).map(|(_, e)| (Vec::new(), e)),
                Err(e) => Err(e.clone()),
            };
            cells.push(Cell {
                m,
                n,
                seed,
                problem,
                density,
                query,
                mc,
            });
        }
    }
    for _ in 0..cfg.reps.max(1) {
        for cell in &mut cells {
            let (Ok(b), Ok((times, _))) = (&cell.query, &mut cell.mc) else {
                continue;
            };
            match timed_estimate(&cell.problem, b, &engine_config(cfg, cell.seed)) {
                Ok((ms, _)) => times.push(ms),
                Err(e) => cell.mc = Err(e),
            }
        }
    }
    let mut rows = Vec::new();
    for cell in cells {
        let exact = match (&cell.query, cfg.skip_exact) {
            (Err(e), _) => ExactCell::Failed(e.clone()),
            (Ok(_), true) => ExactCell::Skipped,
            (Ok(b), false) => run_exact(cfg, &cell.problem, b),
        };
        let row = BenchRow {
            m: cell.m,
            n: cell.n,
            density: cell.density,
            trials: cfg.trials,
            mc: cell.mc.map(|(times, e)| McCell {
                ms: median(times),
                value: e.value,
                conflict_estimate: e.conflict_estimate,
                draws_per_trial: e.draws_per_trial(),
            }),
            exact,
        };
        sink(&row);
        rows.push(row);
    }
    Ok(rows)
}

pub const EXPONENT_RANGE: (f64, f64) = (0.8, 1.3);

/// Least-squares slope of ln y on ln x.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSummary {
    /// Fitted exponent of MC time against m·n.
    pub mc_exponent: Option<f64>,
    /// Smallest cell (by m·n) where exact combination hit a cap.
    pub first_capped: Option<(usize, usize)>,
    /// Largest cell (by m·n) where exact combination finished.
    pub largest_exact: Option<(usize, usize)>,
    pub max_abs_error: Option<f64>,
}

impl BenchSummary {
    pub fn from_rows(rows: &[BenchRow]) -> BenchSummary {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.mc.as_ref().ok().map(|mc| ((r.m * r.n) as f64, mc.ms)))
            .collect();
        let by_size = |pick: fn(&ExactCell) -> bool| {
            rows.iter().filter(move |r| pick(&r.exact)).map(|r| (r.m * r.n, r.m, r.n))
        };
        BenchSummary {
            mc_exponent: loglog_slope(&points),
            first_capped: by_size(|e| matches!(e, ExactCell::Capped(_))).min().map(|(_, m, n)| (m, n)),
            largest_exact: by_size(|e| matches!(e, ExactCell::Done { .. })).max().map(|(_, m, n)| (m, n)),
            max_abs_error: rows.iter().filter_map(BenchRow::abs_error).reduce(f64::max),
        }
    }

    pub fn exponent_in_range(&self) -> bool {
        self.mc_exponent
            .is_some_and(|e| (EXPONENT_RANGE.0..=EXPONENT_RANGE.1).contains(&e))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        match self.mc_exponent {
            Some(e) => {
                let verdict = if self.exponent_in_range() { "linear" } else { "NOT linear" };
                let _ = writeln!(
                    out,
                    "mc time ~ (m*n)^{:.3} ({verdict}; expected {}..{})",
                    e, EXPONENT_RANGE.0, EXPONENT_RANGE.1
                );
            }
            None => out.push_str("mc time exponent: not enough cells to fit\n"),
        }
        match self.largest_exact {
            Some((m, n)) => {
                let _ = writeln!(out, "largest exact cell finished: m={m} n={n}");
            }
            None => out.push_str("no exact cell finished\n"),
        }
        match (self.first_capped, self.largest_exact) {
            (Some((m, n)), _) => {
                let _ = writeln!(out, "exact combination capped from m={m} n={n}");
            }
            (None, Some(_)) => out.push_str("exact combination never hit a cap\n"),
            (None, None) => {}
        }
        if let Some(e) = self.max_abs_error {
            let _ = writeln!(out, "largest |mc - exact|: {}", sig7(e));
        }
        out
    }
}
