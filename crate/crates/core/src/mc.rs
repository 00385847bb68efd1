//! Monte-Carlo estimation of combined belief.
//!
//! Each trial draws one outcome per source, rejects the draw when the
//! intersection of the implied sets is empty, and otherwise succeeds when that
//! intersection lies inside the query. The success proportion is an unbiased
//! estimate of Bel(b) with variance at most 1/(4N).
//!
//! Random numbers come from ChaCha8. Worker `w` of a run seeded with `s` uses
//! ChaCha8 keyed by `seed_from_u64(s)` on stream `w`, and runs a fixed share
//! of the trials, so results depend only on `(seed, worker_count)`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::evidence::{EvidenceError, EvidenceProblem, SourceModel};
use crate::focal::FocalSet;

pub type TrialRng = ChaCha8Rng;

/// The generator for worker `worker` of a run seeded with `seed`.
pub fn worker_rng(seed: u64, worker: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker);
    rng
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error(
        "excessive conflict: a trial exceeded the restart cap ({restarts} rejected draws, \
         {accepted} accepted, estimated conflict {conflict_estimate:.7})"
    )]
    ExcessiveConflict {
        restarts: u64,
        accepted: u64,
        conflict_estimate: f64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("accuracy {0} outside (0, 1]")]
    InvalidAccuracy(f64),
    #[error("source {source_index} is not a simple support function")]
    NotSimpleSupport { source_index: usize },
}

impl McError {
    fn excessive(restarts: u64, accepted: u64) -> McError {
        McError::ExcessiveConflict {
            restarts,
            accepted,
            conflict_estimate: restarts as f64 / (restarts + accepted) as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialEngineConfig {
    pub trials: u64,
    pub seed: u64,
    /// Most rejected draws tolerated within one trial.
    pub restart_cap: u64,
    pub worker_count: usize,
    /// Use the simple-support trial for single queries when every source
    /// qualifies. Results are identical either way.
    pub simple_support_fast_path: bool,
}

impl Default for TrialEngineConfig {
    fn default() -> Self {
        TrialEngineConfig {
            trials: 1000,
            seed: 0,
            restart_cap: 10_000,
            worker_count: 1,
            simple_support_fast_path: false,
        }
    }
}

impl TrialEngineConfig {
    pub fn with_trials(trials: u64, seed: u64) -> Self {
        TrialEngineConfig {
            trials,
            seed,
            ..TrialEngineConfig::default()
        }
    }

    fn check(&self) -> Result<(), McError> {
        if self.trials == 0 {
            return Err(McError::InvalidConfig("trial count must be at least 1".into()));
        }
        if self.restart_cap == 0 {
            return Err(McError::InvalidConfig("restart cap must be at least 1".into()));
        }
        if self.worker_count == 0 {
            return Err(McError::InvalidConfig("worker count must be at least 1".into()));
        }
        Ok(())
    }

    fn share(&self, worker: usize) -> u64 {
        let w = self.worker_count as u64;
        self.trials / w + u64::from((worker as u64) < self.trials % w)
    }
}

/// Smallest N with 3·(1/(2√N)) ≤ k, i.e. N ≥ 9/(4k²).
pub fn plan_trials(accuracy: f64) -> Result<u64, McError> {
    if !(accuracy > 0.0 && accuracy <= 1.0) {
        return Err(McError::InvalidAccuracy(accuracy));
    }
    let bound = 9.0 / (4.0 * accuracy * accuracy);
    // Absorb rounding in k² so that k = 0.05 plans exactly 900.
    Ok((bound - 1e-9).ceil().max(1.0) as u64)
}

/// Conservative standard deviation of a proportion over N trials: 1/(2√N).
pub fn sd_bound(trials: u64) -> f64 {
    0.5 / (trials as f64).sqrt()
}

/// One query's result from a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub trials: u64,
    pub successes: u64,
    /// Rejected draws across the whole run.
    pub restarts: u64,
    pub sd_bound: f64,
    /// √(p̂(1 − p̂)/N).
    pub plugin_sd: f64,
    pub conflict_estimate: f64,
    pub interval3sd: (f64, f64),
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64, restarts: u64) -> Estimate {
        let n = trials as f64;
        let value = successes as f64 / n;
        let sd = sd_bound(trials);
        Estimate {
            value,
            trials,
            successes,
            restarts,
            sd_bound: sd,
            plugin_sd: (value * (1.0 - value) / n).sqrt(),
            conflict_estimate: restarts as f64 / (restarts as f64 + n),
            interval3sd: ((value - 3.0 * sd).max(0.0), (value + 3.0 * sd).min(1.0)),
        }
    }

    /// Mean number of ε draws per trial; estimates 1/(1 − κ).
    pub fn draws_per_trial(&self) -> f64 {
        (self.restarts + self.trials) as f64 / self.trials as f64
    }
}

/// Draws outcome indices from one source through its cumulative table.
#[derive(Clone, Debug)]
pub struct SourceSampler {
    cumulative: Vec<f64>,
}

impl SourceSampler {
    pub fn new(source: &SourceModel) -> SourceSampler {
        SourceSampler::from_probabilities(source.outcomes().iter().map(|o| o.probability))
    }

    /// Table over positive weights; they are rescaled to sum to 1.
    pub fn from_probabilities(probabilities: impl IntoIterator<Item = f64>) -> SourceSampler {
        let probabilities: Vec<f64> = probabilities.into_iter().collect();
        let total: f64 = probabilities.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc / total
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        SourceSampler { cumulative }
    }

    /// Index of the outcome whose cumulative interval holds `u ∈ [0, 1)`.
    #[inline]
    pub fn index_for(&self, u: f64) -> usize {
        self.cumulative
            .partition_point(|c| *c <= u)
            .min(self.cumulative.len() - 1)
    }

    /// Consumes exactly one uniform from `rng`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index_for(rng.gen::<f64>())
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

/// Picks ε: one outcome index per source.
///
/// The default, [`IndependentDraw`], samples each source from its own
/// distribution in source order, consuming one uniform per source. Other
/// implementations estimate belief under a different joint distribution on Ω.
pub trait JointDraw: Sync {
    fn draw(&self, samplers: &[SourceSampler], rng: &mut TrialRng, choices: &mut [usize]);
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IndependentDraw;

impl JointDraw for IndependentDraw {
    #[inline]
    fn draw(&self, samplers: &[SourceSampler], rng: &mut TrialRng, choices: &mut [usize]) {
        for (slot, sampler) in choices.iter_mut().zip(samplers) {
            *slot = sampler.sample(rng);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    pub restarts: u64,
}

#[derive(Clone, Debug)]
enum Activation {
    Below(f64),
    AtOrAbove(f64),
    ByIndex(Vec<bool>),
}

#[derive(Clone, Debug)]
struct SupportSlot {
    focus: FocalSet,
    activation: Activation,
}

/// A problem compiled for sampling.
pub struct TrialEngine<'p> {
    problem: &'p EvidenceProblem,
    width: usize,
    samplers: Vec<SourceSampler>,
    supports: Option<Vec<SupportSlot>>,
}

enum Mode<'q> {
    Scan(&'q FocalSet),
    Fast(&'q FocalSet),
    Batch(&'q [FocalSet]),
    Tally,
}

#[derive(Default)]
struct Tally {
    accepted: u64,
    restarts: u64,
    successes: Vec<u64>,
    sets: HashMap<FocalSet, u64>,
}

impl<'p> TrialEngine<'p> {
    pub fn new(problem: &'p EvidenceProblem) -> Result<TrialEngine<'p>, McError> {
        problem.check()?;
        let samplers: Vec<SourceSampler> = problem.sources().iter().map(SourceSampler::new).collect();
        let supports = problem
            .sources()
            .iter()
            .zip(&samplers)
            .map(|(s, sampler)| support_slot(s, sampler))
            .collect();
        Ok(TrialEngine {
            problem,
            width: problem.frame().len(),
            samplers,
            supports,
        })
    }

    pub fn problem(&self) -> &EvidenceProblem {
        self.problem
    }

    pub fn samplers(&self) -> &[SourceSampler] {
        &self.samplers
    }

    pub fn is_simple_support(&self) -> bool {
        self.supports.is_some()
    }

    fn check_query(&self, b: &FocalSet) -> Result<(), McError> {
        self.problem.frame().check(b).map_err(McError::from)
    }

    /// Outcome index for source `i`.
    pub fn sample_source(&self, i: usize, rng: &mut TrialRng) -> usize {
        self.samplers[i].sample(rng)
    }

    /// One trial with the element-by-element scan and early exit.
    pub fn run_trial(&self, b: &FocalSet, rng: &mut TrialRng, restart_cap: u64) -> Result<TrialOutcome, McError> {
        self.check_query(b)?;
        let mut choices = vec![0; self.samplers.len()];
        self.scan_trial(&IndependentDraw, b, rng, restart_cap, &mut choices)
            .map_err(|restarts| McError::excessive(restarts, 0))
    }

    /// One trial by the simple-support route: a Bernoulli activation per
    /// source, then Γ(ε) as the AND of the activated foci. Consumes the same
    /// uniforms as [`TrialEngine::run_trial`] and returns the same outcome.
    pub fn ssf_fast_trial(
        &self,
        b: &FocalSet,
        rng: &mut TrialRng,
        restart_cap: u64,
    ) -> Result<TrialOutcome, McError> {
        self.check_query(b)?;
        let slots = self.support_slots()?;
        let mut gamma = FocalSet::empty(self.width);
        fast_trial(slots, &self.samplers, b, rng, restart_cap, &mut gamma)
            .map_err(|restarts| McError::excessive(restarts, 0))
    }

    fn support_slots(&self) -> Result<&[SupportSlot], McError> {
        match &self.supports {
            Some(slots) => Ok(slots),
            None => {
                let source_index = self
                    .problem
                    .sources()
                    .iter()
                    .position(|s| s.as_simple_support().is_none())
                    .unwrap_or(0);
                Err(McError::NotSimpleSupport { source_index })
            }
        }
    }

    // x_j ∈ Γ(ε) tested source by source, as a branch-free AND over all m
    // sources so that each test costs the same.
    #[inline]
    fn in_every_target(&self, choices: &[usize], j: usize) -> bool {
        let word = j / 64;
        let bit = j % 64;
        let mut acc = 1u64;
        for (source, &c) in self.problem.sources().iter().zip(choices) {
            acc &= source.outcomes()[c].target.words()[word] >> bit;
        }
        acc & 1 == 1
    }

    fn scan_trial<D: JointDraw>(
        &self,
        draw: &D,
        b: &FocalSet,
        rng: &mut TrialRng,
        cap: u64,
        choices: &mut [usize],
    ) -> Result<TrialOutcome, u64> {
        let mut restarts = 0;
        loop {
            draw.draw(&self.samplers, rng, choices);
            let mut nonempty = false;
            for j in 0..self.width {
                if self.in_every_target(choices, j) {
                    nonempty = true;
                    if !b.contains(j) {
                        return Ok(TrialOutcome { success: false, restarts });
                    }
                }
            }
            if nonempty {
                return Ok(TrialOutcome { success: true, restarts });
            }
            restarts += 1;
            if restarts > cap {
                return Err(restarts);
            }
        }
    }

    /// Draws until Γ(ε) ≠ ∅ and leaves Γ(ε) in `gamma`.
    fn materialize_trial<D: JointDraw>(
        &self,
        draw: &D,
        rng: &mut TrialRng,
        cap: u64,
        choices: &mut [usize],
        gamma: &mut FocalSet,
    ) -> Result<u64, u64> {
        let sources = self.problem.sources();
        let mut restarts = 0;
        loop {
            draw.draw(&self.samplers, rng, choices);
            gamma.clone_from(&sources[0].outcomes()[choices[0]].target);
            for (source, &c) in sources.iter().zip(choices.iter()).skip(1) {
                gamma.intersect_in_place(&source.outcomes()[c].target);
            }
            if !gamma.is_empty() {
                return Ok(restarts);
            }
            restarts += 1;
            if restarts > cap {
                return Err(restarts);
            }
        }
    }

    fn run_worker<D: JointDraw>(
        &self,
        draw: &D,
        mode: &Mode<'_>,
        trials: u64,
        mut rng: TrialRng,
        cap: u64,
    ) -> Result<Tally, McError> {
        let queries = match mode {
            Mode::Scan(_) | Mode::Fast(_) => 1,
            Mode::Batch(qs) => qs.len(),
            Mode::Tally => 0,
        };
        let mut tally = Tally {
            successes: vec![0; queries],
            ..Tally::default()
        };
        let mut choices = vec![0; self.samplers.len()];
        let mut gamma = FocalSet::empty(self.width);
        for _ in 0..trials {
            let restarts = match mode {
                Mode::Scan(b) => self.scan_trial(draw, b, &mut rng, cap, &mut choices).map(|t| {
                    tally.successes[0] += u64::from(t.success);
                    t.restarts
                }),
                Mode::Fast(b) => {
                    let slots = self.supports.as_deref().expect("fast mode requires simple supports");
                    fast_trial(slots, &self.samplers, b, &mut rng, cap, &mut gamma).map(|t| {
                        tally.successes[0] += u64::from(t.success);
                        t.restarts
                    })
                }
                Mode::Batch(qs) => self
                    .materialize_trial(draw, &mut rng, cap, &mut choices, &mut gamma)
                    .inspect(|_| {
                        for (count, q) in tally.successes.iter_mut().zip(qs.iter()) {
                            *count += u64::from(gamma.subset_unchecked(q));
                        }
                    }),
                Mode::Tally => self
                    .materialize_trial(draw, &mut rng, cap, &mut choices, &mut gamma)
                    .inspect(|_| {
                        *tally.sets.entry(gamma.clone()).or_insert(0) += 1;
                    }),
            };
            match restarts {
                Ok(r) => {
                    tally.restarts += r;
                    tally.accepted += 1;
                }
                Err(r) => return Err(McError::excessive(tally.restarts + r, tally.accepted)),
            }
        }
        Ok(tally)
    }

    fn run<D: JointDraw>(&self, draw: &D, mode: &Mode<'_>, cfg: &TrialEngineConfig) -> Result<Tally, McError> {
        cfg.check()?;
        let results: Vec<Result<Tally, McError>> = if cfg.worker_count == 1 {
            vec![self.run_worker(draw, mode, cfg.trials, worker_rng(cfg.seed, 0), cfg.restart_cap)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..cfg.worker_count)
                    .map(|w| {
                        let trials = cfg.share(w);
                        let rng = worker_rng(cfg.seed, w as u64);
                        scope.spawn(move || self.run_worker(draw, mode, trials, rng, cfg.restart_cap))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("trial worker panicked"))
                    .collect()
            })
        };
        let mut merged = Tally::default();
        for result in results {
            let tally = result?;
            merged.accepted += tally.accepted;
            merged.restarts += tally.restarts;
            if merged.successes.len() < tally.successes.len() {
                merged.successes.resize(tally.successes.len(), 0);
            }
            for (acc, s) in merged.successes.iter_mut().zip(tally.successes) {
                *acc += s;
            }
            for (set, count) in tally.sets {
                *merged.sets.entry(set).or_insert(0) += count;
            }
        }
        Ok(merged)
    }
}

fn support_slot(source: &SourceModel, sampler: &SourceSampler) -> Option<SupportSlot> {
    let view = source.as_simple_support()?;
    let outcomes = source.outcomes();
    let is_focus: Vec<bool> = outcomes.iter().map(|o| o.target == view.focus).collect();
    let activation = match is_focus.as_slice() {
        [_] => Activation::Below(1.0),
        [true, false] => Activation::Below(sampler.cumulative()[0]),
        [false, true] => Activation::AtOrAbove(sampler.cumulative()[0]),
        _ => Activation::ByIndex(is_focus),
    };
    Some(SupportSlot {
        focus: view.focus,
        activation,
    })
}

fn fast_trial(
    slots: &[SupportSlot],
    samplers: &[SourceSampler],
    b: &FocalSet,
    rng: &mut TrialRng,
    cap: u64,
    gamma: &mut FocalSet,
) -> Result<TrialOutcome, u64> {
    let full = FocalSet::full(b.width());
    let mut restarts = 0;
    loop {
        gamma.clone_from(&full);
        for (slot, sampler) in slots.iter().zip(samplers) {
            let u: f64 = rng.gen();
            let active = match &slot.activation {
                Activation::Below(t) => u < *t,
                Activation::AtOrAbove(t) => u >= *t,
                Activation::ByIndex(flags) => flags[sampler.index_for(u)],
            };
            if active {
                gamma.intersect_in_place(&slot.focus);
            }
        }
        if !gamma.is_empty() {
            return Ok(TrialOutcome {
                success: gamma.subset_unchecked(b),
                restarts,
            });
        }
        restarts += 1;
        if restarts > cap {
            return Err(restarts);
        }
    }
}

/// Estimates Bel(b) for every query in `batch` from one stream of trials.
///
/// A single query uses the early-exit element scan; several queries share
/// each accepted Γ(ε), which is materialized once per trial. Both routes
/// consume the same random numbers, so a query's value does not depend on
/// what else is in the batch.
pub fn estimate(
    problem: &EvidenceProblem,
    batch: &[FocalSet],
    cfg: &TrialEngineConfig,
) -> Result<Vec<Estimate>, McError> {
    estimate_with_draw(problem, batch, cfg, &IndependentDraw)
}

/// [`estimate`] with a caller-supplied joint draw of ε.
pub fn estimate_with_draw<D: JointDraw>(
    problem: &EvidenceProblem,
    batch: &[FocalSet],
    cfg: &TrialEngineConfig,
    draw: &D,
) -> Result<Vec<Estimate>, McError> {
    if batch.is_empty() {
        return Err(McError::InvalidConfig("query batch is empty".into()));
    }
    let engine = TrialEngine::new(problem)?;
    for q in batch {
        engine.check_query(q)?;
    }
    let mode = match batch {
        [b] if cfg.simple_support_fast_path && engine.is_simple_support() => Mode::Fast(b),
        [b] => Mode::Scan(b),
        qs => Mode::Batch(qs),
    };
    let tally = engine.run(draw, &mode, cfg)?;
    Ok(tally
        .successes
        .iter()
        .map(|&s| Estimate::from_counts(s, tally.accepted, tally.restarts))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConflictEstimate {
    /// κ̂ = rejected / (rejected + accepted).
    pub conflict: f64,
    /// 1/(1 − κ̂): mean draws per accepted trial.
    pub expected_loops: f64,
    pub restarts: u64,
    pub accepted: u64,
}

pub fn conflict_estimate(problem: &EvidenceProblem, cfg: &TrialEngineConfig) -> Result<ConflictEstimate, McError> {
    let engine = TrialEngine::new(problem)?;
    let tally = engine.run(&IndependentDraw, &Mode::Batch(&[]), cfg)?;
    let total = (tally.restarts + tally.accepted) as f64;
    Ok(ConflictEstimate {
        conflict: tally.restarts as f64 / total,
        expected_loops: total / tally.accepted as f64,
        restarts: tally.restarts,
        accepted: tally.accepted,
    })
}

/// The most frequent realized Γ(ε) over accepted trials, heaviest first.
/// Frequencies estimate the combined masses of those sets.
pub fn subset_frequency_scan(
    problem: &EvidenceProblem,
    cfg: &TrialEngineConfig,
    max_report: usize,
) -> Result<Vec<(FocalSet, f64)>, McError> {
    let engine = TrialEngine::new(problem)?;
    let tally = engine.run(&IndependentDraw, &Mode::Tally, cfg)?;
    let mut sets: Vec<(FocalSet, u64)> = tally.sets.into_iter().collect();
    sets.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let n = tally.accepted as f64;
    Ok(sets
        .into_iter()
        .take(max_report)
        .map(|(set, count)| (set, count as f64 / n))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{Frame, Outcome, SimpleSupport};

    fn two_ssf() -> EvidenceProblem {
        let f = Frame::new(["x1", "x2"]).unwrap();
        EvidenceProblem::from_simple_supports(
            f.clone(),
            &[
                SimpleSupport::new(f.subset(["x1"]).unwrap(), 0.6),
                SimpleSupport::new(f.subset(["x2"]).unwrap(), 0.5),
            ],
        )
        .unwrap()
    }

    fn deterministic(frame: &Frame, labels: &[&str]) -> SourceModel {
        SourceModel::new(frame.clone(), vec![Outcome::new(1.0, frame.subset(labels).unwrap())]).unwrap()
    }

    #[test]
    fn planning() {
        assert_eq!(plan_trials(0.05).unwrap(), 900);
        assert_eq!(plan_trials(0.1).unwrap(), 225);
        assert_eq!(plan_trials(1.0).unwrap(), 3);
        assert!(plan_trials(0.0).is_err());
        assert!(plan_trials(1.5).is_err());
        assert!(plan_trials(f64::NAN).is_err());
        assert!(sd_bound(1000) < 0.016);
        assert!((sd_bound(1000) - 0.0158).abs() < 1e-4);
    }

    #[test]
    fn estimate_fields() {
        let e = Estimate::from_counts(30, 100, 100);
        assert_eq!(e.value, 0.3);
        assert_eq!(e.sd_bound, 0.05);
        assert_eq!(e.conflict_estimate, 0.5);
        assert_eq!(e.draws_per_trial(), 2.0);
        assert!((e.interval3sd.0 - 0.15).abs() < 1e-12);
        assert!((e.interval3sd.1 - 0.45).abs() < 1e-12);
        let edge = Estimate::from_counts(1, 1, 0);
        assert_eq!(edge.interval3sd, (0.0, 1.0));
    }

    #[test]
    fn sampler_edges() {
        let f = Frame::numbered(2).unwrap();
        let single = SourceSampler::new(&deterministic(&f, &["x1"]));
        let mut rng = worker_rng(1, 0);
        assert!((0..100).all(|_| single.sample(&mut rng) == 0));
        let ssf = SourceSampler::new(&two_ssf().sources()[0]);
        assert_eq!(ssf.index_for(0.0), 0);
        assert_eq!(ssf.index_for(0.5999), 0);
        assert_eq!(ssf.index_for(0.6), 1);
        assert_eq!(ssf.index_for(0.999_999_9), 1);
    }

    #[test]
    fn sampler_frequency_and_determinism() {
        let p = two_ssf();
        let engine = TrialEngine::new(&p).unwrap();
        let mut rng = worker_rng(42, 0);
        let hits = (0..100_000).filter(|_| engine.sample_source(0, &mut rng) == 0).count();
        let freq = hits as f64 / 100_000.0;
        assert!((freq - 0.6).abs() < 0.01, "{freq}");

        let seq = |seed| {
            let mut rng = worker_rng(seed, 0);
            (0..64).map(|_| engine.sample_source(0, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(seq(9), seq(9));
        assert_ne!(seq(9), seq(10));
    }

    #[test]
    fn vacuous_trials_never_restart() {
        let f = Frame::numbered(3).unwrap();
        let p = EvidenceProblem::new(f.clone(), vec![deterministic(&f, &["x1", "x2", "x3"]); 4]).unwrap();
        let engine = TrialEngine::new(&p).unwrap();
        let mut rng = worker_rng(0, 0);
        for _ in 0..100 {
            let t = engine.run_trial(&f.full(), &mut rng, 10).unwrap();
            assert_eq!(t, TrialOutcome { success: true, restarts: 0 });
        }
    }

    #[test]
    fn conflicting_trial_errors() {
        let f = Frame::numbered(2).unwrap();
        let p = EvidenceProblem::new(f.clone(), vec![deterministic(&f, &["x1"]), deterministic(&f, &["x2"])]).unwrap();
        let engine = TrialEngine::new(&p).unwrap();
        let mut rng = worker_rng(0, 0);
        match engine.run_trial(&f.full(), &mut rng, 50) {
            Err(McError::ExcessiveConflict {
                restarts,
                conflict_estimate,
                ..
            }) => {
                assert_eq!(restarts, 51);
                assert_eq!(conflict_estimate, 1.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            estimate(&p, &[f.full()], &TrialEngineConfig::with_trials(10, 0)),
            Err(McError::ExcessiveConflict { .. })
        ));
        assert!(engine.ssf_fast_trial(&f.full(), &mut rng, 5).is_err());
    }

    #[test]
    fn two_ssf_trial_frequency() {
        let p = two_ssf();
        let engine = TrialEngine::new(&p).unwrap();
        let b = p.frame().subset(["x1"]).unwrap();
        let mut rng = worker_rng(3, 0);
        let n = 100_000;
        let wins = (0..n)
            .filter(|_| engine.run_trial(&b, &mut rng, 10_000).unwrap().success)
            .count();
        let freq = wins as f64 / n as f64;
        assert!((freq - 3.0 / 7.0).abs() < 0.005, "{freq}");
    }

    #[test]
    fn certain_and_impossible_queries() {
        let p = two_ssf();
        let f = p.frame();
        let est = estimate(&p, &[f.full(), f.empty_set()], &TrialEngineConfig::with_trials(5000, 1)).unwrap();
        assert_eq!(est[0].value, 1.0);
        assert_eq!(est[1].value, 0.0);
        assert_eq!(est[0].restarts, est[1].restarts);
    }

    #[test]
    fn batch_matches_singletons() {
        let p = two_ssf();
        let f = p.frame();
        let x1 = f.subset(["x1"]).unwrap();
        let x2 = f.subset(["x2"]).unwrap();
        let cfg = TrialEngineConfig::with_trials(100_000, 11);
        let both = estimate(&p, &[x1.clone(), x2.clone()], &cfg).unwrap();
        let one = estimate(&p, &[x1], &cfg).unwrap();
        let two = estimate(&p, &[x2], &cfg).unwrap();
        assert_eq!(both[0], one[0]);
        assert_eq!(both[1], two[0]);
        assert!((both[0].value - 3.0 / 7.0).abs() <= 3.0 * both[0].sd_bound);
        assert!((both[1].value - 2.0 / 7.0).abs() <= 3.0 * both[1].sd_bound);
    }

    #[test]
    fn single_source_estimate() {
        let f = Frame::numbered(3).unwrap();
        let a = f.subset(["x1", "x2"]).unwrap();
        let p = EvidenceProblem::from_simple_supports(f.clone(), &[SimpleSupport::new(a.clone(), 0.7)]).unwrap();
        let e = &estimate(&p, &[a], &TrialEngineConfig::with_trials(10_000, 5)).unwrap()[0];
        assert!((e.value - 0.7).abs() <= 3.0 * e.sd_bound);
        assert_eq!(e.restarts, 0);
    }

    #[test]
    fn conflict_estimates() {
        let p = two_ssf();
        let c = conflict_estimate(&p, &TrialEngineConfig::with_trials(100_000, 2)).unwrap();
        assert!((c.conflict - 0.3).abs() < 0.01, "{c:?}");
        assert!((c.expected_loops - 1.0 / 0.7).abs() < 0.03);

        let f = p.frame().clone();
        let vac = EvidenceProblem::new(f.clone(), vec![deterministic(&f, &["x1", "x2"])]).unwrap();
        let c = conflict_estimate(&vac, &TrialEngineConfig::with_trials(1000, 2)).unwrap();
        assert_eq!(c.conflict, 0.0);
        assert_eq!(c.expected_loops, 1.0);

        // Two fair coins on disjoint halves: κ = 0.5.
        let half = EvidenceProblem::from_simple_supports(
            f.clone(),
            &[
                SimpleSupport::new(f.subset(["x1"]).unwrap(), 0.5),
                SimpleSupport::new(f.subset(["x2"]).unwrap(), 1.0),
            ],
        )
        .unwrap();
        let c = conflict_estimate(&half, &TrialEngineConfig::with_trials(100_000, 4)).unwrap();
        assert!((c.expected_loops - 2.0).abs() < 0.1, "{c:?}");
    }

    #[test]
    fn fast_path_contract() {
        let p = two_ssf();
        let f = p.frame();
        let engine = TrialEngine::new(&p).unwrap();
        assert!(engine.is_simple_support());
        let b = f.subset(["x1"]).unwrap();
        let mut slow = worker_rng(8, 0);
        let mut fast = worker_rng(8, 0);
        for _ in 0..10_000 {
            assert_eq!(
                engine.run_trial(&b, &mut slow, 100).unwrap(),
                engine.ssf_fast_trial(&b, &mut fast, 100).unwrap()
            );
        }

        // Both sources inactive gives Γ = Θ, which no proper subset contains.
        let sure_miss = EvidenceProblem::from_simple_supports(
            f.clone(),
            &[SimpleSupport::new(f.subset(["x1"]).unwrap(), 1e-9)],
        )
        .unwrap();
        let engine = TrialEngine::new(&sure_miss).unwrap();
        let mut rng = worker_rng(0, 0);
        assert!(!engine.ssf_fast_trial(&b, &mut rng, 10).unwrap().success);

        let mixed = EvidenceProblem::new(
            f.clone(),
            vec![SourceModel::new(
                f.clone(),
                vec![
                    Outcome::new(0.5, f.subset(["x1"]).unwrap()),
                    Outcome::new(0.5, f.subset(["x2"]).unwrap()),
                ],
            )
            .unwrap()],
        )
        .unwrap();
        let engine = TrialEngine::new(&mixed).unwrap();
        assert_eq!(
            engine.ssf_fast_trial(&b, &mut rng, 10),
            Err(McError::NotSimpleSupport { source_index: 0 })
        );
    }

    #[test]
    fn fast_path_config_is_transparent() {
        let p = two_ssf();
        let b = p.frame().subset(["x1"]).unwrap();
        let slow = TrialEngineConfig::with_trials(20_000, 17);
        let fast = TrialEngineConfig {
            simple_support_fast_path: true,
            ..slow.clone()
        };
        assert_eq!(estimate(&p, std::slice::from_ref(&b), &slow).unwrap(), estimate(&p, &[b], &fast).unwrap());
    }

    #[test]
    fn frequency_scan() {
        let p = two_ssf();
        let f = p.frame();
        let top = subset_frequency_scan(&p, &TrialEngineConfig::with_trials(100_000, 6), 3).unwrap();
        let expect = [
            (f.subset(["x1"]).unwrap(), 3.0 / 7.0),
            (f.subset(["x2"]).unwrap(), 2.0 / 7.0),
            (f.full(), 2.0 / 7.0),
        ];
        assert_eq!(top.len(), 3);
        for (set, mass) in expect {
            let got = top.iter().find(|(s, _)| *s == set).expect("set reported").1;
            assert!((got - mass).abs() < 0.01, "{set:?} {got}");
        }
        assert!(top.iter().map(|(_, p)| p).sum::<f64>() <= 1.0 + 1e-12);

        let a = f.subset(["x2"]).unwrap();
        let det = EvidenceProblem::new(f.clone(), vec![deterministic(f, &["x2"])]).unwrap();
        assert_eq!(
            subset_frequency_scan(&det, &TrialEngineConfig::with_trials(100, 0), 5).unwrap(),
            vec![(a, 1.0)]
        );
        let vac = EvidenceProblem::new(f.clone(), vec![deterministic(f, &["x1", "x2"]); 2]).unwrap();
        assert_eq!(
            subset_frequency_scan(&vac, &TrialEngineConfig::with_trials(100, 0), 5).unwrap(),
            vec![(f.full(), 1.0)]
        );
    }

    #[test]
    fn workers_are_deterministic() {
        let p = two_ssf();
        let qs = [p.frame().subset(["x1"]).unwrap(), p.frame().subset(["x2"]).unwrap()];
        for workers in [1, 3, 4] {
            let cfg = TrialEngineConfig {
                worker_count: workers,
                ..TrialEngineConfig::with_trials(10_001, 77)
            };
            let a = estimate(&p, &qs, &cfg).unwrap();
            let b = estimate(&p, &qs, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a[0].trials, 10_001);
        }
    }

    #[test]
    fn config_errors() {
        let p = two_ssf();
        let full = p.frame().full();
        let bad = [
            TrialEngineConfig::with_trials(0, 0),
            TrialEngineConfig {
                restart_cap: 0,
                ..TrialEngineConfig::default()
            },
            TrialEngineConfig {
                worker_count: 0,
                ..TrialEngineConfig::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(
                estimate(&p, std::slice::from_ref(&full), &cfg),
                Err(McError::InvalidConfig(_))
            ));
        }
        assert!(estimate(&p, &[], &TrialEngineConfig::default()).is_err());
        assert!(matches!(
            estimate(&p, &[FocalSet::full(5)], &TrialEngineConfig::default()),
            Err(McError::Evidence(EvidenceError::FrameMismatch { .. }))
        ));
    }

    struct FirstOutcome;

    impl JointDraw for FirstOutcome {
        fn draw(&self, _: &[SourceSampler], _: &mut TrialRng, choices: &mut [usize]) {
            choices.fill(0);
        }
    }

    #[test]
    fn custom_joint_draw() {
        // Always picking the foci of {x1} and {x2} is total conflict.
        let p = two_ssf();
        let err = estimate_with_draw(&p, &[p.frame().full()], &TrialEngineConfig::with_trials(10, 0), &FirstOutcome);
        assert!(matches!(err, Err(McError::ExcessiveConflict { .. })));
    }
}
