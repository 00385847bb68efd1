//! Belief over propositional literals.
//!
//! Sources assert conjunctions of literals, queries are clauses. A trial
//! conjoins one sampled term per source, restarts when the conjunction is
//! contradictory, and succeeds when it entails the clause. Both checks are
//! linear in the number of literals involved.
//!
//! A per-trial step budget, counted in literal-membership operations, cuts
//! long trials short. A cut trial scores 0 for the lower bound and 1 for the
//! upper bound.

use std::collections::HashMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::evidence::{EvidenceError, EvidenceProblem, Frame, Outcome, SourceModel, SUM_TOLERANCE};
use crate::focal::FocalSet;
use crate::mc::{sd_bound, SourceSampler, TrialEngineConfig};

/// Most atoms [`translate_to_set_problem`] will expand into assignments.
pub const MAX_TRANSLATED_ATOMS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogicError {
    #[error("invalid logic problem: {0}")]
    Invalid(String),
    #[error("entailment asked of a contradictory term")]
    ContradictoryTerm,
    #[error("{atoms} atoms exceeds the translation limit of {max}")]
    TooManyAtoms { atoms: usize, max: usize },
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
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
}

/// An atom index with a polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: usize) -> Literal {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: usize) -> Literal {
        Literal { atom, positive: false }
    }

    pub fn negated(self) -> Literal {
        Literal {
            atom: self.atom,
            positive: !self.positive,
        }
    }
}

/// A conjunction of literals. May be contradictory.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TermSet {
    literals: Vec<Literal>,
}

impl TermSet {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> TermSet {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort();
        literals.dedup();
        TermSet { literals }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.binary_search(&lit).is_ok()
    }

    pub fn union(&self, other: &TermSet) -> TermSet {
        TermSet::new(self.literals.iter().chain(&other.literals).copied())
    }

    /// True iff an atom occurs with both polarities.
    pub fn is_contradictory(&self) -> bool {
        // Sorted by (atom, polarity): a complementary pair sits side by side.
        self.literals.windows(2).any(|w| w[0].atom == w[1].atom)
    }

    /// Does the term hold under `assignment` (bit `a` = truth of atom `a`)?
    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.literals
            .iter()
            .all(|l| ((assignment >> l.atom) & 1 == 1) == l.positive)
    }
}

/// A disjunction of literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseQuery {
    literals: Vec<Literal>,
}

impl ClauseQuery {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<ClauseQuery, LogicError> {
        let term = TermSet::new(literals);
        if term.literals.is_empty() {
            return Err(LogicError::Invalid("clause has no literals".into()));
        }
        Ok(ClauseQuery { literals: term.literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    /// Contains some literal and its negation.
    pub fn is_tautology(&self) -> bool {
        self.literals.windows(2).any(|w| w[0].atom == w[1].atom)
    }

    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.literals
            .iter()
            .any(|l| ((assignment >> l.atom) & 1 == 1) == l.positive)
    }
}

pub fn is_contradictory(t: &TermSet) -> bool {
    t.is_contradictory()
}

/// Whether a consistent conjunction of literals entails a clause: the clause
/// is a tautology or shares a literal with the term.
pub fn entails(t: &TermSet, c: &ClauseQuery) -> Result<bool, LogicError> {
    if t.is_contradictory() {
        return Err(LogicError::ContradictoryTerm);
    }
    Ok(c.is_tautology() || c.literals.iter().any(|l| t.contains(*l)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogicSource {
    pub outcomes: Vec<(f64, TermSet)>,
}

/// Atom names plus the sources over them.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicProblem {
    atoms: Vec<String>,
    index: HashMap<String, usize>,
    sources: Vec<LogicSource>,
}

impl LogicProblem {
    pub fn new(atoms: Vec<String>, sources: Vec<LogicSource>) -> Result<LogicProblem, LogicError> {
        let problem = LogicProblem::unchecked(atoms, sources)?;
        let report = problem.violations();
        if !report.is_empty() {
            return Err(LogicError::Invalid(report.join("; ")));
        }
        Ok(problem)
    }

    /// Builds the atom index but leaves the sources unchecked.
    pub fn unchecked(atoms: Vec<String>, sources: Vec<LogicSource>) -> Result<LogicProblem, LogicError> {
        if atoms.is_empty() {
            return Err(LogicError::Invalid("no atoms declared".into()));
        }
        let mut index = HashMap::new();
        for (k, a) in atoms.iter().enumerate() {
            if a.is_empty() {
                return Err(LogicError::Invalid(format!("atom {k} has an empty name")));
            }
            if index.insert(a.clone(), k).is_some() {
                return Err(LogicError::Invalid(format!("duplicate atom '{a}'")));
            }
        }
        Ok(LogicProblem { atoms, index, sources })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn sources(&self) -> &[LogicSource] {
        &self.sources
    }

    /// Problems with each source, in the same wording as the set validator.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.sources.is_empty() {
            out.push("problem has no sources".to_string());
        }
        for (i, source) in self.sources.iter().enumerate() {
            if source.outcomes.is_empty() {
                out.push(format!("source {i}: no outcomes"));
                continue;
            }
            let mut total = 0.0;
            for (k, (p, t)) in source.outcomes.iter().enumerate() {
                if !(p.is_finite() && *p > 0.0) {
                    out.push(format!("source {i} outcome {k}: probability {p} is not positive"));
                }
                if t.literals.iter().any(|l| l.atom >= self.atoms.len()) {
                    out.push(format!("source {i} outcome {k}: literal on an undeclared atom"));
                }
                if t.is_contradictory() {
                    out.push(format!("source {i} outcome {k}: contradictory term"));
                }
                total += p;
            }
            if total.is_finite() && (total - 1.0).abs() > SUM_TOLERANCE {
                out.push(format!(
                    "source {i}: probabilities sum to {}",
                    (total * 1e9).round() / 1e9
                ));
            }
        }
        out
    }

    pub fn display_literal(&self, l: Literal) -> String {
        let name = &self.atoms[l.atom];
        if l.positive {
            name.clone()
        } else {
            format!("!{name}")
        }
    }

    fn check_clause(&self, c: &ClauseQuery) -> Result<(), LogicError> {
        if c.literals.iter().any(|l| l.atom >= self.atoms.len()) {
            return Err(LogicError::Invalid("query mentions an undeclared atom".into()));
        }
        Ok(())
    }
}

/// Result of a budgeted run: bounds on Bel(c).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedEstimate {
    /// Proportion of trials that finished and entailed the clause.
    pub lower: f64,
    /// As `lower`, but counting cut trials as successes.
    pub upper: f64,
    pub trials: u64,
    pub successes: u64,
    pub timeouts: u64,
    pub restarts: u64,
    pub sd_bound: f64,
}

enum TrialEnd {
    Entailed,
    NotEntailed,
    TimedOut,
}

// Generation-stamped partial assignment, so that clearing between attempts is O(1).
struct Scratch {
    stamp: Vec<u64>,
    value: Vec<bool>,
    generation: u64,
    picks: Vec<usize>,
}

impl Scratch {
    fn new(atoms: usize, sources: usize) -> Scratch {
        Scratch {
            stamp: vec![0; atoms],
            value: vec![false; atoms],
            generation: 0,
            picks: vec![0; sources],
        }
    }
}

struct LogicEngine<'a> {
    problem: &'a LogicProblem,
    samplers: Vec<SourceSampler>,
}

impl LogicEngine<'_> {
    fn run_trial(
        &self,
        clause: &ClauseQuery,
        rng: &mut ChaCha8Rng,
        budget: u64,
        cap: u64,
        scratch: &mut Scratch,
    ) -> Result<(TrialEnd, u64), u64> {
        let mut ops = 0u64;
        let mut restarts = 0u64;
        loop {
            // One draw per source, all before any checking.
            for (pick, sampler) in scratch.picks.iter_mut().zip(&self.samplers) {
                *pick = sampler.sample(rng);
            }
            scratch.generation += 1;
            let generation = scratch.generation;
            let mut contradictory = false;
            'conjoin: for (source, &k) in self.problem.sources.iter().zip(&scratch.picks) {
                for lit in source.outcomes[k].1.literals() {
                    ops += 1;
                    if ops > budget {
                        return Ok((TrialEnd::TimedOut, restarts));
                    }
                    if scratch.stamp[lit.atom] == generation {
                        if scratch.value[lit.atom] != lit.positive {
                            contradictory = true;
                            break 'conjoin;
                        }
                    } else {
                        scratch.stamp[lit.atom] = generation;
                        scratch.value[lit.atom] = lit.positive;
                    }
                }
            }
            if contradictory {
                restarts += 1;
                if restarts > cap {
                    return Err(restarts);
                }
                continue;
            }
            if clause.is_tautology() {
                return Ok((TrialEnd::Entailed, restarts));
            }
            for lit in clause.literals() {
                ops += 1;
                if ops > budget {
                    return Ok((TrialEnd::TimedOut, restarts));
                }
                if scratch.stamp[lit.atom] == generation && scratch.value[lit.atom] == lit.positive {
                    return Ok((TrialEnd::Entailed, restarts));
                }
            }
            return Ok((TrialEnd::NotEntailed, restarts));
        }
    }
}

#[derive(Default)]
struct LogicTally {
    successes: u64,
    timeouts: u64,
    restarts: u64,
    accepted: u64,
}

/// Estimates Bel(c) with an optional per-trial step budget.
///
/// Trial `t` of a run seeded with `s` draws from ChaCha8 keyed by
/// `seed_from_u64(s)` on stream `t`. A trial's draws therefore do not depend
/// on the budget, the worker count, or how earlier trials ended, so raising
/// the budget can only turn timeouts into finished trials.
pub fn logic_estimate(
    problem: &LogicProblem,
    clause: &ClauseQuery,
    cfg: &TrialEngineConfig,
    step_budget: Option<u64>,
) -> Result<BoundedEstimate, LogicError> {
    let report = problem.violations();
    if !report.is_empty() {
        return Err(LogicError::Invalid(report.join("; ")));
    }
    problem.check_clause(clause)?;
    if cfg.trials == 0 || cfg.worker_count == 0 || cfg.restart_cap == 0 {
        return Err(LogicError::InvalidConfig(
            "trials, workers and restart cap must all be at least 1".into(),
        ));
    }
    let budget = match step_budget {
        Some(0) => return Err(LogicError::InvalidConfig("step budget must be at least 1".into())),
        Some(b) => b,
        None => u64::MAX,
    };
    let samplers = problem
        .sources
        .iter()
        .map(|s| SourceSampler::from_probabilities(s.outcomes.iter().map(|(p, _)| *p)))
        .collect();
    let engine = LogicEngine { problem, samplers };
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);

    let worker = |start: u64, count: u64| -> Result<LogicTally, LogicError> {
        let mut tally = LogicTally::default();
        let mut scratch = Scratch::new(problem.atoms.len(), problem.sources.len());
        for t in start..start + count {
            let mut rng = base.clone();
            rng.set_stream(t);
            match engine.run_trial(clause, &mut rng, budget, cfg.restart_cap, &mut scratch) {
                Ok((end, r)) => {
                    tally.restarts += r;
                    tally.accepted += 1;
                    match end {
                        TrialEnd::Entailed => tally.successes += 1,
                        TrialEnd::NotEntailed => {}
                        TrialEnd::TimedOut => tally.timeouts += 1,
                    }
                }
                Err(r) => {
                    let restarts = tally.restarts + r;
                    return Err(LogicError::ExcessiveConflict {
                        restarts,
                        accepted: tally.accepted,
                        conflict_estimate: restarts as f64 / (restarts + tally.accepted) as f64,
                    });
                }
            }
        }
        Ok(tally)
    };

    let w = cfg.worker_count as u64;
    let mut ranges = Vec::with_capacity(cfg.worker_count);
    let mut start = 0;
    for k in 0..w {
        let count = cfg.trials / w + u64::from(k < cfg.trials % w);
        ranges.push((start, count));
        start += count;
    }
    let results: Vec<Result<LogicTally, LogicError>> = if cfg.worker_count == 1 {
        vec![worker(0, cfg.trials)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .iter()
                .map(|&(s, c)| {
                    let worker = &worker;
                    scope.spawn(move || worker(s, c))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("logic worker panicked"))
                .collect()
        })
    };
    let mut total = LogicTally::default();
    for r in results {
        let t = r?;
        total.successes += t.successes;
        total.timeouts += t.timeouts;
        total.restarts += t.restarts;
        total.accepted += t.accepted;
    }
    let n = total.accepted as f64;
    Ok(BoundedEstimate {
        lower: total.successes as f64 / n,
        upper: (total.successes + total.timeouts) as f64 / n,
        trials: total.accepted,
        successes: total.successes,
        timeouts: total.timeouts,
        restarts: total.restarts,
        sd_bound: sd_bound(total.accepted),
    })
}

fn assignment_label(problem: &LogicProblem, assignment: u64) -> String {
    problem
        .atoms
        .iter()
        .enumerate()
        .map(|(k, name)| {
            if (assignment >> k) & 1 == 1 {
                name.clone()
            } else {
                format!("!{name}")
            }
        })
        .collect::<Vec<_>>()
        .join("&")
}

/// The frame of all truth assignments; element `a` is the assignment whose
/// bit `k` gives atom `k`.
pub fn assignment_frame(problem: &LogicProblem) -> Result<Frame, LogicError> {
    let k = problem.atoms.len();
    if k > MAX_TRANSLATED_ATOMS {
        return Err(LogicError::TooManyAtoms {
            atoms: k,
            max: MAX_TRANSLATED_ATOMS,
        });
    }
    Ok(Frame::new((0..1u64 << k).map(|a| assignment_label(problem, a)))?)
}

fn models<F: Fn(u64) -> bool>(frame: &Frame, holds: F) -> FocalSet {
    let mut set = frame.empty_set();
    for a in 0..frame.len() {
        if holds(a as u64) {
            set.insert(a);
        }
    }
    set
}

/// Assignments satisfying a term.
pub fn term_models(frame: &Frame, t: &TermSet) -> FocalSet {
    models(frame, |a| t.satisfied_by(a))
}

/// Assignments satisfying a clause.
pub fn clause_models(frame: &Frame, c: &ClauseQuery) -> FocalSet {
    models(frame, |a| c.satisfied_by(a))
}

/// The equivalent set problem over truth assignments.
pub fn translate_to_set_problem(problem: &LogicProblem) -> Result<EvidenceProblem, LogicError> {
    let report = problem.violations();
    if !report.is_empty() {
        return Err(LogicError::Invalid(report.join("; ")));
    }
    let frame = assignment_frame(problem)?;
    let sources = problem
        .sources
        .iter()
        .map(|s| {
            let outcomes = s
                .outcomes
                .iter()
                .map(|(p, t)| Outcome::new(*p, term_models(&frame, t)))
                .collect();
            SourceModel::new(frame.clone(), outcomes)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvidenceProblem::new(frame, sources)?)
}

impl fmt::Display for BoundedEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:.7}, {:.7}] over {} trials ({} cut short)",
            self.lower, self.upper, self.trials, self.timeouts
        )
    }
}
