//! Random problem instances for property tests and benchmarks.

use rand::Rng;

use crate::exact::conflict_exact;
use crate::evidence::{EvidenceProblem, Frame, Outcome, SourceModel};
use crate::focal::FocalSet;
use crate::logic::{Literal, LogicProblem, LogicSource, TermSet};

/// Size limits for [`random_problem`]; each dimension is drawn uniformly
/// from `1..=max`.
#[derive(Clone, Copy, Debug)]
pub struct ProblemShape {
    pub max_sources: usize,
    pub max_outcomes: usize,
    pub max_frame: usize,
    /// Problems whose exact conflict exceeds this are redrawn. Checked by
    /// enumeration, so keep the outcome space small when it is below 1.
    pub max_conflict: f64,
}

fn random_target<R: Rng>(rng: &mut R, n: usize) -> FocalSet {
    loop {
        // Mix dense and sparse targets so that conflict varies.
        let density: f64 = rng.gen_range(0.2..0.95);
        let set = FocalSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(density))).expect("in range");
        if !set.is_empty() {
            return set;
        }
    }
}

fn random_probabilities<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// A problem whose conflict is below 1 (so that belief is defined) and at
/// most `shape.max_conflict`.
pub fn random_problem<R: Rng>(rng: &mut R, shape: ProblemShape) -> EvidenceProblem {
    loop {
        let n = rng.gen_range(1..=shape.max_frame);
        let m = rng.gen_range(1..=shape.max_sources);
        let frame = Frame::numbered(n).expect("valid frame");
        let sources: Vec<SourceModel> = (0..m)
            .map(|_| {
                let k = rng.gen_range(1..=shape.max_outcomes);
                let outcomes = random_probabilities(rng, k)
                    .into_iter()
                    .map(|p| Outcome::new(p, random_target(rng, n)))
                    .collect();
                SourceModel::new(frame.clone(), outcomes).expect("valid source")
            })
            .collect();
        let problem = EvidenceProblem::new(frame, sources).expect("valid problem");
        if !admits_common_element(&problem) {
            continue;
        }
        if shape.max_conflict >= 1.0 || conflict_exact(&problem).is_ok_and(|k| k <= shape.max_conflict) {
            return problem;
        }
    }
}

// Some choice of outcomes has a non-empty intersection iff some element lies
// in at least one target of every source.
fn admits_common_element(problem: &EvidenceProblem) -> bool {
    (0..problem.frame().len()).any(|j| {
        problem
            .sources()
            .iter()
            .all(|s| s.outcomes().iter().any(|o| o.target.contains(j)))
    })
}

/// A random mass function over `frame`, as a single-source problem's source.
pub fn random_source<R: Rng>(rng: &mut R, frame: &Frame, max_outcomes: usize) -> SourceModel {
    let k = rng.gen_range(1..=max_outcomes);
    let outcomes = random_probabilities(rng, k)
        .into_iter()
        .map(|p| Outcome::new(p, random_target(rng, frame.len())))
        .collect();
    SourceModel::new(frame.clone(), outcomes).expect("valid source")
}

/// A random logic problem over `atoms` atoms. Terms are consistent; some
/// combinations across sources contradict.
pub fn random_logic_problem<R: Rng>(rng: &mut R, atoms: usize, max_sources: usize, max_outcomes: usize) -> LogicProblem {
    let names: Vec<String> = (0..atoms).map(|k| format!("a{k}")).collect();
    loop {
        let m = rng.gen_range(1..=max_sources);
        let sources = (0..m)
            .map(|_| {
                let k = rng.gen_range(1..=max_outcomes);
                LogicSource {
                    outcomes: random_probabilities(rng, k)
                        .into_iter()
                        .map(|p| {
                            let len = rng.gen_range(0..=atoms.min(3));
                            let mut chosen: Vec<usize> = (0..atoms).collect();
                            let lits = (0..len).map(|_| {
                                let a = chosen.swap_remove(rng.gen_range(0..chosen.len()));
                                Literal {
                                    atom: a,
                                    positive: rng.gen_bool(0.5),
                                }
                            });
                            (p, TermSet::new(lits.collect::<Vec<_>>()))
                        })
                        .collect(),
                }
            })
            .collect();
        let problem = LogicProblem::new(names.clone(), sources).expect("valid logic problem");
        // Reject problems where every joint choice contradicts.
        if logic_admits_consistency(&problem) {
            return problem;
        }
    }
}

fn logic_admits_consistency(problem: &LogicProblem) -> bool {
    let k = problem.atoms().len();
    (0..1u64 << k).any(|a| {
        problem
            .sources()
            .iter()
            .all(|s| s.outcomes.iter().any(|(_, t)| t.satisfied_by(a)))
    })
}
