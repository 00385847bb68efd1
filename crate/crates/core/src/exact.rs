//! Exact combination by Dempster's rule.
//!
//! Two independent routes to the same numbers: the orthogonal sum in mass
//! space ([`combine_pair`], [`combine_all`]) and direct enumeration of the
//! product of the sources' outcome spaces ([`exact_belief_enumeration`]).

use std::collections::HashMap;
use std::time::Instant;

use thiserror::Error;

use crate::evidence::{mass_from_source, EvidenceError, EvidenceProblem, MassFunction};
use crate::focal::FocalSet;

/// Conflict within this distance of 1 counts as total.
pub const TOTAL_CONFLICT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CombineError {
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error("total conflict: the sources admit no common element, combination undefined")]
    TotalConflict,
    #[error("resource limit at combine step {step}: {count} focal sets exceeds the cap of {limit}")]
    FocalLimit { step: usize, count: usize, limit: usize },
    #[error("resource limit: outcome space of {size} exceeds the enumeration cap of {limit}")]
    OutcomeLimit { size: u128, limit: u128 },
    #[error("resource limit at combine step {step}: time budget exhausted")]
    Deadline { step: usize },
}

impl CombineError {
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            CombineError::FocalLimit { .. } | CombineError::OutcomeLimit { .. } | CombineError::Deadline { .. }
        )
    }
}

/// Caps that keep exact computation from running away.
#[derive(Clone, Debug)]
pub struct ExactLimits {
    /// Most focal sets an intermediate combination may hold.
    pub max_focal_sets: usize,
    /// Largest product space `Π|Ω_i|` enumeration will walk.
    pub max_outcomes: u128,
    pub deadline: Option<Instant>,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            max_focal_sets: 1 << 20,
            max_outcomes: 10_000_000,
            deadline: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CombinationResult {
    pub combined: MassFunction,
    /// Mass that fell on ∅ before renormalization.
    pub conflict: f64,
}

const DEADLINE_POLL: usize = 1 << 12;

fn orthogonal_sum(
    m1: &MassFunction,
    m2: &MassFunction,
    limits: &ExactLimits,
    step: usize,
) -> Result<CombinationResult, CombineError> {
    if m1.frame() != m2.frame() {
        return Err(EvidenceError::FrameMismatch {
            expected: m1.frame().len(),
            found: m2.frame().len(),
        }
        .into());
    }
    let mut acc: HashMap<FocalSet, f64> = HashMap::with_capacity(m1.len().max(m2.len()));
    let mut conflict = 0.0;
    let mut products = 0usize;
    for (a1, w1) in m1.iter() {
        for (a2, w2) in m2.iter() {
            products += 1;
            if products.is_multiple_of(DEADLINE_POLL) {
                if let Some(deadline) = limits.deadline {
                    if Instant::now() >= deadline {
                        return Err(CombineError::Deadline { step });
                    }
                }
            }
            let mut meet = a1.clone();
            meet.intersect_in_place(a2);
            let w = w1 * w2;
            if meet.is_empty() {
                conflict += w;
                continue;
            }
            *acc.entry(meet).or_insert(0.0) += w;
            if acc.len() > limits.max_focal_sets {
                return Err(CombineError::FocalLimit {
                    step,
                    count: acc.len(),
                    limit: limits.max_focal_sets,
                });
            }
        }
    }
    let survival: f64 = acc.values().sum();
    if survival <= TOTAL_CONFLICT_TOLERANCE || conflict >= 1.0 - TOTAL_CONFLICT_TOLERANCE {
        return Err(CombineError::TotalConflict);
    }
    Ok(CombinationResult {
        combined: MassFunction::from_weights(m1.frame().clone(), acc),
        conflict: conflict / (conflict + survival),
    })
}

/// m1 ⊕ m2 with the default limits.
pub fn combine_pair(m1: &MassFunction, m2: &MassFunction) -> Result<CombinationResult, CombineError> {
    orthogonal_sum(m1, m2, &ExactLimits::default(), 1)
}

pub fn combine_all(problem: &EvidenceProblem) -> Result<CombinationResult, CombineError> {
    combine_all_with(problem, &ExactLimits::default())
}

/// Left fold of [`combine_pair`] in source order.
///
/// The reported conflict is that of the joint outcome space: the product of
/// the per-step survival probabilities `(1 − κ_step)`, subtracted from 1.
pub fn combine_all_with(
    problem: &EvidenceProblem,
    limits: &ExactLimits,
) -> Result<CombinationResult, CombineError> {
    problem.check()?;
    let mut sources = problem.sources().iter();
    let first = sources.next().expect("validated problem has a source");
    let mut combined = mass_from_source(first)?;
    if combined.len() > limits.max_focal_sets {
        return Err(CombineError::FocalLimit {
            step: 0,
            count: combined.len(),
            limit: limits.max_focal_sets,
        });
    }
    let mut survival = 1.0;
    for (step, source) in sources.enumerate() {
        let next = mass_from_source(source)?;
        let result = orthogonal_sum(&combined, &next, limits, step + 1)?;
        survival *= 1.0 - result.conflict;
        combined = result.combined;
    }
    Ok(CombinationResult {
        combined,
        conflict: 1.0 - survival,
    })
}

/// Probability totals from walking the whole outcome space.
#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    /// P′(Γ(ε) = ∅).
    pub empty: f64,
    /// P′(Γ(ε) ≠ ∅).
    pub nonempty: f64,
    /// P′(∅ ≠ Γ(ε) ⊆ b) for each query b.
    pub inside: Vec<f64>,
}

impl Enumeration {
    pub fn conflict(&self) -> f64 {
        self.empty / (self.empty + self.nonempty)
    }

    pub fn belief(&self, query: usize) -> f64 {
        (self.inside[query] / self.nonempty).min(1.0)
    }
}

/// Walks every ε ∈ Ω_1 × … × Ω_m, accumulating P′(ε) into buckets.
///
/// Intersections are built incrementally along the walk; once a prefix
/// intersection is empty the remaining sources cannot change that, so the
/// whole subtree is credited to the empty bucket at the prefix probability.
pub fn enumerate_outcomes(
    problem: &EvidenceProblem,
    queries: &[FocalSet],
    limits: &ExactLimits,
) -> Result<Enumeration, CombineError> {
    problem.check()?;
    for q in queries {
        if q.width() != problem.frame().len() {
            return Err(EvidenceError::FrameMismatch {
                expected: problem.frame().len(),
                found: q.width(),
            }
            .into());
        }
    }
    let size = problem.outcome_space_size();
    if size > limits.max_outcomes {
        return Err(CombineError::OutcomeLimit {
            size,
            limit: limits.max_outcomes,
        });
    }

    let sources = problem.sources();
    let m = sources.len();
    let mut totals = Enumeration {
        empty: 0.0,
        nonempty: 0.0,
        inside: vec![0.0; queries.len()],
    };
    // prefix_set[i] / prefix_p[i]: intersection and probability of the first i choices.
    let mut prefix_set = vec![problem.frame().full(); m + 1];
    let mut prefix_p = vec![1.0; m + 1];
    let mut choice = vec![0usize; m];
    let mut depth = 0usize;
    loop {
        // Descend from `depth` with the current choices.
        while depth < m {
            let outcome = &sources[depth].outcomes()[choice[depth]];
            let (head, tail) = prefix_set.split_at_mut(depth + 1);
            tail[0].clone_from(&head[depth]);
            tail[0].intersect_in_place(&outcome.target);
            prefix_p[depth + 1] = prefix_p[depth] * outcome.probability;
            depth += 1;
            if prefix_set[depth].is_empty() {
                break;
            }
        }
        let p = prefix_p[depth];
        let gamma = &prefix_set[depth];
        if gamma.is_empty() {
            totals.empty += p;
        } else {
            totals.nonempty += p;
            for (slot, q) in totals.inside.iter_mut().zip(queries) {
                if gamma.subset_unchecked(q) {
                    *slot += p;
                }
            }
        }
        // Advance the odometer at the deepest level reached.
        loop {
            if depth == 0 {
                if totals.nonempty <= TOTAL_CONFLICT_TOLERANCE {
                    return Err(CombineError::TotalConflict);
                }
                return Ok(totals);
            }
            let level = depth - 1;
            choice[level] += 1;
            if choice[level] < sources[level].outcomes().len() {
                depth = level;
                break;
            }
            choice[level] = 0;
            depth = level;
        }
    }
}

/// Bel(b) = P′(Γ(ε) ⊆ b | Γ(ε) ≠ ∅) by enumeration, with the conflict κ.
pub fn exact_belief_enumeration(
    problem: &EvidenceProblem,
    b: &FocalSet,
) -> Result<(f64, f64), CombineError> {
    let totals = enumerate_outcomes(problem, std::slice::from_ref(b), &ExactLimits::default())?;
    Ok((totals.belief(0), totals.conflict()))
}

/// κ = P′(Γ(ε) = ∅) by enumeration. Total conflict is reported as 1.
pub fn conflict_exact(problem: &EvidenceProblem) -> Result<f64, CombineError> {
    match enumerate_outcomes(problem, &[], &ExactLimits::default()) {
        Ok(totals) => Ok(totals.conflict()),
        Err(CombineError::TotalConflict) => Ok(1.0),
        Err(e) => Err(e),
    }
}
