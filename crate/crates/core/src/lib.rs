//! Dempster-Shafer belief, computed exactly on small problems and estimated
//! by Monte-Carlo trials on large ones.
//!
//! - [`evidence`]: frames, focal sets, mass functions and sources.
//! - [`exact`]: Dempster's rule in mass space and by outcome enumeration.
//! - [`mc`]: the trial estimator, accuracy planning and conflict estimates.
//! - [`logic`]: the same trial scheme over literal conjunctions and clauses.
//! - [`random`]: random instances for tests and benchmarks.

pub mod evidence;
pub mod exact;
pub mod focal;
pub mod logic;
pub mod mc;
pub mod random;

pub use evidence::{
    bel_from_mass, bel_table, mass_from_bel, mass_from_source, pl_from_mass, validate_problem, EvidenceError,
    EvidenceProblem, Frame, MassFunction, Outcome, SimpleSupport, SourceModel, ValidationReport, Violation,
};
pub use exact::{
    combine_all, combine_all_with, combine_pair, conflict_exact, enumerate_outcomes, exact_belief_enumeration,
    CombinationResult, CombineError, Enumeration, ExactLimits,
};
pub use focal::{focal_intersect, FocalSet};
pub use mc::{
    conflict_estimate, estimate, estimate_with_draw, plan_trials, sd_bound, subset_frequency_scan, worker_rng,
    ConflictEstimate, Estimate, IndependentDraw, JointDraw, McError, SourceSampler, TrialEngine, TrialEngineConfig,
    TrialOutcome, TrialRng,
};
