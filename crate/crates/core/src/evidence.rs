//! Frames, mass functions and evidence sources.
//!
//! A source is kept in its sampling form (an ordered list of outcomes, each
//! with a probability and the subset of the frame it implies). Its mass
//! function is derived from it by summing the probabilities of outcomes that
//! share a target.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::focal::FocalSet;

/// Tolerance on probability and mass sums of user-supplied input.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Masses below this after arithmetic are discarded.
pub const MASS_DUST: f64 = 1e-12;

/// Largest frame accepted.
pub const MAX_FRAME_SIZE: usize = 1 << 16;

/// Largest frame for which full belief tables (2^n entries) are built.
pub const MAX_TABLE_FRAME: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvidenceError {
    #[error("frame mismatch: expected {expected} elements, found {found}")]
    FrameMismatch { expected: usize, found: usize },
    #[error("intersection of an empty list of sets")]
    EmptySetList,
    #[error("element index {index} outside frame of {width}")]
    IndexOutOfRange { index: usize, width: usize },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("unknown frame element '{0}'")]
    UnknownLabel(String),
    #[error("invalid mass function: {0}")]
    InvalidMass(String),
    #[error("frame of {n} elements exceeds the table limit of {max}")]
    FrameTooLarge { n: usize, max: usize },
    #[error("belief table is not a belief function: m({set:?}) = {mass}")]
    NotABeliefFunction { set: FocalSet, mass: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(ValidationReport),
}

struct FrameInner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

/// The frame of discernment Θ: an ordered list of distinct element labels.
///
/// Cloning is cheap; clones share the label storage.
#[derive(Clone)]
pub struct Frame {
    inner: Arc<FrameInner>,
}

impl Frame {
    pub fn new<I, S>(labels: I) -> Result<Frame, EvidenceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(EvidenceError::InvalidFrame("frame has no elements".into()));
        }
        if labels.len() > MAX_FRAME_SIZE {
            return Err(EvidenceError::InvalidFrame(format!(
                "{} elements exceeds the limit of {MAX_FRAME_SIZE}",
                labels.len()
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (j, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(EvidenceError::InvalidFrame(format!("element {j} has an empty label")));
            }
            if index.insert(label.clone(), j).is_some() {
                return Err(EvidenceError::InvalidFrame(format!("duplicate label '{label}'")));
            }
        }
        Ok(Frame {
            inner: Arc::new(FrameInner { labels, index }),
        })
    }

    /// Frame with labels `x1..xn`.
    pub fn numbered(n: usize) -> Result<Frame, EvidenceError> {
        Frame::new((1..=n).map(|j| format!("x{j}")))
    }

    pub fn len(&self) -> usize {
        self.inner.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    pub fn label(&self, j: usize) -> &str {
        &self.inner.labels[j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.inner.index.get(label).copied()
    }

    /// Θ itself.
    pub fn full(&self) -> FocalSet {
        FocalSet::full(self.len())
    }

    pub fn empty_set(&self) -> FocalSet {
        FocalSet::empty(self.len())
    }

    pub fn subset<I, S>(&self, labels: I) -> Result<FocalSet, EvidenceError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = self.empty_set();
        for label in labels {
            let label = label.as_ref();
            let j = self
                .index_of(label)
                .ok_or_else(|| EvidenceError::UnknownLabel(label.to_string()))?;
            set.insert(j);
        }
        Ok(set)
    }

    pub(crate) fn check(&self, set: &FocalSet) -> Result<(), EvidenceError> {
        if set.width() != self.len() {
            return Err(EvidenceError::FrameMismatch {
                expected: self.len(),
                found: set.width(),
            });
        }
        Ok(())
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Frame) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.labels == other.inner.labels
    }
}

impl Eq for Frame {}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Frame").field(&self.inner.labels).finish()
    }
}

/// A normalized mass function: no mass on ∅, every entry positive, total 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    entries: BTreeMap<FocalSet, f64>,
}

impl MassFunction {
    /// Builds a mass function from `(set, mass)` pairs, merging repeated sets.
    ///
    /// The input must already sum to 1 within [`SUM_TOLERANCE`]; the stored
    /// masses are rescaled to sum to 1 exactly.
    pub fn new<I>(frame: Frame, entries: I) -> Result<MassFunction, EvidenceError>
    where
        I: IntoIterator<Item = (FocalSet, f64)>,
    {
        let mut merged: BTreeMap<FocalSet, f64> = BTreeMap::new();
        for (set, mass) in entries {
            frame.check(&set)?;
            if set.is_empty() {
                return Err(EvidenceError::InvalidMass("mass assigned to the empty set".into()));
            }
            if !(mass.is_finite() && mass > 0.0) {
                return Err(EvidenceError::InvalidMass(format!("non-positive mass {mass}")));
            }
            *merged.entry(set).or_insert(0.0) += mass;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(EvidenceError::InvalidMass(format!("masses sum to {}", display_sum(total))));
        }
        for mass in merged.values_mut() {
            *mass /= total;
        }
        Ok(MassFunction { frame, entries: merged })
    }

    /// Normalizes raw non-negative weights that may carry arithmetic dust.
    /// Entries below [`MASS_DUST`] are dropped before rescaling. The caller
    /// guarantees no weight sits on ∅.
    pub(crate) fn from_weights(frame: Frame, weights: impl IntoIterator<Item = (FocalSet, f64)>) -> Self {
        let mut entries: BTreeMap<FocalSet, f64> = weights
            .into_iter()
            .filter(|(_, w)| *w >= MASS_DUST)
            .collect();
        let total: f64 = entries.values().sum();
        for mass in entries.values_mut() {
            *mass /= total;
        }
        MassFunction { frame, entries }
    }

    /// The vacuous function `{Θ: 1}`.
    pub fn vacuous(frame: Frame) -> MassFunction {
        let full = frame.full();
        MassFunction {
            frame,
            entries: BTreeMap::from([(full, 1.0)]),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self, set: &FocalSet) -> f64 {
        self.entries.get(set).copied().unwrap_or(0.0)
    }

    /// Focal sets with their masses, in set order.
    pub fn iter(&self) -> impl Iterator<Item = (&FocalSet, f64)> {
        self.entries.iter().map(|(s, m)| (s, *m))
    }

    pub fn bel(&self, b: &FocalSet) -> Result<f64, EvidenceError> {
        bel_from_mass(self, b)
    }

    pub fn pl(&self, b: &FocalSet) -> Result<f64, EvidenceError> {
        pl_from_mass(self, b)
    }

    /// Largest absolute per-entry difference against another mass function.
    pub fn max_abs_diff(&self, other: &MassFunction) -> f64 {
        let mut worst: f64 = 0.0;
        for (set, mass) in self.iter() {
            worst = worst.max((mass - other.mass(set)).abs());
        }
        for (set, mass) in other.iter() {
            worst = worst.max((mass - self.mass(set)).abs());
        }
        worst
    }
}

/// Bel(b) = Σ m(a) over focal sets a ⊆ b.
pub fn bel_from_mass(m: &MassFunction, b: &FocalSet) -> Result<f64, EvidenceError> {
    m.frame.check(b)?;
    Ok(m.iter()
        .filter(|(a, _)| a.subset_unchecked(b))
        .map(|(_, mass)| mass)
        .sum::<f64>()
        .min(1.0))
}

/// Pl(b) = Σ m(a) over focal sets a meeting b.
pub fn pl_from_mass(m: &MassFunction, b: &FocalSet) -> Result<f64, EvidenceError> {
    m.frame.check(b)?;
    let mut total = 0.0;
    for (a, mass) in m.iter() {
        if a.intersects(b)? {
            total += mass;
        }
    }
    Ok(total.min(1.0))
}

/// One outcome ε of a source: its probability and the subset Γ(ε) it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    pub target: FocalSet,
}

impl Outcome {
    pub fn new(probability: f64, target: FocalSet) -> Outcome {
        Outcome { probability, target }
    }
}

/// A single source of evidence: a finite outcome space with its probabilities
/// and the subset of the frame each outcome implies.
///
/// Outcome order matters for sampling, so repeated targets are kept apart.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceModel {
    frame: Frame,
    outcomes: Vec<Outcome>,
}

impl SourceModel {
    /// Builds a source and checks it.
    pub fn new(frame: Frame, outcomes: Vec<Outcome>) -> Result<SourceModel, EvidenceError> {
        let source = SourceModel::unchecked(frame, outcomes);
        let mut report = ValidationReport::default();
        source.collect_violations(&source.frame, 0, &mut report);
        if report.is_empty() {
            Ok(source)
        } else {
            Err(EvidenceError::InvalidProblem(report))
        }
    }

    /// Builds a source without checking it; use [`validate_problem`] to
    /// collect what is wrong with it.
    pub fn unchecked(frame: Frame, outcomes: Vec<Outcome>) -> SourceModel {
        SourceModel { frame, outcomes }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// Views the source as a simple support function, if it is one: at most
    /// one target differs from Θ.
    pub fn as_simple_support(&self) -> Option<SimpleSupport> {
        let full = self.frame.full();
        let mut focus: Option<&FocalSet> = None;
        let mut weight = 0.0;
        for o in &self.outcomes {
            if o.target == full {
                continue;
            }
            match focus {
                Some(f) if f != &o.target => return None,
                _ => {
                    focus = Some(&o.target);
                    weight += o.probability;
                }
            }
        }
        Some(match focus {
            Some(f) => SimpleSupport { focus: f.clone(), weight },
            None => SimpleSupport { focus: full, weight: 1.0 },
        })
    }

    fn collect_violations(&self, frame: &Frame, index: usize, report: &mut ValidationReport) {
        if &self.frame != frame {
            report.push(Some(index), None, "frame differs from the problem frame");
        }
        if self.outcomes.is_empty() {
            report.push(Some(index), None, "no outcomes");
            return;
        }
        let mut total = 0.0;
        for (k, o) in self.outcomes.iter().enumerate() {
            if !(o.probability.is_finite() && o.probability > 0.0) {
                report.push(
                    Some(index),
                    Some(k),
                    format!("probability {} is not positive", o.probability),
                );
            }
            if o.target.width() != frame.len() {
                report.push(
                    Some(index),
                    Some(k),
                    format!(
                        "target ranges over {} elements, frame has {}",
                        o.target.width(),
                        frame.len()
                    ),
                );
            } else if o.target.is_empty() {
                report.push(Some(index), Some(k), "empty target");
            }
            total += o.probability;
        }
        if total.is_finite() && (total - 1.0).abs() > SUM_TOLERANCE {
            report.push(
                Some(index),
                None,
                format!("probabilities sum to {}", display_sum(total)),
            );
        }
    }
}

/// A simple support function: mass `weight` on `focus`, the rest on Θ.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleSupport {
    pub focus: FocalSet,
    pub weight: f64,
}

impl SimpleSupport {
    pub fn new(focus: FocalSet, weight: f64) -> SimpleSupport {
        SimpleSupport { focus, weight }
    }

    /// The source `[(s, focus), (1 − s, Θ)]`, or `[(1, focus)]` when `s = 1`.
    pub fn to_source(&self, frame: &Frame) -> Result<SourceModel, EvidenceError> {
        frame.check(&self.focus)?;
        if !(self.weight > 0.0 && self.weight <= 1.0) {
            return Err(EvidenceError::InvalidMass(format!(
                "support weight {} outside (0, 1]",
                self.weight
            )));
        }
        let mut outcomes = vec![Outcome::new(self.weight, self.focus.clone())];
        if self.weight < 1.0 {
            outcomes.push(Outcome::new(1.0 - self.weight, frame.full()));
        }
        SourceModel::new(frame.clone(), outcomes)
    }
}

/// m_i: probabilities of outcomes sharing a target are summed.
pub fn mass_from_source(source: &SourceModel) -> Result<MassFunction, EvidenceError> {
    MassFunction::new(
        source.frame.clone(),
        source
            .outcomes
            .iter()
            .map(|o| (o.target.clone(), o.probability)),
    )
}

/// A frame together with the sources to combine.
#[derive(Clone, Debug, PartialEq)]
pub struct EvidenceProblem {
    frame: Frame,
    sources: Vec<SourceModel>,
}

impl EvidenceProblem {
    pub fn new(frame: Frame, sources: Vec<SourceModel>) -> Result<EvidenceProblem, EvidenceError> {
        let problem = EvidenceProblem::unchecked(frame, sources);
        problem.check()?;
        Ok(problem)
    }

    pub fn unchecked(frame: Frame, sources: Vec<SourceModel>) -> EvidenceProblem {
        EvidenceProblem { frame, sources }
    }

    /// Problem made of simple support functions.
    pub fn from_simple_supports(
        frame: Frame,
        supports: &[SimpleSupport],
    ) -> Result<EvidenceProblem, EvidenceError> {
        let sources = supports
            .iter()
            .map(|s| s.to_source(&frame))
            .collect::<Result<Vec<_>, _>>()?;
        EvidenceProblem::new(frame, sources)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn sources(&self) -> &[SourceModel] {
        &self.sources
    }

    /// Fails with the full validation report if any invariant is broken.
    pub fn check(&self) -> Result<(), EvidenceError> {
        let report = validate_problem(self);
        if report.is_empty() {
            Ok(())
        } else {
            Err(EvidenceError::InvalidProblem(report))
        }
    }

    /// The size of the product space Ω, saturating at `u128::MAX`.
    pub fn outcome_space_size(&self) -> u128 {
        self.sources
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.outcomes.len() as u128))
    }
}

/// One broken invariant, located by source and outcome index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub source: Option<usize>,
    pub outcome: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.source, self.outcome) {
            (Some(s), Some(o)) => write!(f, "source {s} outcome {o}: {}", self.message),
            (Some(s), None) => write!(f, "source {s}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, source: Option<usize>, outcome: Option<usize>, message: impl Into<String>) {
        self.violations.push(Violation {
            source,
            outcome,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_problem(problem: &EvidenceProblem) -> ValidationReport {
    let mut report = ValidationReport::default();
    if problem.sources.is_empty() {
        report.push(None, None, "problem has no sources");
    }
    for (i, source) in problem.sources.iter().enumerate() {
        source.collect_violations(&problem.frame, i, &mut report);
    }
    report
}

// Sums are printed rounded to 1e-9 so that 0.6 + 0.5 reads as 1.1.
fn display_sum(total: f64) -> f64 {
    (total * 1e9).round() / 1e9
}

fn check_table_frame(frame: &Frame) -> Result<usize, EvidenceError> {
    let n = frame.len();
    if n > MAX_TABLE_FRAME {
        return Err(EvidenceError::FrameTooLarge { n, max: MAX_TABLE_FRAME });
    }
    Ok(n)
}

/// Bel over all 2^n subsets, indexed by the subset's bitmask.
pub fn bel_table(m: &MassFunction) -> Result<Vec<f64>, EvidenceError> {
    let n = check_table_frame(&m.frame)?;
    let mut table = vec![0.0; 1usize << n];
    for (mask, slot) in table.iter_mut().enumerate() {
        let b = mask as u64;
        *slot = m
            .iter()
            .filter(|(a, _)| a.low_mask() & !b == 0)
            .map(|(_, mass)| mass)
            .sum();
    }
    Ok(table)
}

/// Möbius inversion of a belief table:
/// m(a) = Σ_{c ⊆ a} (−1)^{|a∖c|} Bel(c), summed directly over submasks.
pub fn mass_from_bel(frame: &Frame, bel: &[f64]) -> Result<MassFunction, EvidenceError> {
    let n = check_table_frame(frame)?;
    if bel.len() != 1usize << n {
        return Err(EvidenceError::InvalidMass(format!(
            "belief table has {} entries, expected {}",
            bel.len(),
            1usize << n
        )));
    }
    let mut weights = Vec::new();
    for a in 1..bel.len() {
        let mut mass = 0.0;
        let mut c = a;
        loop {
            let sign = if (a & !c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            mass += sign * bel[c];
            if c == 0 {
                break;
            }
            c = (c - 1) & a;
        }
        let set = FocalSet::from_words(n, &[a as u64]);
        if mass < -SUM_TOLERANCE {
            return Err(EvidenceError::NotABeliefFunction { set, mass });
        }
        if mass > 0.0 {
            weights.push((set, mass));
        }
    }
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > SUM_TOLERANCE || bel[0].abs() > SUM_TOLERANCE {
        return Err(EvidenceError::InvalidMass(format!(
            "belief table implies total mass {} with Bel(∅) = {}",
            display_sum(total),
            bel[0]
        )));
    }
    Ok(MassFunction::from_weights(frame.clone(), weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame3() -> Frame {
        Frame::new(["x1", "x2", "x3"]).unwrap()
    }

    fn combined_example(frame: &Frame) -> MassFunction {
        MassFunction::new(
            frame.clone(),
            [
                (frame.subset(["x1"]).unwrap(), 3.0 / 7.0),
                (frame.subset(["x2"]).unwrap(), 2.0 / 7.0),
                (frame.full(), 2.0 / 7.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn frame_rejects_bad_labels() {
        assert!(Frame::new(Vec::<String>::new()).is_err());
        assert!(Frame::new(["a", "a"]).is_err());
        assert!(Frame::new(["a", ""]).is_err());
        assert_eq!(Frame::numbered(1024).unwrap().len(), 1024);
        assert_eq!(Frame::numbered(3).unwrap(), frame3());
    }

    #[test]
    fn belief_and_plausibility_examples() {
        let f = frame3();
        let m = combined_example(&f);
        let x1 = f.subset(["x1"]).unwrap();
        assert!((bel_from_mass(&m, &x1).unwrap() - 3.0 / 7.0).abs() < 1e-12);
        assert!((pl_from_mass(&m, &x1).unwrap() - 5.0 / 7.0).abs() < 1e-12);
        assert_eq!(bel_from_mass(&m, &f.full()).unwrap(), 1.0);
        assert_eq!(bel_from_mass(&m, &f.empty_set()).unwrap(), 0.0);
        assert_eq!(pl_from_mass(&m, &f.full()).unwrap(), 1.0);
        assert_eq!(pl_from_mass(&m, &f.empty_set()).unwrap(), 0.0);
        assert!(bel_from_mass(&m, &FocalSet::full(4)).is_err());
    }

    #[test]
    fn mass_from_source_examples() {
        let f = frame3();
        let x1 = f.subset(["x1"]).unwrap();
        let ssf = SimpleSupport::new(x1.clone(), 0.6).to_source(&f).unwrap();
        let m = mass_from_source(&ssf).unwrap();
        assert_eq!(m.len(), 2);
        assert!((m.mass(&x1) - 0.6).abs() < 1e-12);
        assert!((m.mass(&f.full()) - 0.4).abs() < 1e-12);

        let dup = SourceModel::new(
            f.clone(),
            vec![
                Outcome::new(0.3, x1.clone()),
                Outcome::new(0.3, x1.clone()),
                Outcome::new(0.4, f.full()),
            ],
        )
        .unwrap();
        assert_eq!(dup.outcomes().len(), 3);
        let merged = mass_from_source(&dup).unwrap();
        assert!(merged.max_abs_diff(&m) < 1e-12);

        let a = f.subset(["x1", "x3"]).unwrap();
        let det = SourceModel::new(f.clone(), vec![Outcome::new(1.0, a.clone())]).unwrap();
        let m = mass_from_source(&det).unwrap();
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![(&a, 1.0)]);
    }

    #[test]
    fn simple_support_of_one_collapses() {
        let f = frame3();
        let s = SimpleSupport::new(f.subset(["x2"]).unwrap(), 1.0)
            .to_source(&f)
            .unwrap();
        assert_eq!(s.outcomes().len(), 1);
        assert!(SimpleSupport::new(f.subset(["x2"]).unwrap(), 0.0).to_source(&f).is_err());
    }

    #[test]
    fn simple_support_view() {
        let f = frame3();
        let x1 = f.subset(["x1"]).unwrap();
        let s = SourceModel::new(
            f.clone(),
            vec![Outcome::new(0.4, f.full()), Outcome::new(0.6, x1.clone())],
        )
        .unwrap();
        let view = s.as_simple_support().unwrap();
        assert_eq!(view.focus, x1);
        assert!((view.weight - 0.6).abs() < 1e-15);
        let vac = SourceModel::new(f.clone(), vec![Outcome::new(1.0, f.full())]).unwrap();
        assert_eq!(vac.as_simple_support().unwrap().focus, f.full());
        let two = SourceModel::new(
            f.clone(),
            vec![
                Outcome::new(0.5, x1),
                Outcome::new(0.5, f.subset(["x2"]).unwrap()),
            ],
        )
        .unwrap();
        assert!(two.as_simple_support().is_none());
    }

    #[test]
    fn validation_reports() {
        let f = frame3();
        let good = EvidenceProblem::from_simple_supports(
            f.clone(),
            &[
                SimpleSupport::new(f.subset(["x1"]).unwrap(), 0.6),
                SimpleSupport::new(f.subset(["x2"]).unwrap(), 0.5),
            ],
        )
        .unwrap();
        assert!(validate_problem(&good).is_empty());

        let over = SourceModel::unchecked(
            f.clone(),
            vec![
                Outcome::new(0.6, f.subset(["x1"]).unwrap()),
                Outcome::new(0.5, f.full()),
            ],
        );
        let empty_target = SourceModel::unchecked(
            f.clone(),
            vec![Outcome::new(0.5, f.empty_set()), Outcome::new(0.5, f.full())],
        );
        let bad = EvidenceProblem::unchecked(f.clone(), vec![over, empty_target]);
        let report = validate_problem(&bad);
        let lines: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        assert_eq!(
            lines,
            vec![
                "source 0: probabilities sum to 1.1".to_string(),
                "source 1 outcome 0: empty target".to_string(),
            ]
        );
        assert!(matches!(bad.check(), Err(EvidenceError::InvalidProblem(_))));

        let none = EvidenceProblem::unchecked(f.clone(), vec![]);
        assert_eq!(validate_problem(&none).violations.len(), 1);

        let other = Frame::new(["a", "b", "c"]).unwrap();
        let foreign = SourceModel::unchecked(other.clone(), vec![Outcome::new(1.0, other.full())]);
        let mixed = EvidenceProblem::unchecked(f, vec![foreign]);
        assert_eq!(
            validate_problem(&mixed).violations[0].to_string(),
            "source 0: frame differs from the problem frame"
        );
    }

    #[test]
    fn mass_function_rejects_bad_input() {
        let f = frame3();
        assert!(MassFunction::new(f.clone(), [(f.empty_set(), 1.0)]).is_err());
        assert!(MassFunction::new(f.clone(), [(f.full(), 0.5)]).is_err());
        assert!(MassFunction::new(f.clone(), [(f.full(), 1.2), (f.subset(["x1"]).unwrap(), -0.2)]).is_err());
        let m = MassFunction::new(f.clone(), [(f.full(), 1.0 + 5e-10)]).unwrap();
        assert_eq!(m.mass(&f.full()), 1.0);
    }

    #[test]
    fn moebius_examples() {
        let f = frame3();
        let x1 = f.subset(["x1"]).unwrap();
        let m = MassFunction::new(f.clone(), [(x1, 0.75), (f.full(), 0.25)]).unwrap();
        let back = mass_from_bel(&f, &bel_table(&m).unwrap()).unwrap();
        assert!(back.max_abs_diff(&m) < 1e-9);

        let mut vacuous = vec![0.0; 8];
        vacuous[7] = 1.0;
        assert_eq!(mass_from_bel(&f, &vacuous).unwrap(), MassFunction::vacuous(f.clone()));

        let bayes = MassFunction::new(
            f.clone(),
            (0..3).map(|j| (FocalSet::from_indices(3, [j]).unwrap(), [0.2, 0.3, 0.5][j])),
        )
        .unwrap();
        let back = mass_from_bel(&f, &bel_table(&bayes).unwrap()).unwrap();
        assert!(back.max_abs_diff(&bayes) < 1e-9);
        assert!(back.iter().all(|(s, _)| s.len() == 1));
    }

    #[test]
    fn moebius_errors() {
        let big = Frame::numbered(25).unwrap();
        assert!(matches!(
            mass_from_bel(&big, &[]),
            Err(EvidenceError::FrameTooLarge { n: 25, .. })
        ));
        let f = frame3();
        // Bel({x1}) > Bel({x1,x2}) cannot come from a mass function.
        let mut table = vec![0.0; 8];
        table[0b001] = 0.5;
        table[0b011] = 0.2;
        table[0b111] = 1.0;
        table[0b101] = 0.5;
        assert!(matches!(
            mass_from_bel(&f, &table),
            Err(EvidenceError::NotABeliefFunction { .. })
        ));
        assert!(mass_from_bel(&f, &[0.0; 4]).is_err());
    }
}
