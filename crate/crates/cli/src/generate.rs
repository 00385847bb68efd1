//! Random simple-support problems for benchmarks.

use dsmc_core::{
    conflict_estimate, EvidenceProblem, FocalSet, Frame, McError, SimpleSupport, TrialEngineConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("invalid generator settings: {0}")]
    Invalid(String),
    #[error(transparent)]
    Mc(#[from] McError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub sources: usize,
    pub frame_size: usize,
    pub weight_range: (f64, f64),
    pub density: f64,
    /// Multiplies every drawn weight; conflict tuning lowers it below 1.
    pub weight_scale: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(sources: usize, frame_size: usize) -> Self {
        GeneratorConfig {
            sources,
            frame_size,
            weight_range: (0.1, 0.9),
            density: 0.5,
            weight_scale: 1.0,
            seed: 0,
        }
    }

    fn check(&self) -> Result<(), GenerateError> {
        let (lo, hi) = self.weight_range;
        if self.sources == 0 || self.frame_size == 0 {
            return Err(GenerateError::Invalid("m and n must be at least 1".into()));
        }
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(GenerateError::Invalid(format!(
                "weight range [{lo}, {hi}] must satisfy 0 < lo <= hi < 1"
            )));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(GenerateError::Invalid(format!("density {} outside (0, 1]", self.density)));
        }
        if !(self.weight_scale > 0.0 && self.weight_scale <= 1.0) {
            return Err(GenerateError::Invalid(format!("weight scale {} outside (0, 1]", self.weight_scale)));
        }
        Ok(())
    }
}

/// Builds `m` simple support functions over `x1..xn`.
///
/// Element j joins a focus when its uniform draw falls below the density.
/// The uniforms do not depend on the density, so raising it only ever adds
/// elements. A focus that would come out empty keeps the element whose draw
/// was smallest.
pub fn generate_problem(cfg: &GeneratorConfig) -> Result<EvidenceProblem, GenerateError> {
    cfg.check()?;
    let frame = Frame::numbered(cfg.frame_size).map_err(|e| GenerateError::Invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = cfg.weight_range;
    let supports: Vec<SimpleSupport> = (0..cfg.sources)
        .map(|_| {
            let weight = (lo + (hi - lo) * rng.gen::<f64>()) * cfg.weight_scale;
            let draws: Vec<f64> = (0..cfg.frame_size).map(|_| rng.gen()).collect();
            let mut focus = FocalSet::empty(cfg.frame_size);
            for (j, &u) in draws.iter().enumerate() {
                if u < cfg.density {
                    focus.insert(j);
                }
            }
            if focus.is_empty() {
                let smallest = (0..draws.len())
                    .min_by(|&a, &b| draws[a].total_cmp(&draws[b]))
                    .expect("frame is non-empty");
                focus.insert(smallest);
            }
            SimpleSupport::new(focus, weight)
        })
        .collect();
    EvidenceProblem::from_simple_supports(frame, &supports).map_err(|e| GenerateError::Invalid(e.to_string()))
}

pub const PROBE_TRIALS: u64 = 20_000;
pub const MAX_PROBES: usize = 20;

#[derive(Clone, Debug)]
pub struct Generated {
    pub problem: EvidenceProblem,
    pub density: f64,
    pub weight_scale: f64,
    /// κ̂ from a trial run; 1.0 when the run hit the restart cap.
    pub conflict_estimate: f64,
}

/// κ̂ over [`PROBE_TRIALS`] trials. Near-total conflict reads as 1.
pub fn measure_conflict(problem: &EvidenceProblem, seed: u64) -> Result<f64, GenerateError> {
    match conflict_estimate(problem, &TrialEngineConfig::with_trials(PROBE_TRIALS, seed)) {
        Ok(c) => Ok(c.conflict),
        Err(McError::ExcessiveConflict { .. }) => Ok(1.0),
        Err(e) => Err(e.into()),
    }
}

pub fn generate_measured(cfg: &GeneratorConfig) -> Result<Generated, GenerateError> {
    let problem = generate_problem(cfg)?;
    let conflict_estimate = measure_conflict(&problem, cfg.seed)?;
    Ok(Generated {
        problem,
        density: cfg.density,
        weight_scale: cfg.weight_scale,
        conflict_estimate,
    })
}

const DENSITY_PROBES: usize = 12;
const CLOSE_ENOUGH: f64 = 0.005;

/// Tunes the generator so that κ̂ lands near `target`, in at most
/// [`MAX_PROBES`] probes, and returns the closest probe.
///
/// Conflict falls as the density rises, but in steps, since each focus
/// gains whole elements. Bisection on the density (ignoring `cfg.density`)
/// brackets the target; the remaining probes then bisect a common scale on
/// the weights at the end of the bracket above the target, where conflict
/// rises continuously with the scale.
pub fn tune_to_conflict(cfg: &GeneratorConfig, target: f64) -> Result<Generated, GenerateError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(GenerateError::Invalid(format!("target conflict {target} outside (0, 1)")));
    }
    let mut best: Option<Generated> = None;
    let probe = |density: f64, weight_scale: f64, best: &mut Option<Generated>| {
        let g = generate_measured(&GeneratorConfig {
            density,
            weight_scale,
            ..cfg.clone()
        })?;
        let above = g.conflict_estimate > target;
        let gap = (g.conflict_estimate - target).abs();
        if best.as_ref().is_none_or(|b| gap < (b.conflict_estimate - target).abs()) {
            *best = Some(g);
        }
        Ok::<_, GenerateError>((above, gap < CLOSE_ENOUGH))
    };

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut conflicted: Option<f64> = None;
    for k in 0..DENSITY_PROBES {
        let density = if k == 0 { 1.0 } else { 0.5 * (lo + hi) };
        let (above, close) = probe(density, 1.0, &mut best)?;
        if close {
            return Ok(best.expect("probed"));
        }
        if above {
            lo = density;
            conflicted = Some(density);
        } else {
            hi = density;
        }
    }
    if let Some(density) = conflicted {
        let (mut s_lo, mut s_hi) = (0.0f64, 1.0f64);
        for _ in DENSITY_PROBES..MAX_PROBES {
            let scale = 0.5 * (s_lo + s_hi);
            let (above, close) = probe(density, scale, &mut best)?;
            if close {
                break;
            }
            if above {
                s_hi = scale;
            } else {
                s_lo = scale;
            }
        }
    }
    Ok(best.expect("at least one probe"))
}
