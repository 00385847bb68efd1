//! Acceptance checks. Each prints one PASS or FAIL line; the run fails if
//! any check does. Names given on the command line select checks by
//! substring.

use std::time::{Duration, Instant};

use dsmc_cli::bench::{run_bench, BenchConfig, BenchRow, BenchSummary, EXPONENT_RANGE};
use dsmc_cli::generate::{generate_problem, tune_to_conflict, GeneratorConfig};
use dsmc_core::logic::{
    clause_models, logic_estimate, translate_to_set_problem, ClauseQuery, Literal, LogicProblem, LogicSource, TermSet,
};
use dsmc_core::random::{random_logic_problem, random_problem, random_source, ProblemShape};
use dsmc_core::{
    bel_from_mass, combine_all_with, combine_pair, conflict_estimate, estimate, exact_belief_enumeration,
    mass_from_source, plan_trials, sd_bound, worker_rng, CombineError, EvidenceProblem, ExactLimits, FocalSet, Frame,
    MassFunction, SimpleSupport, TrialEngine, TrialEngineConfig,
};
use dsmc_suite::{run_checks, Check, Verdict};
use rand::Rng;

const SMALL: ProblemShape = ProblemShape {
    max_sources: 6,
    max_outcomes: 4,
    max_frame: 8,
    max_conflict: 0.9,
};

fn random_query<R: Rng>(rng: &mut R, n: usize) -> FocalSet {
    FocalSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.6))).unwrap()
}

// {x1}@0.6 and {x2}@0.5 over {x1, x2}. Only ε = ({x1}, {x2}) is empty, so
// κ = 0.6·0.5 = 0.3, and only ({x1}, Θ) lands inside {x1}, so
// Bel({x1}) = 0.6·0.5 / 0.7 = 3/7.
fn two_sources() -> (EvidenceProblem, FocalSet) {
    let f = Frame::new(["x1", "x2"]).unwrap();
    let p = EvidenceProblem::from_simple_supports(
        f.clone(),
        &[
            SimpleSupport::new(f.subset(["x1"]).unwrap(), 0.6),
            SimpleSupport::new(f.subset(["x2"]).unwrap(), 0.5),
        ],
    )
    .unwrap();
    (p, f.subset(["x1"]).unwrap())
}
const TWO_SOURCE_CONFLICT: f64 = 0.3;
const TWO_SOURCE_BELIEF: f64 = 3.0 / 7.0;

fn oracle_agreement() -> Verdict {
    let mut rng = worker_rng(2001, 0);
    let cases = 200;
    let mut inside = 0;
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let p = random_problem(&mut rng, SMALL);
        let b = random_query(&mut rng, p.frame().len());
        let (exact, _) = exact_belief_enumeration(&p, &b).unwrap();
        let e = &estimate(&p, &[b], &TrialEngineConfig::with_trials(10_000, case)).unwrap()[0];
        let err = (e.value - exact).abs();
        worst = worst.max(err);
        inside += usize::from(err <= 3.0 * e.sd_bound);
    }
    Verdict::new(
        inside * 100 >= 99 * cases as usize,
        format!("{inside}/{cases} estimates within 3*sd_bound = {:.4}; worst error {worst:.4}", 3.0 * sd_bound(10_000)),
    )
}

fn accuracy_rule() -> Verdict {
    let planned = plan_trials(0.05).unwrap();
    let (p, b) = two_sources();
    let runs = 500;
    let good = (0..runs)
        .filter(|&seed| {
            let e = &estimate(&p, std::slice::from_ref(&b), &TrialEngineConfig::with_trials(planned, seed)).unwrap()[0];
            (e.value - TWO_SOURCE_BELIEF).abs() <= 0.05
        })
        .count();
    Verdict::new(
        planned == 900 && good * 100 >= 99 * runs as usize,
        format!("planned N={planned} for accuracy 0.05; {good}/{runs} runs within 0.05 of 3/7"),
    )
}

fn variance_bound() -> Verdict {
    let (p, b) = two_sources();
    let n = 1000;
    let values: Vec<f64> = (0..100)
        .map(|seed| estimate(&p, std::slice::from_ref(&b), &TrialEngineConfig::with_trials(n, seed)).unwrap()[0].value)
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    let limit = 1.2 / (4.0 * n as f64);
    let sd = sd_bound(n);
    Verdict::new(
        var <= limit && (sd - 0.0158).abs() < 5e-5,
        format!("sample variance {var:.3e} <= {limit:.3e}; sd_bound(1000) = {sd:.4}"),
    )
}

fn restart_law() -> Verdict {
    let cfg = GeneratorConfig {
        seed: 40,
        ..GeneratorConfig::new(40, 40)
    };
    let g = tune_to_conflict(&cfg, 0.5).unwrap();
    let mut b = g.problem.frame().full();
    b.remove(39);
    let e = &estimate(&g.problem, &[b], &TrialEngineConfig::with_trials(100_000, 1)).unwrap()[0];
    let draws = e.draws_per_trial();
    Verdict::new(
        (1.9..=2.1).contains(&draws),
        format!(
            "m=n=40 tuned to kappa_hat {:.4} (density {:.4}, weight scale {:.4}); {draws:.4} draws per trial over 1e5 trials",
            g.conflict_estimate, g.density, g.weight_scale
        ),
    )
}

fn dempster_algebra() -> Verdict {
    let mut rng = worker_rng(77, 0);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    let mut mismatched_definedness = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=8);
        let frame = Frame::numbered(n).unwrap();
        let ms: Vec<MassFunction> = (0..3)
            .map(|_| mass_from_source(&random_source(&mut rng, &frame, 4)).unwrap())
            .collect();
        match (combine_pair(&ms[0], &ms[1]), combine_pair(&ms[1], &ms[0])) {
            (Ok(ab), Ok(ba)) => {
                worst = worst.max(ab.combined.max_abs_diff(&ba.combined)).max((ab.conflict - ba.conflict).abs());
                let left = combine_pair(&ab.combined, &ms[2]);
                let right = combine_pair(&ms[1], &ms[2]).and_then(|bc| combine_pair(&ms[0], &bc.combined));
                match (left, right) {
                    (Ok(l), Ok(r)) => {
                        worst = worst.max(l.combined.max_abs_diff(&r.combined));
                        compared += 1;
                    }
                    (Err(CombineError::TotalConflict), Err(CombineError::TotalConflict)) => {}
                    _ => mismatched_definedness += 1,
                }
            }
            (Err(CombineError::TotalConflict), Err(CombineError::TotalConflict)) => {}
            _ => mismatched_definedness += 1,
        }
        for m in &ms {
            let v = combine_pair(m, &MassFunction::vacuous(frame.clone())).unwrap();
            worst = worst.max(v.combined.max_abs_diff(m)).max(v.conflict);
        }
    }

    let (p, b) = two_sources();
    let m1 = mass_from_source(&p.sources()[0]).unwrap();
    let m2 = mass_from_source(&p.sources()[1]).unwrap();
    let r = combine_pair(&m1, &m2).unwrap();
    let bel = bel_from_mass(&r.combined, &b).unwrap();
    let hand = (r.conflict - TWO_SOURCE_CONFLICT).abs().max((bel - TWO_SOURCE_BELIEF).abs());

    Verdict::new(
        worst <= 1e-9 && mismatched_definedness == 0 && hand <= 1e-9,
        format!(
            "100 triples ({compared} fully defined), largest deviation {worst:.1e}; \
             worked example kappa {:.7} Bel({{x1}}) {bel:.7}",
            r.conflict
        ),
    )
}

fn fast_path_equivalence() -> Verdict {
    let mut rng = worker_rng(31, 0);
    let mut trials = 0u64;
    let mut differing = 0u64;
    for case in 0..20u64 {
        let cfg = GeneratorConfig {
            density: rng.gen_range(0.2..1.0),
            seed: case,
            ..GeneratorConfig::new(rng.gen_range(1..=15), rng.gen_range(2..=70))
        };
        let p = generate_problem(&cfg).unwrap();
        let engine = TrialEngine::new(&p).unwrap();
        let b = random_query(&mut rng, p.frame().len());
        let mut slow = worker_rng(case, 0);
        let mut fast = worker_rng(case, 0);
        for _ in 0..10_000 {
            let a = engine.run_trial(&b, &mut slow, 1_000_000);
            let z = engine.ssf_fast_trial(&b, &mut fast, 1_000_000);
            trials += 1;
            differing += u64::from(a != z);
        }
        let mut run = TrialEngineConfig::with_trials(10_000, case);
        let scanned = estimate(&p, std::slice::from_ref(&b), &run).unwrap();
        run.simple_support_fast_path = true;
        differing += u64::from(estimate(&p, std::slice::from_ref(&b), &run).unwrap() != scanned);
    }
    Verdict::new(
        differing == 0,
        format!("{trials} paired trials on 20 problems; {differing} differ in success or restarts"),
    )
}

// p@0.7 / []@0.3 with [!p]@0.5 / []@0.5: only (p, !p) contradicts, so
// κ = 0.35, and p is entailed exactly when the first source says p and the
// second stays silent: Bel(p) = 0.7·0.5 / 0.65 = 7/13.
fn worked_logic_example() -> (LogicProblem, ClauseQuery) {
    let p = LogicProblem::new(
        vec!["p".into()],
        vec![
            LogicSource {
                outcomes: vec![(0.7, TermSet::new([Literal::pos(0)])), (0.3, TermSet::default())],
            },
            LogicSource {
                outcomes: vec![(0.5, TermSet::new([Literal::neg(0)])), (0.5, TermSet::default())],
            },
        ],
    )
    .unwrap();
    (p, ClauseQuery::new([Literal::pos(0)]).unwrap())
}

fn logic_bridge() -> Verdict {
    let mut rng = worker_rng(505, 0);
    let cases = 50;
    let mut inside = 0;
    let mut budget_violations = 0;
    for case in 0..cases {
        let atoms = rng.gen_range(1..=6);
        let p = random_logic_problem(&mut rng, atoms, 5, 3);
        let c = ClauseQuery::new((0..rng.gen_range(1..=3)).map(|_| Literal {
            atom: rng.gen_range(0..atoms),
            positive: rng.gen_bool(0.5),
        }))
        .unwrap();
        let set = translate_to_set_problem(&p).unwrap();
        let (exact, _) = exact_belief_enumeration(&set, &clause_models(set.frame(), &c)).unwrap();
        let cfg = TrialEngineConfig::with_trials(10_000, case);
        let full = logic_estimate(&p, &c, &cfg, None).unwrap();
        inside += usize::from((full.lower - exact).abs() <= 3.0 * full.sd_bound);
        for budget in [1, 2, 3, 5, 8] {
            let cut = logic_estimate(&p, &c, &cfg, Some(budget)).unwrap();
            budget_violations += usize::from(cut.lower > full.lower + 3.0 * full.sd_bound);
        }
    }
    let (p, c) = worked_logic_example();
    let example = logic_estimate(&p, &c, &TrialEngineConfig::with_trials(100_000, 0), None).unwrap();
    let hand = 0.7 * 0.5 / 0.65;
    Verdict::new(
        inside == cases as usize && budget_violations == 0 && (example.lower - hand).abs() <= 0.01,
        format!(
            "{inside}/{cases} within 3*sd_bound of the translated exact value; \
             {budget_violations} budgeted runs above the bound; Bel(p) = {:.6} vs {hand:.6}",
            example.lower
        ),
    )
}

fn monotone_in_m(rows: &[BenchRow]) -> bool {
    rows.iter().all(|a| {
        rows.iter().all(|b| match (&a.mc, &b.mc) {
            (Ok(x), Ok(y)) if a.n == b.n && a.m < b.m => y.ms >= 0.8 * x.ms,
            _ => true,
        })
    })
}

fn scaling_mc() -> Verdict {
    let mut exponents = Vec::new();
    let mut monotone = 0;
    for seed in 0..3 {
        let cfg = BenchConfig {
            ms: vec![10, 20, 40],
            ns: vec![10, 20, 40],
            trials: 1000,
            seed,
            target_conflict: Some(0.5),
            skip_exact: true,
            ..BenchConfig::default()
        };
        let rows = run_bench(&cfg, |_| {}).unwrap();
        exponents.push(BenchSummary::from_rows(&rows).mc_exponent.unwrap_or(f64::NAN));
        monotone += usize::from(monotone_in_m(&rows));
    }
    let mut sorted = exponents.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[1];
    let (lo, hi) = EXPONENT_RANGE;
    let runs: Vec<String> = exponents.iter().map(|e| format!("{e:.3}")).collect();
    Verdict::new(
        (lo..=hi).contains(&median),
        format!(
            "median exponent {median:.3} over grid {{10,20,40}}^2 at N=1000 (runs: {}; expected {lo}..{hi}); \
             mc time nondecreasing in m within 20% in {monotone}/3 runs",
            runs.join(", ")
        ),
    )
}

fn scaling_exact_cap() -> Verdict {
    let limit = Duration::from_secs(60);
    let mut cells = Vec::new();
    let mut capped = false;
    for density in [0.7, 0.8, 0.9, 0.96] {
        let p = generate_problem(&GeneratorConfig {
            density,
            seed: 25,
            ..GeneratorConfig::new(25, 25)
        })
        .unwrap();
        let start = Instant::now();
        let limits = ExactLimits {
            max_focal_sets: 1 << 20,
            deadline: Some(start + limit),
            ..ExactLimits::default()
        };
        let cell = match combine_all_with(&p, &limits) {
            Ok(r) => format!(
                "density {density}: {} focal sets in {:.0} ms",
                r.combined.len(),
                start.elapsed().as_secs_f64() * 1e3
            ),
            Err(e) if e.is_resource_limit() => {
                capped = true;
                format!("density {density}: capped ({e})")
            }
            Err(e) => format!("density {density}: {e}"),
        };
        cells.push(cell);
    }
    Verdict::new(
        capped,
        format!("m=n=25 exact combination against a 60 s cap: {}", cells.join("; ")),
    )
}

fn determinism() -> Verdict {
    let mut rng = worker_rng(55, 0);
    let p = random_problem(&mut rng, SMALL);
    let n = p.frame().len();
    let batch = vec![random_query(&mut rng, n), p.frame().full(), random_query(&mut rng, n)];
    let ssf = generate_problem(&GeneratorConfig::new(12, 30)).unwrap();
    let ssf_query = random_query(&mut rng, 30);
    let logic = random_logic_problem(&mut rng, 5, 5, 3);
    let clause = ClauseQuery::new([Literal::pos(0), Literal::neg(1)]).unwrap();

    let mut unstable = Vec::new();
    for workers in [1, 4] {
        let cfg = TrialEngineConfig {
            worker_count: workers,
            ..TrialEngineConfig::with_trials(20_000, 9)
        };
        let fast = TrialEngineConfig {
            simple_support_fast_path: true,
            ..cfg.clone()
        };
        let runs: Vec<_> = (0..3)
            .map(|_| {
                let counts = |es: Vec<dsmc_core::Estimate>| es.iter().map(|e| (e.successes, e.restarts)).collect::<Vec<_>>();
                (
                    counts(estimate(&p, &batch, &cfg).unwrap()),
                    counts(estimate(&p, &batch[..1], &cfg).unwrap()),
                    counts(estimate(&ssf, std::slice::from_ref(&ssf_query), &fast).unwrap()),
                    conflict_estimate(&p, &cfg).unwrap(),
                    logic_estimate(&logic, &clause, &cfg, Some(3)).unwrap(),
                )
            })
            .collect();
        if runs.iter().any(|r| *r != runs[0]) {
            unstable.push(workers);
        }
    }
    Verdict::new(
        unstable.is_empty(),
        format!(
            "batch, single-query, fast-path, conflict and logic runs repeated 3 times at workers 1 and 4; unstable at {unstable:?}"
        ),
    )
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("oracle-agreement", oracle_agreement),
        ("accuracy-rule", accuracy_rule),
        ("variance-bound", variance_bound),
        ("restart-law", restart_law),
        ("dempster-algebra", dempster_algebra),
        ("fast-path-equivalence", fast_path_equivalence),
        ("logic-bridge", logic_bridge),
        ("scaling-mc-exponent", scaling_mc),
        ("scaling-exact-cap", scaling_exact_cap),
        ("determinism", determinism),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let (run, failed) = run_checks(&checks, &filters);
    println!("acceptance: {} of {run} checks passed", run - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
