use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, StartPolicy};
use crate::algorithms::{self, make_schedule_from_gap, Checkpoints, Method, RunOptions, RunOutcome, Schedule, TheoremTag};
use crate::diagnostics::{self, DiagnosticsConfig, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::model::HiddenConvexProblem;
use crate::problems;
use crate::rng::RandomSource;

/// Offset separating the start-point streams from the algorithm streams.
const START_STREAM_OFFSET: u64 = 1 << 40;

#[derive(Debug, Clone, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub f_gap: f64,
    pub dist_sq: f64,
    /// Envelope-based `Λ_T` (methods without momentum).
    pub lyapunov: Option<f64>,
    /// `Λ_T^HB` (momentum).
    pub lyapunov_hb: Option<f64>,
    pub grad_err_sq: Option<f64>,
    pub samples: u64,
    /// `F(x^{T+1}) − F*` after post-processing.
    pub post_f_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub std_err: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        let std_err = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Aggregate { count: n, mean, median, std_err })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsDigest {
    pub passed: bool,
    pub failures: Vec<String>,
    pub checks: usize,
}

impl From<&DiagnosticsReport> for DiagnosticsDigest {
    fn from(r: &DiagnosticsReport) -> Self {
        DiagnosticsDigest {
            passed: r.passed,
            failures: r.failures().iter().map(|e| e.name.clone()).collect(),
            checks: r.entries.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub problem: String,
    pub schedule: Schedule,
    /// Initial Lyapunov bound that entered the iteration count.
    pub lyapunov0_bound: f64,
    pub f_star: f64,
    pub per_seed: Vec<SeedSummary>,
    pub aggregates: BTreeMap<String, Aggregate>,
    pub diagnostics: Option<DiagnosticsDigest>,
}

impl RunSummary {
    /// Median of the metric certified by the schedule: `Λ_T` without momentum (when
    /// computed), otherwise `F(x^T) − F*`.
    pub fn target_metric(&self) -> (&'static str, f64) {
        let key = if self.schedule.method != Method::Psgdm && self.aggregates.contains_key("lyapunov") {
            "lyapunov"
        } else {
            "f_gap"
        };
        (key, self.aggregates[key].median)
    }
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub x0: Vec<f64>,
    pub outcome: RunOutcome,
    pub post_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub summary: RunSummary,
    pub runs: Vec<SeedRun>,
    pub diagnostics: Option<DiagnosticsReport>,
}

fn start_points(cfg: &ExperimentConfig, problem: &HiddenConvexProblem, seeds: &[u64]) -> Result<Vec<Vec<f64>>> {
    seeds
        .iter()
        .map(|&s| {
            let x0 = match &cfg.run.x0 {
                StartPolicy::Fixed(v) => v.clone(),
                StartPolicy::Named(n) if n == "uniform" => {
                    let mut rs = RandomSource::for_run(cfg.run.base_seed, START_STREAM_OFFSET + s);
                    problem.set().sample_uniform(&mut rs)
                }
                StartPolicy::Named(_) => problem.default_start().to_vec(),
            };
            problem
                .set()
                .check_membership(&x0)
                .map_err(|e| Error::Configuration(format!("run.x0 is infeasible: {e}")))?;
            Ok(x0)
        })
        .collect()
}

/// Theorem schedule (or manual schedule) with config overrides applied, checked against
/// the hypotheses.
pub(crate) fn build_schedule(cfg: &ExperimentConfig, problem: &HiddenConvexProblem, gap: f64) -> Result<Schedule> {
    let a = &cfg.algorithm;
    let method = cfg.method()?;
    let k = problem.constants();
    let mut s = if a.theorem == TheoremTag::Manual {
        let rho = match method {
            Method::Sm => 2.0 * k.ell,
            _ => 4.0 * k.l.unwrap_or(0.0),
        };
        let mut s = Schedule::manual(method, a.eta.unwrap_or(0.0), a.beta.unwrap_or(1.0), rho, a.iterations.unwrap_or(0));
        s.epsilon = a.epsilon.unwrap_or(f64::NAN);
        s
    } else {
        let eps = a.epsilon.ok_or_else(|| Error::Configuration("algorithm.epsilon is required".into()))?;
        make_schedule_from_gap(a.theorem, k, eps, gap)?
    };
    if let Some(v) = a.eta {
        s.eta = v;
    }
    if let Some(v) = a.alpha {
        s.alpha = v;
    }
    if let Some(v) = a.beta {
        s.beta = v;
    }
    if let Some(v) = a.rho {
        s.rho = v;
    }
    if let Some(v) = a.iterations {
        s.iterations = v;
    }
    if let Some(v) = a.batch {
        s.batch = v;
    }
    if let Some(v) = a.post_batch {
        s.post_batch = Some(v);
    }
    s.check_hypotheses(k)?;
    Ok(s)
}

fn seed_summary(problem: &HiddenConvexProblem, method: Method, run: &SeedRun) -> Result<SeedSummary> {
    let f_star = problem.constants().f_star;
    let last = run
        .outcome
        .records
        .last()
        .ok_or_else(|| Error::InternalConsistency("run produced no records".into()))?;
    let post_f_gap = run.post_point.as_ref().map(|x| problem.model().objective(x) - f_star);
    Ok(SeedSummary {
        seed: run.seed,
        f_gap: last.f_value - f_star,
        dist_sq: last.dist_to_opt_sq,
        lyapunov: if method == Method::Psgdm { None } else { last.lyapunov },
        lyapunov_hb: if method == Method::Psgdm { last.lyapunov } else { None },
        grad_err_sq: last.grad_err_sq,
        samples: last.wall_samples,
        post_f_gap,
    })
}

fn aggregates(rows: &[SeedSummary]) -> BTreeMap<String, Aggregate> {
    let mut out = BTreeMap::new();
    let mut add = |name: &str, vals: Vec<f64>| {
        if vals.len() == rows.len() {
            if let Some(a) = Aggregate::of(&vals) {
                out.insert(name.to_string(), a);
            }
        }
    };
    add("f_gap", rows.iter().map(|r| r.f_gap).collect());
    add("dist_sq", rows.iter().map(|r| r.dist_sq).collect());
    add("lyapunov", rows.iter().filter_map(|r| r.lyapunov).collect());
    add("lyapunov_hb", rows.iter().filter_map(|r| r.lyapunov_hb).collect());
    add("grad_err_sq", rows.iter().filter_map(|r| r.grad_err_sq).collect());
    add("samples", rows.iter().map(|r| r.samples as f64).collect());
    add("post_f_gap", rows.iter().filter_map(|r| r.post_f_gap).collect());
    out
}

/// Runs one experiment: diagnostics gate, schedule, one run per seed (in parallel) and the
/// summary. Writes nothing; see [`super::write_experiment`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let problem = problems::build_problem(&cfg.problem.name, &cfg.problem.params)?;
    run_experiment_on(cfg, &problem)
}

pub(crate) fn run_experiment_on(cfg: &ExperimentConfig, problem: &HiddenConvexProblem) -> Result<ExperimentResult> {
    let diagnostics = if cfg.run.skip_diagnostics {
        None
    } else {
        let report = diagnostics::certify(problem, &DiagnosticsConfig::quick(), cfg.run.base_seed);
        if !report.passed {
            return Err(Error::DiagnosticsFailed(report.render()));
        }
        Some(report)
    };

    let seeds = cfg.run.seed_values();
    let starts = start_points(cfg, problem, &seeds)?;
    let f_star = problem.constants().f_star;
    let gap = starts
        .iter()
        .map(|x| problem.model().objective(x) - f_star)
        .fold(0.0f64, f64::max);
    let schedule = build_schedule(cfg, problem, gap)?;
    let lyapunov0_bound = if schedule.method == Method::Psgdm {
        gap + schedule.eta * problem.constants().sigma.powi(2) / schedule.beta
    } else {
        gap
    };
    let opts = RunOptions {
        checkpoints: Checkpoints::Geometric(cfg.run.checkpoints),
        lyapunov_tol: cfg.run.lyapunov.then_some(cfg.run.inner_tol),
        keep_iterates: false,
    };
    let postprocess = cfg.algorithm.postprocess;
    let eps = schedule.epsilon;

    let runs: Vec<Result<SeedRun>> = seeds
        .par_iter()
        .zip(starts.par_iter())
        .map(|(&seed, x0)| {
            let mut rs = RandomSource::for_run(cfg.run.base_seed, seed);
            let outcome = algorithms::run(problem, &schedule, x0, &mut rs, &opts)?;
            let post_point = if postprocess {
                let k = problem.constants();
                let batch = match schedule.post_batch {
                    Some(b) => b,
                    None => algorithms::post_batch_size(k, eps)?,
                };
                Some(algorithms::postprocess_with_batch(problem, &outcome.final_point, k, batch, &mut rs)?)
            } else {
                None
            };
            Ok(SeedRun { seed, x0: x0.clone(), outcome, post_point })
        })
        .collect();
    let runs: Vec<SeedRun> = runs.into_iter().collect::<Result<_>>()?;

    let per_seed: Vec<SeedSummary> = runs
        .iter()
        .map(|r| seed_summary(problem, schedule.method, r))
        .collect::<Result<_>>()?;
    let summary = RunSummary {
        run_id: cfg.run_id(),
        problem: problem.name().to_string(),
        aggregates: aggregates(&per_seed),
        per_seed,
        lyapunov0_bound,
        f_star,
        schedule,
        diagnostics: diagnostics.as_ref().map(DiagnosticsDigest::from),
    };
    Ok(ExperimentResult { summary, runs, diagnostics })
}

