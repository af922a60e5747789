use serde::Serialize;

use super::schedule::{post_batch_size, Method, Schedule};
use crate::envelope;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ConstantBundle, HiddenConvexProblem, IterationRecord};
use crate::rng::RandomSource;

/// Iterations at which telemetry is recorded. The final iterate is always included.
#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoints {
    /// About `n` geometrically spaced iterations, including 0 and `T`.
    Geometric(usize),
    FinalOnly,
    Explicit(Vec<u64>),
}

impl Default for Checkpoints {
    fn default() -> Self {
        Checkpoints::Geometric(100)
    }
}

impl Checkpoints {
    /// Sorted, deduplicated checkpoint iterations within `0..=total`.
    pub fn resolve(&self, total: u64) -> Vec<u64> {
        let mut ts: Vec<u64> = match self {
            Checkpoints::FinalOnly => vec![total],
            Checkpoints::Explicit(v) => v.iter().copied().filter(|t| *t <= total).chain([total]).collect(),
            Checkpoints::Geometric(n) => {
                let n = (*n).max(2);
                let mut v = vec![0, total];
                if total > 0 {
                    let top = (total as f64).ln();
                    for k in 1..n - 1 {
                        let t = (top * k as f64 / (n - 2) as f64).exp().round() as u64;
                        v.push(t.min(total));
                    }
                }
                v
            }
        };
        ts.sort_unstable();
        ts.dedup();
        ts
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub checkpoints: Checkpoints,
    /// Inner tolerance for the envelope-based Lyapunov value; `None` skips the prox solves.
    pub lyapunov_tol: Option<f64>,
    /// Keep a copy of the iterate at every checkpoint.
    pub keep_iterates: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { checkpoints: Checkpoints::default(), lyapunov_tol: Some(envelope::DEFAULT_INNER_TOL), keep_iterates: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub final_point: Vec<f64>,
    /// Final momentum vector `g^T` for momentum runs.
    pub momentum: Option<Vec<f64>>,
    pub records: Vec<IterationRecord>,
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
    pub samples: u64,
}

/// Averages `batch` oracle draws at `x` into `out`.
#[inline]
fn draw(problem: &HiddenConvexProblem, x: &[f64], batch: usize, rs: &mut RandomSource, out: &mut [f64], tmp: &mut [f64]) {
    let model = problem.model();
    if batch == 1 {
        model.sample_gradient(x, rs, out);
        return;
    }
    out.fill(0.0);
    for _ in 0..batch {
        model.sample_gradient(x, rs, tmp);
        for (o, v) in out.iter_mut().zip(tmp.iter()) {
            *o += v;
        }
    }
    let inv = 1.0 / batch as f64;
    for o in out.iter_mut() {
        *o *= inv;
    }
}

struct Recorder<'a> {
    problem: &'a HiddenConvexProblem,
    schedule: &'a Schedule,
    opts: &'a RunOptions,
    plan: Vec<u64>,
    next: usize,
    records: Vec<IterationRecord>,
    iterates: Vec<Vec<f64>>,
    grad: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(problem: &'a HiddenConvexProblem, schedule: &'a Schedule, opts: &'a RunOptions) -> Self {
        let plan = opts.checkpoints.resolve(schedule.iterations);
        Recorder {
            problem,
            schedule,
            opts,
            records: Vec::with_capacity(plan.len()),
            plan,
            next: 0,
            iterates: Vec::new(),
            grad: vec![0.0; problem.dim()],
        }
    }

    #[inline]
    fn due(&self, t: u64) -> bool {
        self.next < self.plan.len() && self.plan[self.next] == t
    }

    fn record(&mut self, t: u64, x: &[f64], momentum: Option<&[f64]>, samples: u64) -> Result<()> {
        self.next += 1;
        let k = self.problem.constants();
        let model = self.problem.model();
        let f_value = model.objective(x);
        let (lyapunov, grad_err_sq) = match momentum {
            Some(g) => {
                model.gradient(x, &mut self.grad);
                let err = linalg::dist_sq(g, &self.grad);
                (Some(f_value - k.f_star + self.schedule.eta / self.schedule.beta * err), Some(err))
            }
            None => match self.opts.lyapunov_tol {
                Some(tol) => (Some(envelope::lyapunov_sm(self.problem, x, self.schedule.rho, tol)?), None),
                None => (None, None),
            },
        };
        self.records.push(IterationRecord {
            t,
            f_value,
            dist_to_opt_sq: linalg::dist_sq(x, &k.x_star),
            lyapunov,
            grad_err_sq,
            wall_samples: samples,
        });
        if self.opts.keep_iterates {
            self.iterates.push(x.to_vec());
        }
        Ok(())
    }
}

fn check_start(problem: &HiddenConvexProblem, schedule: &Schedule, x0: &[f64]) -> Result<()> {
    problem.set().check_membership(x0)?;
    if schedule.batch == 0 {
        return Err(Error::Configuration("batch size must be at least 1".into()));
    }
    Ok(())
}

/// Shared loop of the two methods without momentum.
fn run_plain(problem: &HiddenConvexProblem, schedule: &Schedule, x0: &[f64], rs: &mut RandomSource, opts: &RunOptions) -> Result<RunOutcome> {
    check_start(problem, schedule, x0)?;
    let d = problem.dim();
    let set = problem.set();
    let (eta, batch, total) = (schedule.eta, schedule.batch, schedule.iterations);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    let mut rec = Recorder::new(problem, schedule, opts);
    let mut t = 0u64;
    loop {
        if rec.due(t) {
            rec.record(t, &x, None, t * batch as u64)?;
        }
        if t == total {
            break;
        }
        draw(problem, &x, batch, rs, &mut g, &mut tmp);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= eta * gi;
        }
        set.project_in_place(&mut x);
        t += 1;
    }
    Ok(RunOutcome { final_point: x, momentum: None, records: rec.records, iterates: rec.iterates, samples: total * batch as u64 })
}

/// Stochastic subgradient method `x⁺ = Π_X(x − ηg)`.
pub fn run_sm(problem: &HiddenConvexProblem, schedule: &Schedule, x0: &[f64], rs: &mut RandomSource, opts: &RunOptions) -> Result<RunOutcome> {
    if schedule.method != Method::Sm {
        return Err(Error::Configuration(format!("run_sm needs an SM schedule, got {:?}", schedule.method)));
    }
    run_plain(problem, schedule, x0, rs, opts)
}

/// Projected SGD `x⁺ = Π_X(x − η∇f(x, ξ))`, averaging `batch` draws per step.
pub fn run_psgd(problem: &HiddenConvexProblem, schedule: &Schedule, x0: &[f64], rs: &mut RandomSource, opts: &RunOptions) -> Result<RunOutcome> {
    if !problem.is_smooth() {
        return Err(Error::Unsupported("projected SGD needs a smooth problem".into()));
    }
    if schedule.method != Method::Psgd {
        return Err(Error::Configuration(format!("run_psgd needs a P-SGD schedule, got {:?}", schedule.method)));
    }
    run_plain(problem, schedule, x0, rs, opts)
}

/// Projected SGD with momentum: `x⁺ = Π_X(x − ηg)`, `g⁺ = (1−β)g + β∇f(x⁺, ξ)`, with
/// `g⁰` a single draw at `x⁰`.
pub fn run_psgdm(problem: &HiddenConvexProblem, schedule: &Schedule, x0: &[f64], rs: &mut RandomSource, opts: &RunOptions) -> Result<RunOutcome> {
    if !problem.is_smooth() {
        return Err(Error::Unsupported("projected SGD with momentum needs a smooth problem".into()));
    }
    if schedule.method != Method::Psgdm {
        return Err(Error::Configuration(format!("run_psgdm needs a momentum schedule, got {:?}", schedule.method)));
    }
    let beta = schedule.beta;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    check_start(problem, schedule, x0)?;
    let d = problem.dim();
    let set = problem.set();
    let (eta, batch, total) = (schedule.eta, schedule.batch, schedule.iterations);
    let keep = 1.0 - beta;
    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    draw(problem, &x, batch, rs, &mut g, &mut tmp);
    let mut rec = Recorder::new(problem, schedule, opts);
    let mut t = 0u64;
    loop {
        if rec.due(t) {
            rec.record(t, &x, Some(&g), (t + 1) * batch as u64)?;
        }
        if t == total {
            break;
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= eta * gi;
        }
        set.project_in_place(&mut x);
        draw(problem, &x, batch, rs, &mut v, &mut tmp);
        for (gi, vi) in g.iter_mut().zip(&v) {
            *gi = keep * *gi + beta * vi;
        }
        t += 1;
    }
    Ok(RunOutcome {
        final_point: x,
        momentum: Some(g),
        records: rec.records,
        iterates: rec.iterates,
        samples: (total + 1) * batch as u64,
    })
}

/// Dispatches on the schedule's method.
pub fn run(problem: &HiddenConvexProblem, schedule: &Schedule, x0: &[f64], rs: &mut RandomSource, opts: &RunOptions) -> Result<RunOutcome> {
    match schedule.method {
        Method::Sm => run_sm(problem, schedule, x0, rs, opts),
        Method::Psgd => run_psgd(problem, schedule, x0, rs, opts),
        Method::Psgdm => run_psgdm(problem, schedule, x0, rs, opts),
    }
}

/// One projected step of length `1/(3L)` along the average of `B₀` draws at `x_T`.
/// Returns the new point and `B₀`.
pub fn postprocess_minibatch(
    problem: &HiddenConvexProblem,
    x_t: &[f64],
    constants: &ConstantBundle,
    epsilon: f64,
    rs: &mut RandomSource,
) -> Result<(Vec<f64>, usize)> {
    let b0 = post_batch_size(constants, epsilon)?;
    Ok((postprocess_with_batch(problem, x_t, constants, b0, rs)?, b0))
}

/// Post-processing step with an explicit batch size.
pub fn postprocess_with_batch(
    problem: &HiddenConvexProblem,
    x_t: &[f64],
    constants: &ConstantBundle,
    batch: usize,
    rs: &mut RandomSource,
) -> Result<Vec<f64>> {
    if !problem.is_smooth() {
        return Err(Error::Unsupported("post-processing needs a smooth problem".into()));
    }
    if batch == 0 {
        return Err(Error::Configuration("post-processing batch must be positive".into()));
    }
    problem.set().check_membership(x_t)?;
    let l = constants.require_l()?;
    let d = problem.dim();
    let mut g = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    draw(problem, x_t, batch, rs, &mut g, &mut tmp);
    let step = 1.0 / (3.0 * l);
    let mut x: Vec<f64> = x_t.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
    problem.set().project_in_place(&mut x);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_checkpoints_cover_ends() {
        let ts = Checkpoints::Geometric(100).resolve(1_000_000);
        assert_eq!(ts[0], 0);
        assert_eq!(*ts.last().unwrap(), 1_000_000);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert!(ts.len() <= 100 && ts.len() > 80);
        assert_eq!(Checkpoints::Geometric(100).resolve(0), vec![0]);
        assert_eq!(Checkpoints::FinalOnly.resolve(7), vec![7]);
        assert_eq!(Checkpoints::Explicit(vec![5, 1, 9, 20]).resolve(9), vec![1, 5, 9]);
    }
}
