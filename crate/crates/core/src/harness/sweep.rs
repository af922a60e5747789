use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, OutputFormat};
use super::experiment::{run_experiment_on, RunSummary};
use crate::error::{Error, Result};
use crate::problems;

/// Least-squares fit of `ln T = intercept + slope · ln(1/ε)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// `ln T − fitted`, one per pair.
    pub residuals: Vec<f64>,
    /// Root mean square of the residuals.
    pub rms_residual: f64,
}

pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 2 {
        return Err(Error::Configuration(format!("rate fit needs at least 2 (epsilon, T) pairs, got {}", pairs.len())));
    }
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    for &(eps, t) in pairs {
        if !(eps > 0.0 && eps.is_finite() && t > 0.0 && t.is_finite()) {
            return Err(Error::Configuration(format!("rate fit needs positive finite pairs, got ({eps}, {t})")));
        }
        xs.push((1.0 / eps).ln());
        ys.push(t.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-24 {
        return Err(Error::Configuration("degenerate epsilon grid: all values equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    let rms_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    Ok(RateFit { slope, intercept, residuals, rms_residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub iterations: u64,
    pub eta: f64,
    pub beta: f64,
    pub batch: usize,
    /// Oracle calls per seed.
    pub samples: u64,
    pub metric: String,
    pub median_metric: f64,
    pub met: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub run_id: String,
    pub rows: Vec<SweepRow>,
    pub fit: RateFit,
    #[serde(skip)]
    pub summaries: Vec<RunSummary>,
}

impl SweepResult {
    pub fn all_met(&self) -> bool {
        self.rows.iter().all(|r| r.met)
    }
}

/// Runs the experiment at every ε of the grid (diagnostics once, before the first point)
/// and fits the prescribed iteration counts.
pub fn sweep_epsilon(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let grid = cfg
        .sweep
        .as_ref()
        .map(|s| s.epsilons.clone())
        .ok_or_else(|| Error::Configuration("sweep needs a [sweep] section with epsilons".into()))?;
    if grid.len() < 3 {
        return Err(Error::Configuration(format!("sweep needs at least 3 grid points, got {}", grid.len())));
    }
    let mut sorted = grid.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Configuration("epsilon grid must hold distinct positive values".into()));
    }
    let problem = problems::build_problem(&cfg.problem.name, &cfg.problem.params)?;
    let base_id = cfg.run_id();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (i, &eps) in grid.iter().enumerate() {
        let mut c = cfg.clone();
        c.algorithm.epsilon = Some(eps);
        c.id = Some(format!("{base_id}_eps{eps}"));
        c.run.skip_diagnostics = cfg.run.skip_diagnostics || i > 0;
        let summary = run_experiment_on(&c, &problem)?.summary;
        let (metric, median) = summary.target_metric();
        rows.push(SweepRow {
            epsilon: eps,
            iterations: summary.schedule.iterations,
            eta: summary.schedule.eta,
            beta: summary.schedule.beta,
            batch: summary.schedule.batch,
            samples: summary.per_seed.first().map(|s| s.samples).unwrap_or(0),
            metric: metric.to_string(),
            median_metric: median,
            met: median <= eps,
        });
        summaries.push(summary);
    }
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.epsilon, r.iterations.max(1) as f64)).collect();
    let fit = fit_rate(&pairs)?;
    Ok(SweepResult { run_id: base_id, rows, fit, summaries })
}

/// Writes `{id}_sweep.csv` (or `.json`) with the grid table and the fit.
pub fn write_sweep(result: &SweepResult, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let id = &result.run_id;
    match format {
        OutputFormat::Csv => {
            let p = dir.join(format!("{id}_sweep.csv"));
            let mut w = csv::Writer::from_path(&p)?;
            w.write_record(["epsilon", "iterations", "eta", "beta", "batch", "samples", "metric", "median_metric", "met", "fit_residual"])?;
            for (r, res) in result.rows.iter().zip(&result.fit.residuals) {
                w.write_record([
                    r.epsilon.to_string(),
                    r.iterations.to_string(),
                    r.eta.to_string(),
                    r.beta.to_string(),
                    r.batch.to_string(),
                    r.samples.to_string(),
                    r.metric.clone(),
                    r.median_metric.to_string(),
                    r.met.to_string(),
                    res.to_string(),
                ])?;
            }
            w.flush()?;
            let fp = dir.join(format!("{id}_sweep_fit.json"));
            std::fs::write(&fp, serde_json::to_string_pretty(&result.fit)? + "\n")?;
            Ok(p)
        }
        OutputFormat::Json => {
            let p = dir.join(format!("{id}_sweep.json"));
            std::fs::write(&p, serde_json::to_string_pretty(result)? + "\n")?;
            Ok(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_law_slope_three() {
        let f = fit_rate(&[(1.0, 1.0), (0.5, 8.0), (0.25, 64.0)]).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!(f.rms_residual < 1e-12);
    }

    #[test]
    fn linear_law_slope_one() {
        let f = fit_rate(&[(1.0, 2.0), (0.5, 4.0), (0.25, 8.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!((f.intercept - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_law_slope_zero() {
        let f = fit_rate(&[(0.2, 50.0), (0.1, 50.0), (0.05, 50.0)]).unwrap();
        assert!(f.slope.abs() < 1e-12);
    }

    #[test]
    fn synthetic_power_law() {
        let pairs: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025].iter().map(|&e: &f64| (e, 7.5 / e.powi(3))).collect();
        assert!((fit_rate(&pairs).unwrap().slope - 3.0).abs() < 1e-9);
    }

    #[test]
    fn underdetermined_and_degenerate_rejected() {
        assert!(matches!(fit_rate(&[(1.0, 1.0)]), Err(Error::Configuration(_))));
        assert!(matches!(fit_rate(&[(0.1, 1.0), (0.1, 2.0)]), Err(Error::Configuration(_))));
    }
}
