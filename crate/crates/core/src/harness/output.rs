use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::OutputFormat;
use super::experiment::{ExperimentResult, SeedRun};
use crate::error::Result;
use crate::model::IterationRecord;

/// Column set of every trajectory file.
pub const CSV_HEADER: [&str; 8] = ["run_id", "seed", "t", "samples", "f_gap", "dist_sq", "lyapunov", "grad_err_sq"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn record_row(run_id: &str, seed: &str, f_star: f64, r: &IterationRecord) -> [String; 8] {
    [
        run_id.to_string(),
        seed.to_string(),
        r.t.to_string(),
        r.wall_samples.to_string(),
        (r.f_value - f_star).to_string(),
        r.dist_to_opt_sq.to_string(),
        opt(r.lyapunov),
        opt(r.grad_err_sq),
    ]
}

fn write_seed_csv(path: &Path, run_id: &str, f_star: f64, run: &SeedRun) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    let seed = run.seed.to_string();
    for r in &run.outcome.records {
        w.write_record(record_row(run_id, &seed, f_star, r))?;
    }
    w.flush()?;
    Ok(())
}

fn mean(vals: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut n = 0usize;
    let mut s = 0.0;
    for v in vals {
        s += v?;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

/// Seed-mean trajectory (every seed shares the same checkpoints); the seed column reads `mean`.
fn write_aggregate_csv(path: &Path, result: &ExperimentResult) -> Result<()> {
    let run_id = &result.summary.run_id;
    let f_star = result.summary.f_star;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    let Some(first) = result.runs.first() else {
        w.flush()?;
        return Ok(());
    };
    for (i, r0) in first.outcome.records.iter().enumerate() {
        let at = |f: &dyn Fn(&IterationRecord) -> Option<f64>| mean(result.runs.iter().map(|run| run.outcome.records.get(i).and_then(f)));
        let rec = IterationRecord {
            t: r0.t,
            f_value: at(&|r| Some(r.f_value)).unwrap_or(f64::NAN),
            dist_to_opt_sq: at(&|r| Some(r.dist_to_opt_sq)).unwrap_or(f64::NAN),
            lyapunov: at(&|r| r.lyapunov),
            grad_err_sq: at(&|r| r.grad_err_sq),
            wall_samples: r0.wall_samples,
        };
        w.write_record(record_row(run_id, "mean", f_star, &rec))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Trajectory<'a> {
    seed: u64,
    x0: &'a [f64],
    final_point: &'a [f64],
    records: &'a [IterationRecord],
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Writes trajectories (CSV per seed plus the aggregate, or one JSON file) and the JSON
/// summary into `dir`. Returns the paths written.
pub fn write_experiment(result: &ExperimentResult, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let id = &result.summary.run_id;
    let mut written = Vec::new();
    match format {
        OutputFormat::Csv => {
            for run in &result.runs {
                let p = dir.join(format!("{id}_seed{}.csv", run.seed));
                write_seed_csv(&p, id, result.summary.f_star, run)?;
                written.push(p);
            }
            let p = dir.join(format!("{id}_aggregate.csv"));
            write_aggregate_csv(&p, result)?;
            written.push(p);
        }
        OutputFormat::Json => {
            let traj: Vec<Trajectory> = result
                .runs
                .iter()
                .map(|r| Trajectory { seed: r.seed, x0: &r.x0, final_point: &r.outcome.final_point, records: &r.outcome.records })
                .collect();
            let p = dir.join(format!("{id}_trajectories.json"));
            write_json(&p, &traj)?;
            written.push(p);
        }
    }
    let p = dir.join(format!("{id}_summary.json"));
    write_json(&p, &result.summary)?;
    written.push(p);
    if let Some(report) = &result.diagnostics {
        let p = dir.join(format!("{id}_diagnostics.json"));
        write_json(&p, report)?;
        written.push(p);
    }
    Ok(written)
}
