use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{ExperimentConfig, OutputFormat};
use super::experiment::run_experiment;
use super::output::write_experiment;
use super::sweep::{sweep_epsilon, write_sweep};
use crate::diagnostics::{certify, DiagnosticsConfig};
use crate::envelope;
use crate::error::{Error, Result};
use crate::problems::{self, ParamValue, Params, CATALOG};
use crate::rng::RandomSource;

#[derive(Debug, Parser)]
#[command(name = "hcopt", version, about = "Stochastic methods for hidden-convex problems")]
struct Cli {
    /// Output directory (overrides the config file).
    #[arg(long, global = true, env = "HCOPT_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Output format (overrides the config file).
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunFlags {
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds (replaces any explicit seed list).
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    skip_diagnostics: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List built-in problems and their parameters.
    ListProblems,
    /// Certify the structural conditions of a problem instance.
    Diagnose {
        problem: String,
        /// Parameters as key=value (values in TOML syntax).
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Smaller sample sizes.
        #[arg(long)]
        quick: bool,
    },
    /// Run one experiment from a TOML config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run an epsilon sweep from a TOML config with a [sweep] section.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Check the inner prox solver on random points.
    ProxCheck {
        problem: String,
        params: Vec<String>,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = envelope::DEFAULT_INNER_TOL)]
        inner_tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DiagnosticsFailed(_) => 2,
        Error::ScheduleViolation(_) => 3,
        Error::ConvergenceFailure { .. } => 4,
        _ => 1,
    }
}

fn parse_params(items: &[String]) -> Result<Params> {
    let mut out = Params::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Configuration(format!("parameter '{item}' is not key=value")))?;
        let value = match toml::from_str::<toml::Table>(&format!("v = {v}")) {
            Ok(mut t) => t
                .remove("v")
                .and_then(|v| v.try_into::<ParamValue>().ok())
                .ok_or_else(|| Error::Configuration(format!("cannot read value of '{k}'")))?,
            Err(_) => ParamValue::Text(v.to_string()),
        };
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

fn load_config(path: &Path, flags: &RunFlags, cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(s) = flags.seed {
        cfg.run.base_seed = s;
    }
    if let Some(n) = flags.seeds {
        cfg.run.seeds = n;
        cfg.run.seed_list = None;
    }
    cfg.run.skip_diagnostics |= flags.skip_diagnostics;
    if let Some(d) = &cli.out_dir {
        cfg.output.dir = Some(d.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn list_problems() {
    for e in CATALOG {
        println!("{}: {}", e.name, e.summary);
        for (k, doc) in e.schema {
            println!("    {k:<14} {doc}");
        }
    }
}

fn diagnose(name: &str, params: &[String], seed: u64, quick: bool, format: OutputFormat) -> Result<()> {
    let p = problems::build_problem(name, &parse_params(params)?)?;
    let cfg = if quick { DiagnosticsConfig::quick() } else { DiagnosticsConfig::default() };
    let report = certify(&p, &cfg, seed);
    match format {
        OutputFormat::Csv => print!("{}", report.render()),
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    if report.passed {
        Ok(())
    } else {
        Err(crate::diagnostics::report_error(&report))
    }
}

fn prox_check(name: &str, params: &[String], points: usize, inner_tol: f64, seed: u64) -> Result<()> {
    let p = problems::build_problem(name, &parse_params(params)?)?;
    let k = p.constants();
    let mut rhos = Vec::new();
    if k.ell > 0.0 {
        rhos.push(("2ell", 2.0 * k.ell));
    }
    if let Some(l) = k.l.filter(|l| *l > 0.0) {
        rhos.push(("4L", 4.0 * l));
    }
    if rhos.is_empty() {
        return Err(Error::Unsupported(format!("{name}: no admissible rho (ell = 0 and no L)")));
    }
    let mut rs = RandomSource::new(seed);
    let mut ok = true;
    for (label, rho) in rhos {
        let (mut worst_fp, mut worst_cert, mut worst_1d, mut iters) = (0.0f64, 0.0f64, None::<f64>, 0usize);
        for _ in 0..points {
            let x = p.set().sample_uniform(&mut rs);
            let r = envelope::prox(&p, &x, rho, inner_tol)?;
            worst_fp = worst_fp.max(r.fixed_point_residual);
            worst_cert = worst_cert.max(r.certified_distance);
            iters = iters.max(r.inner_iters);
            if p.dim() == 1 && p.is_smooth() {
                let y = envelope::prox_1d_bisection(&p, x[0], rho)?;
                worst_1d = Some(worst_1d.unwrap_or(0.0).max((y - r.x_hat[0]).abs()));
            }
        }
        let pass = worst_cert <= inner_tol && (!p.is_smooth() || worst_fp <= 10.0 * inner_tol) && worst_1d.is_none_or(|v| v <= 10.0 * inner_tol);
        ok &= pass;
        print!(
            "{} rho={label}={rho:.6e} points={points} max_fixed_point_residual={worst_fp:.3e} max_certified_distance={worst_cert:.3e} max_inner_iters={iters}",
            if pass { "pass" } else { "FAIL" }
        );
        if let Some(v) = worst_1d {
            print!(" max_1d_oracle_gap={v:.3e}");
        }
        println!();
    }
    if ok {
        Ok(())
    } else {
        Err(Error::DiagnosticsFailed(format!("{name}: prox check failed")))
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::ListProblems => {
            list_problems();
            Ok(())
        }
        Command::Diagnose { problem, params, seed, quick } => diagnose(problem, params, *seed, *quick, cli.format.unwrap_or_default()),
        Command::Run { config, flags } => {
            let cfg = load_config(config, flags, cli)?;
            let result = run_experiment(&cfg)?;
            for p in write_experiment(&result, &out_dir(&cfg), cfg.output.format)? {
                println!("wrote {}", p.display());
            }
            let s = &result.summary;
            println!("T = {}  eta = {:e}  beta = {}  batch = {}", s.schedule.iterations, s.schedule.eta, s.schedule.beta, s.schedule.batch);
            for (name, a) in &s.aggregates {
                println!("{name:<12} median {:e}  mean {:e}  se {:e}", a.median, a.mean, a.std_err);
            }
            Ok(())
        }
        Command::Sweep { config, flags } => {
            let cfg = load_config(config, flags, cli)?;
            let result = sweep_epsilon(&cfg)?;
            let path = write_sweep(&result, &out_dir(&cfg), cfg.output.format)?;
            println!("wrote {}", path.display());
            for r in &result.rows {
                println!(
                    "eps {:<8} T {:<12} median {} {:e} {}",
                    r.epsilon,
                    r.iterations,
                    r.metric,
                    r.median_metric,
                    if r.met { "met" } else { "NOT MET" }
                );
            }
            println!("slope {:.4}  intercept {:.4}  rms residual {:.3e}", result.fit.slope, result.fit.intercept, result.fit.rms_residual);
            Ok(())
        }
        Command::ProxCheck { problem, params, points, inner_tol, seed } => prox_check(problem, params, *points, *inner_tol, *seed),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse_as_toml_values() {
        let p = parse_params(&["delta=0.2".into(), "smooth=false".into(), "d=3".into(), "oracle=term_sampling".into(), "lower=[1, 2]".into()]).unwrap();
        assert_eq!(p["delta"], ParamValue::Num(0.2));
        assert_eq!(p["smooth"], ParamValue::Flag(false));
        assert_eq!(p["d"], ParamValue::Int(3));
        assert_eq!(p["oracle"], ParamValue::Text("term_sampling".into()));
        assert_eq!(p["lower"], ParamValue::List(vec![1.0, 2.0]));
        assert!(parse_params(&["novalue".into()]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::DiagnosticsFailed(String::new())), 2);
        assert_eq!(exit_code(&Error::ScheduleViolation(String::new())), 3);
        assert_eq!(exit_code(&Error::ConvergenceFailure { iterations: 1, best_residual: 1.0 }), 4);
        assert_eq!(exit_code(&Error::Configuration(String::new())), 1);
    }
}
