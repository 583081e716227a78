use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use magweyl::harness::{emit_report, persist_run, prediction, run_scenario, sweep_and_fit, Config, Model1dConfig, RunOptions, Scenario};
use magweyl::model1d::{log_signature, saddle_sweep, write_sweep_csv, SaddleModelParams};
use magweyl::oracle::{assemble_with, cache_key, eigenvalues, oracle_grid, read_laev, write_laev};
use magweyl::{Error, Result};

/// Magnetic Weyl asymptotics versus a discretized eigensolver.
///
/// Dense eigensolves are capped at N = 4500 unknowns (about 67² interior
/// nodes); a 64² solve takes under a minute on one core.
#[derive(Parser)]
#[command(name = "magweyl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Results directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Interior oracle nodes per axis, overriding `[grid].interior`.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Concurrent sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Seed for random scenario perturbations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Fill the seconds column of CSV output.
    #[arg(long, global = true)]
    with_timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Asymptotic prediction only.
    Predict,
    /// Oracle eigenvalues (cached under <out>/cache).
    Oracle,
    /// Oracle count against the prediction; persists the run.
    Run,
    /// Sweep from `[sweep]` with remainder fit.
    Sweep,
    /// Critical points of V/F.
    Critpoints,
    /// Saddle-model log-coefficient sweep from `[model1d]`.
    Model1d,
    /// summary.csv, plots and manifest from the results directory.
    Report,
}

fn config(cli: &Cli) -> Result<Config> {
    let path = cli.config.as_deref().ok_or_else(|| Error::Config("--config <file> is required".into()))?;
    Config::load(path)
}

fn print(v: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn oracle(cli: &Cli, cfg: &Config, opts: &RunOptions) -> Result<()> {
    let rp = cfg.regime_params()?;
    let l = cfg.scenario.half_width;
    let grid = oracle_grid(opts.grid.unwrap_or(cfg.grid.interior), -l, l)?;
    let sc = Scenario::build(&cfg.scenario, grid, rp.mu, rp.h, opts.seed)?;
    let key = cache_key(&sc.fingerprint, &grid, rp.mu, rp.h);
    let path = cli.out.join("cache").join(format!("{key}.laev"));
    let (values, cached) = if path.exists() {
        (read_laev(&path)?, true)
    } else {
        faer::set_global_parallelism(faer::Par::Seq);
        let op = assemble_with(&sc.coeffs, grid, rp.mu, rp.h, &cfg.grid.oracle_options())?;
        let v = eigenvalues(&op)?;
        write_laev(&path, &v)?;
        (v, false)
    };
    let below = values.partition_point(|&x| x <= rp.tau);
    print(&json!({
        "scenario": cfg.scenario.name,
        "mu": rp.mu,
        "h": rp.h,
        "dimension": values.len(),
        "count_below_tau": below,
        "lowest": &values[..values.len().min(20)],
        "cache": path,
        "cached": cached,
    }))
}

fn model1d(cli: &Cli) -> Result<()> {
    let m = match &cli.config {
        Some(p) => Config::load(p)?.model1d.unwrap_or_default(),
        None => Model1dConfig::default(),
    };
    let params = SaddleModelParams::saddle(0.0, m.k, m.omega1, m.mu, m.hbar);
    let rows = saddle_sweep(&params, m.rho, &m.ws)?;
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    let csv = cli.out.join("model1d.csv");
    write_sweep_csv(&rows, &csv)?;
    let sig = log_signature(m.hbar, m.rho, &m.ws)?;
    print(&json!({
        "csv": csv,
        "c1": sig.c1,
        "c2": sig.c2,
        "max_rel_residual": sig.max_rel_residual,
        "rel_residual_without_log": sig.rel_residual_without_log,
        "log_term_present": sig.log_term_present(),
        "branches": sig.branches,
        "rows": rows,
    }))
}

fn execute(cli: &Cli) -> Result<()> {
    let opts = RunOptions { seed: cli.seed, grid: cli.grid };
    match cli.command {
        Command::Predict => {
            let cfg = config(cli)?;
            let (_, _, pred) = prediction(&cfg, &opts)?;
            print(&serde_json::to_value(&pred)?)
        }
        Command::Oracle => oracle(cli, &config(cli)?, &opts),
        Command::Run => {
            let cfg = config(cli)?;
            let r = run_scenario(&cfg, &opts)?;
            persist_run(&cli.out, &r, &cfg.scenario.name, cli.with_timings)?;
            print(&json!({
                "scenario": r.scenario,
                "regime": r.regime,
                "N_exact": r.n_exact,
                "N_weyl": r.n_weyl,
                "corr_sum": r.corr_sum,
                "corr2_sum": r.corr2_sum,
                "N_pred": r.n_pred,
                "remainder": r.remainder,
                "seconds": r.seconds,
            }))
        }
        Command::Sweep => {
            let cfg = config(cli)?;
            let mut fit = sweep_and_fit(&cfg, &opts, cli.workers, Some(&cli.out), cli.with_timings)?;
            let rows: Vec<_> = fit
                .points
                .iter()
                .map(|p| json!({"coordinate": p.coordinate, "mu": p.report.mu, "h": p.report.h, "remainder": p.report.remainder, "discretization_limited": p.discretization_limited}))
                .collect();
            fit.points.clear();
            let mut v = serde_json::to_value(&fit)?;
            v["points"] = json!(rows);
            print(&v)
        }
        Command::Critpoints => {
            let cfg = config(cli)?;
            let (_, points, _) = prediction(&cfg, &opts)?;
            print(&serde_json::to_value(&points)?)
        }
        Command::Model1d => model1d(cli),
        Command::Report => {
            let files = emit_report(Path::new(&cli.out), cli.with_timings)?;
            print(&json!({"summary": files.summary, "plots": files.plots, "manifest": files.manifest}))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("magweyl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
