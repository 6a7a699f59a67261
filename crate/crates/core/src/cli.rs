//! `tumorctl <subcommand> <config> [section.key=value ...]`
//!
//! Every subcommand writes its artifacts and a `run.log` of `key=value`
//! records to the configured output directory, echoing the same records to
//! stdout. Wall-clock timings go to a separate `timing.log` so that the rest
//! of the output is reproducible byte for byte.
//!
//! Exit status: 0 pass, 1 criteria failure, 2 usage or config error,
//! 3 numerical divergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{load_config, RunConfig};
use crate::error::{Error, Result};
use crate::forward::{simulate, ControlSchedule};
use crate::hypotheses::check_hypotheses;
use crate::ode::oracle_study;
use crate::optimizer::{kkt_report, projected_gradient, Termination};
use crate::sensitivity::{
    cost_taylor_sweep, dot_product_test, fitted_slope, observed_orders, state_remainder_sweep,
    SweepRow,
};
use crate::snapshot::write_snapshot;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tumorctl",
    version,
    about = "Tumor growth simulation and optimal control"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Path to the run configuration.
    pub config: PathBuf,
    /// `section.key=value` overrides applied after parsing.
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcommandName {
    Simulate,
    Optimize,
    GradCheck,
    Taylor,
    Oracle,
    CheckHypotheses,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the state equations and write snapshots and diagnostics.
    Simulate(RunArgs),
    /// Projected-gradient optimal control.
    Optimize(RunArgs),
    /// Dot-product tests of the adjoint.
    GradCheck(RunArgs),
    /// Remainder sweeps of the state derivative and reduced gradient.
    Taylor(RunArgs),
    /// Compare spatially constant runs with the scalar ODE.
    Oracle(RunArgs),
    /// Evaluate the standing assumptions on the configured data.
    CheckHypotheses(RunArgs),
}

impl Command {
    fn split(self) -> (SubcommandName, RunArgs) {
        match self {
            Command::Simulate(a) => (SubcommandName::Simulate, a),
            Command::Optimize(a) => (SubcommandName::Optimize, a),
            Command::GradCheck(a) => (SubcommandName::GradCheck, a),
            Command::Taylor(a) => (SubcommandName::Taylor, a),
            Command::Oracle(a) => (SubcommandName::Oracle, a),
            Command::CheckHypotheses(a) => (SubcommandName::CheckHypotheses, a),
        }
    }
}

impl SubcommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            SubcommandName::Simulate => "simulate",
            SubcommandName::Optimize => "optimize",
            SubcommandName::GradCheck => "grad-check",
            SubcommandName::Taylor => "taylor",
            SubcommandName::Oracle => "oracle",
            SubcommandName::CheckHypotheses => "check-hypotheses",
        }
    }
}

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    /// One line, `key=value` pairs.
    pub summary: String,
    pub outdir: PathBuf,
}

/// Collects log records, mirroring them to stdout when `echo` is set.
struct RunLog {
    text: String,
    echo: bool,
}

impl RunLog {
    fn record(&mut self, line: impl AsRef<str>) {
        let line = line.as_ref();
        if self.echo {
            println!("{line}");
        }
        self.text.push_str(line);
        self.text.push('\n');
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn sweep_lines(log: &mut RunLog, kind: &str, rows: &[SweepRow]) {
    let orders = observed_orders(rows);
    for (i, r) in rows.iter().enumerate() {
        let order = if i == 0 { f64::NAN } else { orders[i - 1] };
        log.record(format!(
            "kind={kind} eps={:e} remainder={:e} order={order:.4}",
            r.eps, r.remainder
        ));
    }
}

fn simulate_cmd(cfg: &RunConfig, out: &Path, log: &mut RunLog) -> Result<bool> {
    let params = cfg.model_params()?;
    let (phi0, sigma0) = cfg.initial_fields()?;
    let n = params.n_steps();
    let u = ControlSchedule::repeat(cfg.opt.u0.load(params.grid, &cfg.base_dir)?, n);
    let traj = simulate(&params, &phi0, &sigma0, &u)?;
    let mut mass_ok = true;
    for (k, d) in traj.diagnostics.iter().enumerate() {
        let ok = d.mass_residual.abs() <= d.mass_bound;
        mass_ok &= ok;
        log.record(format!(
            "step={} t={:?} mass={:?} mass_residual={:e} mass_ok={ok} energy={:?}",
            k + 1,
            traj.time(k + 1),
            traj.mass(k + 1),
            d.mass_residual,
            d.energy
        ));
    }
    let every = cfg.io.snapshot_every;
    for k in 0..=n {
        if k == 0 || k == n || (every > 0 && k % every == 0) {
            write_snapshot(
                &traj.phi[k],
                traj.time(k),
                &out.join(format!("phi_{k:05}.csv")),
            )?;
            write_snapshot(
                &traj.sigma[k],
                traj.time(k),
                &out.join(format!("sigma_{k:05}.csv")),
            )?;
        }
    }
    log.record(format!(
        "result=simulate steps={n} initial_energy={:?} final_energy={:?} max_curvature={:?} stabilization={:?} mass_ok={mass_ok}",
        traj.initial_energy,
        traj.energies()[n],
        traj.max_curvature,
        params.stabilization
    ));
    Ok(mass_ok)
}

fn optimize_cmd(cfg: &RunConfig, out: &Path, log: &mut RunLog) -> Result<bool> {
    let params = cfg.model_params()?;
    let (phi0, sigma0) = cfg.initial_fields()?;
    let u0 = cfg.initial_control()?;
    let mut lines = Vec::new();
    let res = projected_gradient(
        &params,
        &phi0,
        &sigma0,
        &u0,
        &cfg.optim_options(),
        |r, _| {
            lines.push(format!(
                "iter={} cost={:?} step={:?} stationarity={:e} grad_norm={:e}",
                r.iteration, r.cost, r.step, r.stationarity, r.gradient_norm
            ));
        },
    )?;
    for l in lines {
        log.record(l);
    }
    for (k, level) in res.control.levels().iter().enumerate() {
        write_snapshot(
            level,
            params.tau * k as f64,
            &out.join(format!("u_{k:05}.csv")),
        )?;
    }
    let n = res.trajectory.n_steps();
    write_snapshot(
        &res.trajectory.phi[n],
        params.t_final,
        &out.join("phi_final.csv"),
    )?;
    write_snapshot(
        &res.trajectory.sigma[n],
        params.t_final,
        &out.join("sigma_final.csv"),
    )?;
    let kkt = kkt_report(&params, &res.control, &res.adjoint, cfg.opt.kkt_tol)?;
    log.record(kkt.to_string());
    let monotone = res.cost_history().windows(2).all(|w| w[1] <= w[0]);
    log.record(format!(
        "result=optimize termination={} iterations={} final_cost={:?} kkt_residual={:e} monotone={monotone}",
        res.termination,
        res.iterations,
        res.final_cost(),
        res.kkt_residual
    ));
    Ok(res.termination == Termination::ToleranceMet && kkt.violations.is_empty() && monotone)
}

fn grad_check_cmd(cfg: &RunConfig, log: &mut RunLog) -> Result<bool> {
    let params = cfg.model_params()?;
    let steps = if cfg.check.steps == 0 {
        params.n_steps()
    } else {
        cfg.check.steps
    };
    let mut worst: f64 = 0.0;
    for &seed in &cfg.check.seeds {
        let r = dot_product_test(&params, steps, seed)?;
        log.record(format!(
            "seed={seed} steps={steps} single_step={:e} full_horizon={:e} forward={:?} adjoint={:?}",
            r.single_step, r.full_horizon, r.pairings.0, r.pairings.1
        ));
        worst = worst.max(r.worst());
    }
    let passed = worst <= cfg.check.tol;
    log.record(format!(
        "result=grad-check max_discrepancy={worst:e} bound={:e} passed={passed}",
        cfg.check.tol
    ));
    Ok(passed)
}

fn taylor_cmd(cfg: &RunConfig, log: &mut RunLog) -> Result<bool> {
    let params = cfg.model_params()?;
    let (phi0, sigma0) = cfg.initial_fields()?;
    let u = cfg.initial_control()?;
    let h = ControlSchedule::repeat(
        cfg.check.direction.load(params.grid, &cfg.base_dir)?,
        u.len(),
    );
    let in_band = |s: f64| (cfg.check.order_min..=cfg.check.order_max).contains(&s);

    let state = state_remainder_sweep(&params, &phi0, &sigma0, &u, &h, &cfg.check.eps)?;
    sweep_lines(log, "state", &state);
    let state_slope = fitted_slope(&state);
    let cost = cost_taylor_sweep(&params, &phi0, &sigma0, &u, &h, &cfg.check.cost_eps)?;
    sweep_lines(log, "cost", &cost);
    let cost_slope = fitted_slope(&cost);
    let passed = in_band(state_slope) && in_band(cost_slope);
    log.record(format!(
        "result=taylor state_slope={state_slope:.4} cost_slope={cost_slope:.4} band=[{:?},{:?}] passed={passed}",
        cfg.check.order_min, cfg.check.order_max
    ));
    Ok(passed)
}

fn oracle_cmd(cfg: &RunConfig, log: &mut RunLog) -> Result<bool> {
    let params = cfg.model_params()?;
    let c = &cfg.check;
    let rows = oracle_study(&params, c.phi, c.sigma, c.u, &c.taus, c.oracle_dt)?;
    for r in &rows {
        log.record(format!(
            "tau={:e} error={:e} order={:.4}",
            r.tau, r.error, r.order
        ));
    }
    let passed = rows.len() >= 2 && rows[1..].iter().all(|r| (0.9..=1.1).contains(&r.order));
    log.record(format!("result=oracle rows={} passed={passed}", rows.len()));
    Ok(passed)
}

fn hypotheses_cmd(cfg: &RunConfig, log: &mut RunLog) -> Result<bool> {
    let params = cfg.model_params()?;
    let report = check_hypotheses(&params, cfg.check.range, cfg.check.n_samples)?;
    for line in report.to_string().lines() {
        log.record(line);
    }
    let passed = report.all_passed();
    log.record(format!("result=check-hypotheses passed={passed}"));
    Ok(passed)
}

/// Loads the config, runs one subcommand and writes its artifacts.
pub fn run_subcommand(
    name: SubcommandName,
    config_path: &Path,
    overrides: &[String],
    echo_stdout: bool,
) -> Result<Outcome> {
    let mut cfg = load_config(config_path, overrides)?;
    if let Ok(seed) = std::env::var("RUN_SEED") {
        let seed = seed
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Usage(format!("RUN_SEED `{seed}` is not an unsigned integer")))?;
        cfg.override_seeds(seed);
    }
    let out = cfg.outdir();
    fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
    write_file(&out.join("config.echo"), &cfg.echo())?;

    let start = Instant::now();
    let mut log = RunLog {
        text: String::new(),
        echo: echo_stdout,
    };
    log.record(format!("subcommand={}", name.as_str()));
    let result = match name {
        SubcommandName::Simulate => simulate_cmd(&cfg, &out, &mut log),
        SubcommandName::Optimize => optimize_cmd(&cfg, &out, &mut log),
        SubcommandName::GradCheck => grad_check_cmd(&cfg, &mut log),
        SubcommandName::Taylor => taylor_cmd(&cfg, &mut log),
        SubcommandName::Oracle => oracle_cmd(&cfg, &mut log),
        SubcommandName::CheckHypotheses => hypotheses_cmd(&cfg, &mut log),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let mut timing = String::new();
    writeln!(
        timing,
        "subcommand={} wall_seconds={elapsed:.3}",
        name.as_str()
    )
    .unwrap();
    write_file(&out.join("timing.log"), &timing)?;
    if let Err(e) = &result {
        log.record(format!("error=\"{e}\""));
    }
    write_file(&out.join("run.log"), &log.text)?;
    let passed = result?;
    let summary = log.text.lines().last().unwrap_or_default().to_string();
    Ok(Outcome {
        passed,
        summary,
        outdir: out,
    })
}

pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(e) if e.is_numerical() => EXIT_DIVERGENCE,
        Err(_) => EXIT_USAGE,
    }
}

/// Single-line stderr summary for a nonzero exit.
pub fn failure_line(name: SubcommandName, result: &Result<Outcome>) -> Option<String> {
    match result {
        Ok(o) if o.passed => None,
        Ok(o) => Some(format!(
            "status=fail subcommand={} {}",
            name.as_str(),
            o.summary
        )),
        Err(e) => {
            let kind = if e.is_numerical() {
                "divergence"
            } else {
                "usage"
            };
            let msg = e.to_string().replace('\n', " ").replace('"', "'");
            Some(format!(
                "status={kind} subcommand={} error=\"{msg}\"",
                name.as_str()
            ))
        }
    }
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    let (name, args) = cli.command.split();
    let result = run_subcommand(name, &args.config, &args.overrides, true);
    if let Some(line) = failure_line(name, &result) {
        eprintln!("{line}");
    }
    exit_code(&result)
}
