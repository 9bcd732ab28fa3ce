//! Command-line front end: scenario files, single evaluations, sweeps and
//! the validation suite.
//!
//! Exit codes: 0 success, 1 validation or runtime failure, 2 configuration
//! or parameter error.

pub mod config;
pub mod sweep;
pub mod validate;

pub use config::{Scenario, ScenarioConfig, SweepVariable, DEFAULT_CONFIG};
pub use sweep::{csv_header, evaluate_feeder, evaluate_scheme, write_csv, Scheme, Sweep, SweepRow};
pub use validate::{validate_models, Check, Cmp, SuiteSizes, ValidationReport};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "hts-capacity", version, about = "Ergodic capacity of an FSO-fed multibeam satellite forward link")]
pub struct Cli {
    /// Scenario file (TOML). The bundled default is used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the sweep seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the Monte Carlo sample count.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Beamforming scheme for `userlink` and `e2e`.
    #[arg(long, global = true, value_enum, default_value = "proposed")]
    pub scheme: Scheme,
    /// Apply a named preset; turbulence names set every gateway, shadowing
    /// names set the user link. Repeatable.
    #[arg(long, global = true)]
    pub preset: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Feeder-link capacity C₁, closed form and simulation.
    Feeder,
    /// User-link capacity C₂ of one scheme.
    Userlink,
    /// End-to-end capacity min(C₁, C₂).
    E2e,
    /// Sweep the configured variable and write CSV.
    Sweep,
    /// Run the model validation suite.
    Validate,
}

/// Exit status of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Parameter(_) => 2,
        _ => 1,
    }
}

/// Load the scenario and apply command-line overrides.
pub fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default_config(),
    };
    for name in &cli.preset {
        cfg.apply_preset(name)?;
    }
    if let Some(s) = cli.seed {
        cfg.sweep.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.sweep.samples = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn kv(out: &mut Vec<String>, key: &str, v: impl std::fmt::Display) {
    out.push(format!("{key}={v}"));
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(",")
}

fn feeder_lines(scn: &Scenario, out: &mut Vec<String>) -> Result<f64> {
    let f = evaluate_feeder(scn, RngStream::new(scn.seed, 0))?;
    kv(out, "c1_bits", format!("{:.6}", f.c1_cf));
    kv(out, "c1_stbc_bits", format!("{:.6}", f.c1_stbc_cf));
    kv(out, "c1_single_bits", format!("{:.6}", f.c1_single_cf));
    kv(out, "c1_mc_bits", format!("{:.6}", f.c1_mc));
    kv(out, "c1_mc_se", format!("{:.2e}", f.c1_mc_se));
    kv(out, "quadrature_nodes", scn.quadrature.t);
    kv(out, "accuracy_warning", f.accuracy_warning);
    Ok(f.c1_cf)
}

fn userlink_lines(scn: &Scenario, scheme: Scheme, out: &mut Vec<String>) -> Result<f64> {
    let o = evaluate_scheme(scn, scheme, RngStream::new(scn.seed, 0))?;
    kv(out, "scheme", scheme.key());
    kv(out, "c2_bits", format!("{:.6}", o.c2_cf));
    kv(out, "c2_per_user_bits", list(&o.c2_per_user));
    kv(out, "c2_mc_bits", format!("{:.6}", o.c2_mc));
    kv(out, "c2_mc_se", format!("{:.2e}", o.c2_mc_se));
    kv(out, "selected_users", o.selected);
    kv(out, "iterations", o.iterations);
    kv(out, "converged", o.converged);
    kv(out, "clamped_weights", o.clamped);
    Ok(o.c2_cf)
}

fn emit(cli: &Cli, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match &cli.output {
        Some(p) => std::fs::write(p, bytes).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("cannot write {}: {e}", p.display())))
        }),
        None => Ok(stdout.write_all(bytes)?),
    }
}

/// Execute a parsed command; the return value is the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute_inner(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute_inner(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Feeder => {
            let scn = cfg.resolve()?;
            let mut out = Vec::new();
            feeder_lines(&scn, &mut out)?;
            emit(cli, (out.join("\n") + "\n").as_bytes(), stdout)?;
        }
        Command::Userlink => {
            let scn = cfg.resolve()?;
            let mut out = Vec::new();
            userlink_lines(&scn, cli.scheme, &mut out)?;
            emit(cli, (out.join("\n") + "\n").as_bytes(), stdout)?;
        }
        Command::E2e => {
            let scn = cfg.resolve()?;
            let mut out = Vec::new();
            let c1 = feeder_lines(&scn, &mut out)?;
            let c2 = userlink_lines(&scn, cli.scheme, &mut out)?;
            let r = crate::capacity::end_to_end_capacity(c1, c2)?;
            kv(&mut out, "c_bits", format!("{:.6}", r.c));
            kv(&mut out, "bottleneck", if c1 <= c2 { "feeder" } else { "userlink" });
            emit(cli, (out.join("\n") + "\n").as_bytes(), stdout)?;
        }
        Command::Sweep => {
            let scn = cfg.resolve()?;
            let sweep = Sweep {
                base: scn,
                variable: cfg.sweep.variable,
                grid: cfg.sweep.grid.clone(),
                feeder_power_dbm: cfg.feeder.power_dbm,
                user_power_dbw: cfg.userlink.power_dbw,
            };
            let rows = sweep.run()?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(cli, &buf, stdout)?;
            let _ = writeln!(
                stderr,
                "sweep points={} variable={} seed={} samples={}",
                rows.len(),
                cfg.sweep.variable.key(),
                cfg.sweep.seed,
                cfg.sweep.samples
            );
        }
        Command::Validate => {
            let mut sizes = SuiteSizes::default();
            if let Some(n) = cli.samples {
                sizes.mc_draws = n;
            }
            let report = validate_models(&cfg, sizes);
            let mut buf = Vec::new();
            report.write_to(&mut buf)?;
            emit(cli, &buf, stdout)?;
            return Ok(if report.passed() { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// Parse arguments and run; clap usage errors exit with 2.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            code
        }
    }
}
