//! Command-line front end: configuration, scenario presets, the
//! manufactured-solution harness and file output.

pub mod config;
pub mod io;
pub mod mms;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use log::{info, warn};

use crate::error::{Error, Result};
use crate::mesh::Grid;
use crate::stepper::{initial_diagnostics, run_simulation, validate_initial_data, StepperConfig};

pub use config::{parse_config, Config, TEMPLATE};
pub use io::{read_diagnostics, read_snapshot, write_diagnostics, write_snapshot};
pub use mms::{mms_convergence, StudyTable};
pub use scenario::{build, Setup, SCENARIO_NAMES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nsch", version, about = "Compressible Navier-Stokes-Cahn-Hilliard simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for diagnostics and snapshots.
    #[arg(long, global = true, default_value = "nsch-out")]
    pub out_dir: PathBuf,
    /// Write a snapshot every n steps (overrides the config).
    #[arg(long, global = true)]
    pub snapshot_every: Option<usize>,
    /// Seed for randomised initial data (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Only report errors.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation.
    Run { config: PathBuf },
    /// Run the manufactured-solution convergence study.
    Mms { config: PathBuf },
    /// Check a configuration and the compatibility of its initial data.
    Validate { config: PathBuf },
    /// Print an annotated configuration.
    PrintConfigTemplate,
}

/// Exit code for an error raised while setting up a run.
fn setup_code(e: &Error) -> i32 {
    match e {
        Error::BlowUp(_) => EXIT_BLOW_UP,
        Error::NotConverged { .. } | Error::Singular { .. } | Error::System(_) | Error::PicardDiverged { .. } => {
            EXIT_SOLVER
        }
        _ => EXIT_CONFIG,
    }
}

/// Exit code for an error raised while stepping.
fn run_code(e: &Error) -> i32 {
    match e {
        Error::BlowUp(_) | Error::DensityFloor { .. } => EXIT_BLOW_UP,
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

pub fn load_config(path: &Path, cli: &Cli) -> Result<Config> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), msg: e.to_string() })?;
    let mut cfg = parse_config(&text).map_err(|e| match e {
        Error::Config { line: Some(l), msg } => Error::Config { line: Some(l), msg: format!("{}: {msg}", path.display()) },
        other => other,
    })?;
    if let Some(n) = cli.snapshot_every {
        cfg.stepper.snapshot_every = n;
    }
    if let Some(seed) = cli.seed {
        let takes_seed = cfg
            .initial
            .scenario
            .as_deref()
            .and_then(scenario::scenario_keys)
            .is_some_and(|k| k.contains(&"seed"));
        if takes_seed {
            cfg.initial.params.insert("seed".into(), seed as f64);
        } else {
            warn!("--seed ignored: the initial data is not randomised");
        }
    }
    Ok(cfg)
}

fn init_logging(quiet: bool) {
    let level = if quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().format_timestamp(None).try_init();
}

/// Parses `args` and runs the chosen verb, returning the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    init_logging(cli.quiet);
    match &cli.command {
        Command::PrintConfigTemplate => {
            print!("{TEMPLATE}");
            EXIT_OK
        }
        Command::Validate { config } => validate(config, &cli),
        Command::Run { config } => run(config, &cli),
        Command::Mms { config } => mms(config, &cli),
    }
}

fn validate(path: &Path, cli: &Cli) -> i32 {
    let setup = match load_config(path, cli).and_then(|c| build(&c)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return setup_code(&e);
        }
    };
    match validate_initial_data(&setup.laws, &setup.state0) {
        Ok(r) => {
            for v in &r.violations {
                println!("warning: {v}");
            }
            if !cli.quiet {
                println!("{}: {} compatibility warning(s)", path.display(), r.violations.len());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: initial data: {e}");
            EXIT_CONFIG
        }
    }
}

fn run(path: &Path, cli: &Cli) -> i32 {
    let (cfg, setup) = match load_config(path, cli).and_then(|c| build(&c).map(|s| (c, s))) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return setup_code(&e);
        }
    };
    match validate_initial_data(&setup.laws, &setup.state0) {
        Ok(r) => {
            for v in &r.violations {
                warn!("compatibility: {v}");
            }
        }
        Err(e) => {
            eprintln!("error: initial data: {e}");
            return EXIT_CONFIG;
        }
    }
    match run_to_dir(&cfg, &setup, &cli.out_dir) {
        Ok(None) => EXIT_OK,
        Ok(Some(report)) => {
            eprintln!("{report}");
            EXIT_BLOW_UP
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => EXIT_CONFIG,
                e => run_code(&e),
            }
        }
    }
}

/// Runs `setup` and writes `diagnostics.csv`, periodic snapshots and
/// `final.txt` into `out_dir`. Returns the blow-up report, if any.
pub fn run_to_dir(cfg: &Config, setup: &Setup, out_dir: &Path) -> Result<Option<String>> {
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::Io { path: out_dir.display().to_string(), msg: e.to_string() })?;
    let every = cfg.stepper.snapshot_every;
    let stepper = StepperConfig { snapshot_every: 0, ..cfg.stepper.clone() };
    let f = setup.forcing.clone();
    let forcing = move |t: f64, g: &Arc<Grid<f64>>| f.at(t, g);
    let snap = |step: usize| out_dir.join(format!("snapshot_{step:06}.txt"));
    if every > 0 {
        write_snapshot(&setup.state0, snap(0))?;
    }
    let mut rows = vec![initial_diagnostics(&setup.laws, &setup.state0, &setup.forcing.at(setup.state0.t, setup.state0.grid()))?];
    let out = run_simulation(&setup.laws, setup.state0.clone(), &forcing, &stepper, |step, state, row| {
        info!(
            "step {step}: t = {:.6e}, E = {:.9e}, picard {} (contraction {:.3e})",
            row.t, row.energy, row.picard_iters, row.mean_contraction
        );
        if every > 0 && step % every == 0 {
            write_snapshot(state, snap(step))?;
        }
        Ok(())
    })?;
    rows.extend(out.rows.iter().copied());
    write_diagnostics(&rows, out_dir.join("diagnostics.csv"))?;
    write_snapshot(&out.final_state, out_dir.join("final.txt"))?;
    Ok(out.blow_up.map(|b| b.to_string()))
}

fn mms(path: &Path, cli: &Cli) -> i32 {
    let cfg = match load_config(path, cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return setup_code(&e);
        }
    };
    match mms_convergence(&cfg) {
        Ok(tables) => {
            for t in tables {
                print!("{t}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            run_code(&e)
        }
    }
}
