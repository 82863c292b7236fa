use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ctglab::harness::{self, exit, ExperimentConfig, SweepConfig};
use ctglab::mdp::{validate_mdp, MdpSpec};
use ctglab::{Error, Result};

/// Environment variable naming the default output directory.
const OUT_DIR_VAR: &str = "CTGLAB_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "ctglab-out";

#[derive(Parser, Debug)]
#[command(name = "ctglab", version, about = "Finite-horizon tabular MDP lab for cost-to-go imitation and policy iteration")]
struct Cli {
    /// Worker threads for sampling and sweep cells (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunOverrides {
    /// Output directory; overrides the config and $CTGLAB_OUT_DIR.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Replaces the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Record exact values and run bound checks.
    #[arg(long, overrides_with = "no_oracle")]
    oracle: bool,
    /// Skip exact evaluation; validation uses sampled returns.
    #[arg(long)]
    no_oracle: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write its report files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Recompute bound and consistency checks for a finished run.
    Diagnose {
        /// Directory written by `run`.
        #[arg(long)]
        report: PathBuf,
        /// Exit with status 1 if any check fails.
        #[arg(long)]
        strict: bool,
    },
    /// Run every cell of a config's [grid] table and write a CSV summary.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check an MDP file for structural errors.
    Validate {
        /// MDP in JSON form.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Write a configured environment's MDP as JSON.
    Export {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Include the expert and the policy class.
        #[arg(long)]
        full: bool,
    },
}

fn resolve_out_dir(flag: Option<PathBuf>, from_config: Option<&Path>) -> PathBuf {
    flag.or_else(|| from_config.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR))
}

fn cmd_run(config: &Path, o: RunOverrides) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if o.no_oracle {
        cfg.oracle_mode = false;
    } else if o.oracle {
        cfg.oracle_mode = true;
    }
    cfg.check()?;
    let dir = resolve_out_dir(o.out_dir, cfg.out_dir.as_deref());
    let art = harness::run_to_dir(&cfg, &dir)?;
    let s = &art.summary.summary;
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"));
    println!("wrote {}", dir.display());
    println!("J(mixture) = {}  J(best) = {}  J(expert) = {}", fmt(s.j_mixture), fmt(s.j_best), fmt(s.j_expert));
    for b in &s.bounds {
        println!("{}: lhs = {:.6} rhs = {:.6} holds = {}", b.name, b.lhs, b.rhs, b.holds);
    }
    Ok(exit::OK)
}

fn cmd_diagnose(report: &Path, strict: bool) -> Result<i32> {
    let doc = harness::diagnose_to_dir(report)?;
    for c in &doc.checks {
        println!("{:<24} lhs = {:<14.6e} rhs = {:<14.6e} {}", c.name, c.lhs, c.rhs, if c.holds { "ok" } else { "FAILED" });
    }
    if strict && !doc.all_hold {
        return Ok(exit::FAILURE);
    }
    Ok(exit::OK)
}

fn cmd_sweep(config: &Path, out_dir: Option<PathBuf>) -> Result<i32> {
    let cfg = SweepConfig::load(config)?;
    let dir = resolve_out_dir(out_dir, cfg.base.out_dir.as_deref());
    let out = harness::sweep(&cfg, &dir)?;
    println!(
        "{} cells ({} computed, {} reused); wrote {}",
        out.rows.len(),
        out.computed.len(),
        out.rows.len() - out.computed.len(),
        out.csv_path.display()
    );
    Ok(exit::OK)
}

fn cmd_validate(spec: &Path) -> Result<i32> {
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", spec.display())))?;
    let spec: MdpSpec = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let report = validate_mdp(&spec);
    if report.is_ok() {
        println!("ok");
        return Ok(exit::OK);
    }
    for v in &report.violations {
        println!("{v}");
    }
    Ok(exit::CONFIG)
}

fn cmd_export(config: &Path, output: Option<PathBuf>, full: bool) -> Result<i32> {
    let env = ExperimentConfig::load(config)?.environment()?;
    let body = if full {
        serde_json::to_string_pretty(&env)?
    } else {
        env.spec.to_json()?
    };
    match output {
        Some(path) => std::fs::write(path, body + "\n")?,
        None => println!("{body}"),
    }
    Ok(exit::OK)
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run { config, overrides } => cmd_run(&config, overrides),
        Command::Diagnose { report, strict } => cmd_diagnose(&report, strict),
        Command::Sweep { config, out_dir } => cmd_sweep(&config, out_dir),
        Command::Validate { spec } => cmd_validate(&spec),
        Command::Export { config, output, full } => cmd_export(&config, output, full),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.workers {
        Some(0) => Err(Error::Config("--workers must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))
            .and_then(|pool| pool.install(|| dispatch(cli.command))),
        None => dispatch(cli.command),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            harness::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
