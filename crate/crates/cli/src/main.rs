use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use antenna_tuner::capacity::{capacity_to_throughput, CapacityValue};
use antenna_tuner::channel::Scenario;
use antenna_tuner::environment::{
    grid_oracle, grid_points, load_trace, trace_env, write_trace, CsiTrace, Environment,
};
use antenna_tuner::harness::{
    compare_on, oracle_csv, parse_experiment_config, write_atomic, write_outputs, ComparisonResult,
    ExperimentConfig,
};
use antenna_tuner::optimizer::{run_optimizer, Strategy};

/// Antenna-orientation tuning in simulation: grid oracles, single optimizer
/// runs, and strategy comparisons.
#[derive(Parser)]
#[command(name = "antenna-tuner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive grid over RX orientations; reports the optimum and the spread.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Grid spacing in degrees.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Runs one strategy once and prints its trace.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "bayesopt")]
        strategy: Strategy,
        /// Replay this CSI trace instead of simulating.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Runs every configured strategy over all replications and writes outputs.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Like `compare`, against a recorded CSI trace.
    Replay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Dumps noiseless simulator CSI on an orientation grid as a CSI trace.
    TraceGen {
        #[command(flatten)]
        common: Common,
        /// Grid spacing in degrees.
        #[arg(long, default_value_t = 45.0)]
        step: f64,
        /// Output file.
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides base_seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scenario: Option<Scenario>,
    #[arg(long)]
    budget: Option<usize>,
    /// Comma-separated subset of bayesopt, random, sobol.
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    #[arg(long)]
    no_svg: bool,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let c = self.load()?;
        c.validate()?;
        Ok(c)
    }

    /// Config file plus flag overrides, not yet validated.
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_experiment_config(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            c.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            c.base_seed = seed;
        }
        if let Some(s) = self.scenario {
            c.scenario = s;
        }
        if let Some(b) = self.budget {
            c.budget = b;
        }
        if let Some(s) = &self.strategies {
            c.strategies = s.clone();
        }
        if self.no_svg {
            c.svg = false;
        }
        Ok(c)
    }
}

fn mbps(c: CapacityValue, bandwidth_hz: f64) -> Result<f64> {
    Ok(capacity_to_throughput(c, bandwidth_hz)? / 1e6)
}

fn report(result: &ComparisonResult, written: &[PathBuf]) {
    let bw = result.config.bandwidth_hz;
    println!("{}", result.environment);
    for s in &result.summaries {
        let last = s.mean.len();
        println!(
            "{:>9}: mean best after {} trials {:.1} Mbps (95% CI {:.1} to {:.1})",
            s.strategy.name(),
            last,
            s.mean[last - 1] * bw / 1e6,
            s.ci_low[last - 1] * bw / 1e6,
            s.ci_high[last - 1] * bw / 1e6
        );
    }
    for p in written {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Oracle { common, step } => {
            let mut config = common.load()?;
            if let Some(step) = step {
                config.oracle_step_deg = step;
            }
            config.validate()?;
            let env = config.build_env(config.base_seed)?;
            let oracle = grid_oracle(&env, config.oracle_step_deg, config.oracle_cap)?;
            let (lo, hi) = oracle.range();
            let bw = config.bandwidth_hz;
            println!("{}", env.metadata());
            println!(
                "grid points: {} at {}° spacing",
                oracle.landscape.len(),
                config.oracle_step_deg
            );
            println!(
                "best orientation (deg): {:?} -> {:.3} bits/s/Hz, {:.1} Mbps",
                oracle.best.to_degrees_flat(),
                oracle.value.bits_per_s_per_hz(),
                mbps(oracle.value, bw)?
            );
            println!(
                "spread: {:.1} Mbps (min {:.1}, max {:.1})",
                (hi - lo) * bw / 1e6,
                lo * bw / 1e6,
                hi * bw / 1e6
            );
            if common.out.is_some() || common.config.is_some() {
                std::fs::create_dir_all(&config.out_dir)
                    .with_context(|| format!("creating {}", config.out_dir.display()))?;
                let path = config.out_dir.join("oracle.csv");
                write_atomic(&path, oracle_csv(&oracle, bw).as_bytes())?;
                println!("wrote {}", path.display());
            }
        }
        Command::Optimize {
            common,
            strategy,
            trace,
        } => {
            let mut config = common.load()?;
            config.strategies = vec![strategy];
            config.validate()?;
            let params = config.strategy_params();
            let seed = config.base_seed;
            let t = match trace {
                Some(path) => {
                    let mut env = trace_env(load_trace(&path)?)?;
                    run_optimizer(strategy, &mut env, config.budget, &params, seed)?
                }
                None => {
                    let mut env = config.build_env(seed)?;
                    run_optimizer(strategy, &mut env, config.budget, &params, seed)?
                }
            };
            let bw = config.bandwidth_hz;
            println!("trial,orientation_deg,capacity_bps_hz,best_so_far_mbps");
            for (s, best) in t.samples.iter().zip(&t.best_so_far) {
                println!(
                    "{},{:?},{:.4},{:.2}",
                    s.trial,
                    s.orientation.to_degrees_flat(),
                    s.capacity.bits_per_s_per_hz(),
                    best * bw / 1e6
                );
            }
            if let Some(best) = t.best() {
                println!(
                    "best: {:?} deg, {:.1} Mbps",
                    best.orientation.to_degrees_flat(),
                    mbps(best.capacity, bw)?
                );
            }
        }
        Command::Compare { common } => {
            let config = common.resolve()?;
            let env = config.build_env(config.base_seed)?;
            let result = compare_on(&config, &env)?;
            let written = write_outputs(&result, &config.out_dir)?;
            report(&result, &written);
        }
        Command::Replay { common, trace } => {
            let config = common.resolve()?;
            let env = trace_env(load_trace(&trace)?)?;
            let result = compare_on(&config, &env)?;
            let written = write_outputs(&result, &config.out_dir)?;
            report(&result, &written);
        }
        Command::TraceGen {
            common,
            step,
            output,
        } => {
            let config = common.resolve()?;
            let env = config.build_env(config.base_seed)?;
            let points = grid_points(&env.domain(), step, config.oracle_cap)?;
            let grid = points
                .into_iter()
                .map(|o| env.csi(&o).map(|csi| (o, csi)))
                .collect::<antenna_tuner::Result<Vec<_>>>()?;
            let n = grid.len();
            let trace = CsiTrace::new(grid, config.snr_db, env.metadata())?;
            ensure_parent(&output)?;
            write_atomic(&output, write_trace(&trace).as_bytes())?;
            println!("wrote {} orientations to {}", n, output.display());
        }
    }
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            bail!("directory {} does not exist", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
