use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use explore_core::harness::{
    self, ClutterPlan, EnvSource, ExperimentResult, ExperimentSpec, Sweep, DEFAULT_LAMBDAS,
};
use explore_core::planners::{GainMode, Method, PlannerConfig, DEFAULT_WINDOW_M};
use explore_core::world::{ClutterSpec, DEFAULT_CLUTTER_DENSITY};
use explore_core::{generate_env, EnvKind, PredictionRange};

#[derive(Parser)]
#[command(name = "explore", version, about = "Frontier exploration experiments on occupancy grids")]
#[command(args_override_self = true)]
struct Cli {
    /// Flat key = value file; every flag may appear as a key. Flags given on
    /// the command line win, repeatable keys accumulate.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a world and write it as a map file.
    GenEnv(GenEnvArgs),
    /// Run every method from every start.
    Run(RunArgs),
    /// Information gain over a list of gain weights.
    SweepLambda(RunArgs),
    /// Every method over a list of prediction ranges.
    SweepCp(RunArgs),
    /// Every method on clean and cluttered environments and predictions.
    Clutter(RunArgs),
    /// Print a summary table from an output directory or summary file.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GenEnvArgs {
    #[arg(long, default_value = "office")]
    kind: EnvKind,
    /// WIDTHxHEIGHT or a single side length, in cells.
    #[arg(long, default_value = "200")]
    size: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Map file; overrides --kind/--size.
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long, default_value = "office")]
    kind: EnvKind,
    #[arg(long, default_value = "200")]
    size: String,
    /// World generation seed, also the master seed of the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// NF, IG or DA; repeat for several.
    #[arg(long = "method")]
    methods: Vec<Method>,
    /// Gain weight; a comma list or repeated for sweeps.
    #[arg(long = "lambda", value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Vec<f64>,
    /// NAIVE or TRUE; repeat for several.
    #[arg(long = "gain-mode", value_delimiter = ',')]
    gain_modes: Vec<GainMode>,
    /// Prediction range in cells or "inf"; a comma list for sweeps.
    #[arg(long = "cp", value_delimiter = ',')]
    cps: Vec<PredictionRange>,
    #[arg(long, default_value_t = DEFAULT_WINDOW_M)]
    window_m: f64,
    #[arg(long, default_value_t = 10)]
    starts: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Share of free area covered by clutter.
    #[arg(long, default_value_t = DEFAULT_CLUTTER_DENSITY)]
    clutter_density: f64,
    /// Clutter triangle size in meters.
    #[arg(long, default_value_t = 1.0)]
    clutter_size: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let parse = |v: &str| v.trim().parse::<usize>().with_context(|| format!("bad size {s:?}"));
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((parse(w)?, parse(h)?)),
        None => {
            let n = parse(s)?;
            Ok((n, n))
        }
    }
}

impl RunArgs {
    fn env(&self) -> Result<EnvSource> {
        Ok(match &self.env {
            Some(p) => EnvSource::File(p.clone()),
            None => {
                let (width, height) = parse_size(&self.size)?;
                EnvSource::Generated {
                    kind: self.kind,
                    width,
                    height,
                    seed: self.seed,
                }
            }
        })
    }

    fn methods(&self, default: &[Method]) -> Vec<PlannerConfig> {
        let methods = if self.methods.is_empty() { default.to_vec() } else { self.methods.clone() };
        let lambda = self.lambdas.first().copied().unwrap_or(1.0);
        let modes = if self.gain_modes.is_empty() { vec![GainMode::Naive] } else { self.gain_modes.clone() };
        let cp = self.cps.first().copied().unwrap_or(PredictionRange::Unlimited);
        let mut out = Vec::new();
        for m in methods {
            match m {
                Method::Nf => out.push(PlannerConfig::nf()),
                Method::Ig => out.extend(modes.iter().map(|&g| PlannerConfig::ig(lambda, g))),
                Method::Da => out.push(PlannerConfig::da(cp)),
            }
        }
        out.into_iter().map(|c| c.with_window(self.window_m)).collect()
    }

    fn spec(&self, default_methods: &[Method]) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::new(self.env()?, self.methods(default_methods));
        spec.starts = self.starts;
        spec.master_seed = self.seed;
        Ok(spec)
    }
}

fn finish(result: ExperimentResult, out: &Path) -> Result<()> {
    harness::write_outputs(&result, out)?;
    print!("{}", harness::format_report(&result.summary));
    eprintln!("wrote {}", out.display());
    Ok(())
}

/// Turns config-file entries into flags placed before the command line's
/// own, so explicit flags override them.
fn with_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let Some(path) = args.get(pos + 1) else {
        bail!("--config needs a file");
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.to_string_lossy()))?;
    let entries = harness::parse_config(&text)?;
    // Subcommand is the first argument that is not the config flag pair.
    let sub = args
        .iter()
        .enumerate()
        .skip(1)
        .find(|&(i, a)| i != pos && i != pos + 1 && !a.to_string_lossy().starts_with('-'))
        .map(|(i, _)| i)
        .context("missing subcommand")?;
    let mut out: Vec<OsString> = args[..=sub].to_vec();
    for (k, v) in entries {
        if k == "config" {
            continue;
        }
        out.push(format!("--{k}").into());
        out.push(v.into());
    }
    out.extend(args[sub + 1..].iter().cloned());
    if pos < sub {
        out.drain(pos..pos + 2);
    }
    Ok(out)
}

fn main() -> Result<()> {
    let cli = Cli::parse_from(with_config(std::env::args_os().collect())?);
    match cli.command {
        Command::GenEnv(a) => {
            let (w, h) = parse_size(&a.size)?;
            let gt = generate_env(a.kind, w, h, a.seed)?;
            if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(&a.out, gt.to_text()).with_context(|| format!("writing {}", a.out.display()))?;
            eprintln!(
                "{} {}x{} seed {}: {} free cells, {} starts",
                a.kind,
                w,
                h,
                a.seed,
                gt.free_count(),
                gt.starts().len()
            );
        }
        Command::Run(a) => {
            let spec = a.spec(&[Method::Nf, Method::Ig, Method::Da])?;
            finish(harness::run_experiment(&spec, a.jobs)?, &a.out)?;
        }
        Command::SweepLambda(a) => {
            let spec = a.spec(&[Method::Nf])?;
            let lambdas = if a.lambdas.is_empty() { DEFAULT_LAMBDAS.to_vec() } else { a.lambdas.clone() };
            let modes = if a.gain_modes.is_empty() {
                vec![GainMode::Naive, GainMode::True]
            } else {
                a.gain_modes.clone()
            };
            finish(harness::sweep_lambda(&spec, &lambdas, &modes, a.jobs)?, &a.out)?;
        }
        Command::SweepCp(a) => {
            let cps = if a.cps.is_empty() {
                [0, 1, 2, 4].map(PredictionRange::Cells).into_iter().chain([PredictionRange::Unlimited]).collect()
            } else {
                a.cps.clone()
            };
            let mut spec = a.spec(&[Method::Nf, Method::Ig, Method::Da])?;
            spec.sweep = Sweep::Cp(cps);
            finish(harness::run_experiment(&spec, a.jobs)?, &a.out)?;
        }
        Command::Clutter(a) => {
            let spec = a.spec(&[Method::Nf, Method::Ig, Method::Da])?;
            let world = spec.env.load()?;
            let plan = ClutterPlan {
                count: ClutterSpec::count_for_density(&world, a.clutter_density, a.clutter_size),
                size: a.clutter_size,
            };
            finish(harness::clutter_matrix(&spec, plan, a.jobs)?, &a.out)?;
        }
        Command::Report { out } => {
            let path = if out.is_dir() { out.join("summary.json") } else { out };
            let summary = harness::read_summary(&path)?;
            print!("{}", harness::format_report(&summary));
        }
    }
    Ok(())
}
