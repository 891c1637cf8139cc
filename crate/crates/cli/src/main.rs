use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasiuniform::optimize::InitStrategy;
use quasiuniform::pipeline::{self, Command, RunManifest, EXIT_OK, EXIT_USAGE};
use quasiuniform::quality::Region;
use quasiuniform::spaces::SpaceDescriptor;
use quasiuniform::weights::WeightRecord;

/// Quasi-uniform point configurations from weighted Riesz energy minimization.
#[derive(Parser, Debug)]
#[command(name = "quasiuniform", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Minimize the energy of N points and write the configuration.
    Generate(Flags),
    /// Measure separation, mesh norm and mesh ratio of a points file.
    Analyze(Flags),
    /// Check the separation, covering, energy and mesh-ratio bounds over an N list.
    Verify(Flags),
    /// Follow minimizers along an increasing s schedule toward best packing.
    Sweep(Flags),
    /// Compare region point fractions with a prescribed density.
    DensityCheck(Flags),
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// Run manifest (JSON); flags given on the command line override it.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// sphere:<d>, circle, torus:<R>:<r>, cube:<d> or cap:<d>:<c>.
    #[arg(long)]
    space: Option<SpaceDescriptor>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated list of N.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    s: Option<f64>,
    /// Comma-separated, strictly increasing s values for sweep.
    #[arg(long, value_delimiter = ',')]
    s_schedule: Option<Vec<f64>>,
    /// const:<c> or density:<expr>:s=<s>:d=<d>[:normalized].
    #[arg(long)]
    weight: Option<WeightRecord>,
    /// Density expression in x1, x2, ... for density-check.
    #[arg(long)]
    density: Option<String>,
    /// Regions for density-check: cap:<t> or band:<lo>:<hi>, comma-separated.
    #[arg(long, value_delimiter = ',')]
    regions: Option<Vec<Region>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Probe count for the mesh norm (default max(20000, 100 N)).
    #[arg(long)]
    probes: Option<usize>,
    /// Points file to analyze.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write long-format CSV tables for plotting.
    #[arg(long)]
    plot_data: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Relative gradient tolerance.
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, value_parser = parse_init)]
    init: Option<InitStrategy>,
}

fn parse_init(s: &str) -> Result<InitStrategy, String> {
    match s {
        "random" => Ok(InitStrategy::Random),
        "stratified" => Ok(InitStrategy::Stratified),
        _ => Err(format!(
            "unknown init strategy '{s}' (random or stratified)"
        )),
    }
}

impl Flags {
    fn manifest(&self, command: Command) -> Result<RunManifest, pipeline::PipelineError> {
        let mut m = match &self.manifest {
            Some(path) => RunManifest::load(path)?,
            None => RunManifest::new(command),
        };
        m.command = command;
        m.version = pipeline::ARTIFACT_VERSION.to_string();
        if let Some(v) = self.space {
            m.space = Some(v);
        }
        if let Some(v) = self.n {
            m.n = Some(v);
            m.n_list = None;
        }
        if let Some(v) = &self.n_list {
            m.n_list = Some(v.clone());
            m.n = None;
        }
        if let Some(v) = self.s {
            m.s = Some(v);
        }
        if let Some(v) = &self.s_schedule {
            m.s_schedule = Some(v.clone());
        }
        if let Some(v) = &self.weight {
            m.weight = Some(v.clone());
        }
        if let Some(v) = &self.density {
            m.density = Some(v.clone());
        }
        if let Some(v) = &self.regions {
            m.regions = Some(v.clone());
        }
        if let Some(v) = self.seed {
            m.seed = v;
        }
        if let Some(v) = self.probes {
            m.probes = Some(v);
        }
        if let Some(v) = &self.input {
            m.input = Some(v.clone());
        }
        if let Some(v) = &self.out {
            m.out = Some(v.clone());
        }
        m.plot_data |= self.plot_data;
        if let Some(v) = self.max_iters {
            m.optim.max_iters = v;
        }
        if let Some(v) = self.grad_tol {
            m.optim.grad_tolerance = v;
        }
        if let Some(v) = self.restarts {
            m.optim.restarts = v;
        }
        if let Some(v) = self.init {
            m.optim.strategy = v;
        }
        Ok(m)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_USAGE as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    let (command, flags) = match &cli.command {
        Cmd::Generate(f) => (Command::Generate, f),
        Cmd::Analyze(f) => (Command::Analyze, f),
        Cmd::Verify(f) => (Command::Verify, f),
        Cmd::Sweep(f) => (Command::Sweep, f),
        Cmd::DensityCheck(f) => (Command::DensityCheck, f),
    };
    if let Some(t) = flags.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot start {t} threads: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    let outcome = flags.manifest(command).and_then(|m| pipeline::run(&m));
    match outcome {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
