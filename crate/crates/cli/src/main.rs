use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlsgibbs::experiments::{fmt_float, run_experiment, ExperimentConfig, ExperimentKind, ResultRecord};
use nlsgibbs::torus::TorusGrid;
use nlsgibbs::variational::{minimize_a, minimize_b, LineGrid, MinimizationResult, SolverOptions};
use nlsgibbs::Error;

const DEFAULT_OUT: &str = "results";

#[derive(Debug, Parser)]
#[command(name = "nlsgibbs", version, about = "Ground states and Gibbs-measure experiments for the focusing NLS on a torus")]
struct Cli {
    /// Worker threads for parallel chains (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print every recorded value of every cell.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a constrained ground state and print its energy.
    Minimize(MinimizeArgs),
    /// Draw Gibbs samples and record basic observables.
    Sample(RunArgs),
    /// Phase scan of the soliton order parameter along beta.
    Scan(RunArgs),
    /// Concentration of typical samples in the supercritical regime.
    Concentration(RunArgs),
    /// Covariance of the rescaled field against the Ornstein-Uhlenbeck limit.
    Ou(RunArgs),
    /// Log partition function by thermodynamic integration, with drift bounds.
    Logz(RunArgs),
    /// Local mass tail of the free field.
    Tail(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DomainArg {
    Line,
    Torus,
}

#[derive(Debug, Args)]
struct MinimizeArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    mass: f64,
    #[arg(long, value_enum, default_value_t = DomainArg::Line)]
    domain: DomainArg,
    /// Half-width `R` of the line window `[-R, R]`.
    #[arg(long, default_value_t = 20.0)]
    half_width: f64,
    /// Torus length (only with `--domain torus`).
    #[arg(long, default_value_t = 16.0)]
    length: f64,
    #[arg(long, default_value_t = 2048)]
    points: usize,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iterations: usize,
    /// Directory for the profile CSV; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `output` from the config, else `results`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the master seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    force: bool,
}

/// Everything that determines a run besides the configuration file contents.
struct RunManifest {
    kind: ExperimentKind,
    config_path: PathBuf,
    out_dir: PathBuf,
    seed: u64,
    threads: Option<usize>,
}

impl RunManifest {
    fn describe(&self) -> String {
        let threads = self.threads.map_or_else(|| "all".to_string(), |n| n.to_string());
        format!(
            "{} from {} (seed {}, threads {threads}) -> {}",
            self.kind.name(),
            self.config_path.display(),
            self.seed,
            self.out_dir.display()
        )
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Solver(String),
    Tainted(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Tainted(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Solver(m) | Failure::Tainted(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::Io { .. } => Failure::Usage(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match with_threads(cli.threads, || dispatch(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> Result<T, Failure> + Send) -> Result<T, Failure> {
    match threads {
        None => job(),
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Usage(format!("cannot start {n} threads: {e}")))?
            .install(job),
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let (args, kind) = match &cli.command {
        Command::Minimize(args) => return minimize(args),
        Command::Sample(a) => (a, ExperimentKind::Sample),
        Command::Scan(a) => (a, ExperimentKind::PhaseScan),
        Command::Concentration(a) => (a, ExperimentKind::Concentration),
        Command::Ou(a) => (a, ExperimentKind::Ou),
        Command::Logz(a) => (a, ExperimentKind::Logz),
        Command::Tail(a) => (a, ExperimentKind::Tail),
    };
    run(args, kind, cli)
}

fn minimize(args: &MinimizeArgs) -> Result<(), Failure> {
    let opts = SolverOptions {
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        ..SolverOptions::default()
    };
    let profile_path = args.out.as_ref().map(|dir| dir.join("minimize_profile.csv"));
    if let Some(path) = &profile_path {
        refuse_overwrite(path, args.force)?;
    }
    let (label, result) = match args.domain {
        DomainArg::Line => {
            let grid = LineGrid::new(args.half_width, args.points)?;
            ("A", minimize_a(args.p, args.beta, args.mass, grid, &opts)?)
        }
        DomainArg::Torus => {
            let grid = TorusGrid::new(args.length, args.points)?;
            ("B", minimize_b(args.p, args.beta, args.mass, grid, &opts)?)
        }
    };
    println!("{label} = {}", fmt_float(result.energy));
    println!("lambda = {}", fmt_float(result.profile.multiplier));
    println!("iterations = {}", result.iterations);
    println!("residual = {}", fmt_float(result.gradient_norm));
    if let Some(path) = profile_path {
        write_file(&path, &profile_csv(args, &result))?;
        println!("profile written to {}", path.display());
    }
    Ok(())
}

fn profile_csv(args: &MinimizeArgs, result: &MinimizationResult) -> String {
    let mut out = format!("# nlsgibbs {}\n", env!("CARGO_PKG_VERSION"));
    out.push_str(&format!("# domain = {:?}\n", args.domain).to_lowercase());
    for (k, v) in [
        ("p", args.p),
        ("beta", args.beta),
        ("mass", args.mass),
        ("energy", result.energy),
        ("lambda", result.profile.multiplier),
    ] {
        out.push_str(&format!("# {k} = {}\n", fmt_float(v)));
    }
    out.push_str("x,Q\n");
    let positions = result.profile.domain.positions();
    for (x, q) in positions.iter().zip(&result.profile.values) {
        out.push_str(&format!("{},{}\n", fmt_float(*x), fmt_float(*q)));
    }
    out
}

fn run(args: &RunArgs, kind: ExperimentKind, cli: &Cli) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = ExperimentConfig::from_toml_str(&text)?;
    if config.experiment != kind {
        return Err(Failure::Usage(format!(
            "{} describes a `{}` experiment, not `{}`",
            args.config.display(),
            config.experiment.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    let manifest = RunManifest {
        kind,
        config_path: args.config.clone(),
        out_dir: args
            .out
            .clone()
            .or_else(|| config.output.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        seed: config.seed,
        threads: cli.threads,
    };
    if cli.verbose {
        eprintln!("{}", manifest.describe());
    }
    let json_path = manifest.out_dir.join(format!("{}.json", kind.name()));
    let csv_path = manifest.out_dir.join(format!("{}.csv", kind.name()));
    refuse_overwrite(&json_path, args.force)?;
    refuse_overwrite(&csv_path, args.force)?;

    let record = run_experiment(&config)?;
    write_file(&json_path, &record.to_json()?)?;
    write_file(&csv_path, &record.to_csv()?)?;
    report(&record, cli.verbose);
    println!("wrote {} and {}", json_path.display(), csv_path.display());

    let failed = record.failed_cells();
    if failed > 0 {
        return Err(Failure::Solver(format!("{failed} of {} cells failed", record.cells.len())));
    }
    if record.tainted {
        return Err(Failure::Tainted("at least one chain has too few effective samples".into()));
    }
    Ok(())
}

fn report(record: &ResultRecord, verbose: bool) {
    for cell in &record.cells {
        let params = cell
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ");
        let status = match (&cell.error, cell.tainted) {
            (Some(e), _) => format!("error: {e}"),
            (None, true) => "tainted".to_string(),
            (None, false) => "ok".to_string(),
        };
        println!("cell {:>3} [{params}] {} values, {status}", cell.index, cell.values.len());
        if verbose {
            for (k, v) in &cell.values {
                println!("    {k} = {}", fmt_float(*v));
            }
        }
    }
    for (k, v) in &record.summary {
        println!("{k} = {}", fmt_float(*v));
    }
    for w in &record.warnings {
        println!("warning: {w}");
    }
}

fn refuse_overwrite(path: &Path, force: bool) -> Result<(), Failure> {
    if path.exists() && !force {
        Err(Failure::Usage(format!("{} exists; pass --force to overwrite", path.display())))
    } else {
        Ok(())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Solver(format!("cannot write {}: {e}", path.display())))
}
