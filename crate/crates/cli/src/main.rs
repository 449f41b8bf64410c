use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wcop::report::{self, exit_code_for, Command, Format};
use wcop::scenario::{parse_scenarios, Scenario};
use wcop::Error;

/// Boundedness, compactness and essential-norm estimates for weighted
/// composition operators between Hardy spaces.
#[derive(Parser)]
#[command(name = "wcop", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Boundedness verdict, essential-norm bracket and diagnostics.
    Analyze(Common),
    /// Boundedness test for the regime of (p, q) only.
    Boundedness(Common),
    /// Essential-norm bracket; exits 1 when the operator is unbounded.
    Essnorm(Common),
    /// Carleson-measure classification of the pullback measure.
    Carleson(Common),
    /// H^2 matrix truncation and its essential-norm bracket.
    Truncate(Common),
    /// Analyze many scenarios in parallel and merge the reports.
    Sweep(Common),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Scenario file. `sweep` accepts several, and directories.
    #[arg(long, required = true)]
    scenario: Vec<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base boundary grid size (power of two).
    #[arg(long)]
    grid: Option<usize>,
    /// Last kernel ring 1 - 2^-k.
    #[arg(long)]
    depth: Option<u32>,
    /// Stolz and Carleson window aperture.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutFormat,
}

#[derive(Args)]
struct SelftestArgs {
    /// Criterion numbers to run, e.g. `--only 1,4`.
    #[arg(long, value_delimiter = ',')]
    only: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn scenario_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Error> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            entries.retain(|p| p.is_file());
            entries.sort();
            files.extend(entries);
        } else {
            files.push(path.clone());
        }
    }
    Ok(files)
}

fn load(path: &Path) -> Result<Vec<Scenario>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_scenarios(&text).map_err(|e| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn run_common(command: Command, args: &Common) -> Result<i32, Error> {
    let mut scenarios = Vec::new();
    for file in scenario_files(&args.scenario)? {
        scenarios.extend(load(&file)?);
    }
    for s in &mut scenarios {
        if args.grid.is_some() {
            s.overrides.grid = args.grid;
        }
        if args.depth.is_some() {
            s.overrides.depth = args.depth;
        }
        if args.alpha.is_some() {
            s.overrides.alpha = args.alpha;
        }
    }
    let format = match args.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
    };
    report::run(command, &scenarios, format, args.out.as_deref())
}

fn run_selftest(args: &SelftestArgs) -> Result<i32, Error> {
    let only = (!args.only.is_empty()).then_some(args.only.as_slice());
    let r = report::selftest(only);
    for c in &r.criteria {
        eprintln!("{} {:>2} {} ({:.2} s)", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.seconds);
    }
    let json = report::to_json(&r)?;
    match &args.out {
        Some(path) => std::fs::write(path, json)?,
        None => print!("{json}"),
    }
    Ok(if r.failed == 0 { 0 } else { 1 })
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("WCOP_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("WCOP_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Cmd::Analyze(a) => run_common(Command::Analyze, a),
        Cmd::Boundedness(a) => run_common(Command::Boundedness, a),
        Cmd::Essnorm(a) => run_common(Command::Essnorm, a),
        Cmd::Carleson(a) => run_common(Command::Carleson, a),
        Cmd::Truncate(a) => run_common(Command::Truncate, a),
        Cmd::Sweep(a) => run_common(Command::Sweep, a),
        Cmd::Selftest(a) => run_selftest(a),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
