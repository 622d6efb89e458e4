//! `twophase`: run simulations, the benchmark campaign, and property checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use twophase_core::bench::{self, run_bench};
use twophase_core::io::{parse_par_list, write_contour_csv, write_run_report, write_snapshot};
use twophase_core::solver::run_simulation;
use twophase_core::validate::{run_suite, Suite};
use twophase_core::{Backend, BackendConfig, Error, ErrorKind};

/// Overrides the default output directory (`<par_list dir>/output`).
const OUTPUT_ENV: &str = "TWOPHASE_OUTPUT_DIR";

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_VALIDATION: u8 = 5;

#[derive(Parser)]
#[command(name = "twophase", version, about = "Two-phase depth-averaged debris-flow simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by a par_list file.
    Run {
        par_list: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
        /// Output directory (beats `out_dir` in the par_list).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Time a fixed number of steps on synthetic incline releases.
    Bench {
        /// Comma-separated mesh counts.
        #[arg(long, value_delimiter = ',', default_values_t = bench::DEFAULT_MESHES)]
        meshes: Vec<usize>,
        #[arg(long, default_value_t = bench::DEFAULT_STEPS)]
        steps: usize,
        #[arg(long, default_value_t = bench::DEFAULT_REPEATS)]
        repeats: usize,
        /// Lane counts for the data-parallel backend (default: all cores).
        #[arg(long, value_delimiter = ',')]
        lanes: Vec<usize>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run built-in property scenarios.
    Validate {
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        backend: BackendArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendChoice {
    Serial,
    Parallel,
}

#[derive(Args)]
struct BackendArgs {
    #[arg(long, value_enum, default_value = "parallel")]
    backend: BackendChoice,
    /// Worker lanes (default: all cores).
    #[arg(long)]
    lanes: Option<usize>,
    /// Cells per work unit.
    #[arg(long, default_value_t = twophase_core::parallel::DEFAULT_CHUNK)]
    chunk: usize,
}

impl BackendArgs {
    fn build(&self) -> Result<Backend, Error> {
        let cfg = match self.backend {
            BackendChoice::Serial => BackendConfig::serial(),
            BackendChoice::Parallel => BackendConfig::parallel(self.lanes.unwrap_or_else(default_lanes)),
        };
        Backend::new(cfg.with_chunk(self.chunk))
    }
}

fn default_lanes() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

enum Failure {
    Error(Error),
    Validation(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            par_list,
            backend,
            out_dir,
        } => cmd_run(&par_list, &backend, out_dir),
        Command::Bench {
            meshes,
            steps,
            repeats,
            lanes,
            output,
        } => cmd_bench(&meshes, steps, repeats, &lanes, output.as_deref()),
        Command::Validate { suite, backend } => cmd_validate(&suite, &backend),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(n)) => {
            eprintln!("error: {n} check(s) failed");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Io => EXIT_IO,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            })
        }
    }
}

fn output_dir(flag: Option<PathBuf>, from_par_list: Option<PathBuf>, par_list: &Path) -> PathBuf {
    flag.or(from_par_list)
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| par_list.parent().unwrap_or(Path::new(".")).join("output"))
}

fn cmd_run(par_list: &Path, backend: &BackendArgs, out_dir: Option<PathBuf>) -> Result<(), Failure> {
    let config = parse_par_list(par_list)?;
    let out = output_dir(out_dir, config.out_dir.clone(), par_list);
    let backend = backend.build()?;
    eprintln!(
        "running {} to t = {} s ({} backend, {} lanes) -> {}",
        par_list.display(),
        config.t_end,
        backend.config().kind,
        backend.config().lanes,
        out.display()
    );
    let report = run_simulation(&config, backend, |snap, header| {
        write_snapshot(snap, header, &out)?;
        write_contour_csv(snap, header, &out)?;
        eprintln!("  t = {:>10.3} s  step {}", snap.t, snap.step_index);
        Ok(())
    })?;
    let path = write_run_report(&report, &out)?;
    println!(
        "steps {}  wall {:.3} s  mass audit {:.3e} m3  clipped {:.3e} m3  report {}",
        report.steps,
        report.wall_seconds,
        report.mass_audit,
        report.clipped_total,
        path.display()
    );
    Ok(())
}

fn cmd_bench(
    meshes: &[usize],
    steps: usize,
    repeats: usize,
    lanes: &[usize],
    output: Option<&Path>,
) -> Result<(), Failure> {
    let lanes = if lanes.is_empty() { vec![default_lanes()] } else { lanes.to_vec() };
    let backends: Vec<BackendConfig> = lanes.iter().map(|&n| BackendConfig::parallel(n)).collect();
    let report = run_bench(meshes, steps, repeats, &backends, |t| {
        eprintln!(
            "  {:>8} cells  {:<8} lanes {:>3}  {:.3} s",
            t.cells, t.backend, t.lanes, t.seconds
        );
    })?;
    let csv = report.to_csv();
    match output {
        Some(path) => fs::write(path, csv).map_err(|e| Error::io(path, e))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_validate(suite: &str, backend: &BackendArgs) -> Result<(), Failure> {
    let suite: Suite = suite.parse()?;
    let backend = backend.build()?;
    let results = run_suite(suite, &backend)?;
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure::Validation(failed));
    }
    Ok(())
}
