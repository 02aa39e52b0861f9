use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pipeflow::io::{
    compare_output_dirs, emit_csv, hyperbolicity_map, load_config, preset_scenario, write_comparison,
    write_hyperbolicity_map, ScenarioConfig,
};
use pipeflow::parallel::configure_threads;
use pipeflow::{run, Error, Execution, Result};

const THREADS_VAR: &str = "PIPEFLOW_THREADS";

/// Two-layer water/air transients in closed circular pipes.
#[derive(Parser)]
#[command(name = "pipeflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write snapshots.csv and probes.csv.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory.
        #[arg(long, default_value = "pipeflow-out")]
        out: PathBuf,
    },
    /// Compare the probe series of two output directories (A against B).
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Dump the hyperbolicity map of the scenario's section and air density.
    Eigen {
        #[command(flatten)]
        source: Source,
        /// Write the map here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of water fill fractions.
        #[arg(long, default_value_t = 19)]
        fills: usize,
        /// Number of water velocities.
        #[arg(long, default_value_t = 41)]
        velocities: usize,
        /// Largest water velocity magnitude, m/s.
        #[arg(long, default_value_t = 5.0)]
        max_velocity: f64,
    },
    /// Print a built-in scenario as configuration text.
    Preset { name: String },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Configuration file.
    config: Option<PathBuf>,
    /// Built-in scenario instead of a file.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<ScenarioConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => load_config(path),
            (None, Some(name)) => preset_scenario(name),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_output(target: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match target {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path).map_err(io_error(path))?);
            write(&mut file)?;
            file.flush().map_err(io_error(path))
        }
        None => write(&mut io::stdout().lock()),
    }
}

fn threads_from_env() -> Result<()> {
    match std::env::var(THREADS_VAR) {
        Ok(value) => {
            let n: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_VAR} = `{value}` is not a positive integer")))?;
            configure_threads(n)
        }
        Err(_) => Ok(()),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { source, out } => {
            threads_from_env()?;
            let config = source.load()?;
            let scenario = config.scenario(Execution::Parallel)?;
            let output = run(&scenario)?;
            let files = emit_csv(&output.snapshots, &scenario.mesh, &scenario.model, &config.probes, &out)?;
            let s = &output.summary;
            println!(
                "{} steps to t = {} s; wrote {} and {}",
                s.steps,
                s.t_final,
                files.snapshots.display(),
                files.probes.display()
            );
            if !s.pressurization_events.is_empty() {
                eprintln!("warning: {} pressurization events clamped", s.pressurization_events.len());
            }
            Ok(())
        }
        Command::Compare { dir_a, dir_b, report } => {
            let comparison = compare_output_dirs(&dir_a, &dir_b)?;
            write_output(report.as_deref(), |w| write_comparison(w, &comparison))
        }
        Command::Eigen {
            source,
            out,
            fills,
            velocities,
            max_velocity,
        } => {
            let config = source.load()?;
            let samples = hyperbolicity_map(&config, fills, velocities, max_velocity)?;
            write_output(out.as_deref(), |w| write_hyperbolicity_map(w, &samples))
        }
        Command::Preset { name } => {
            print!("{}", preset_scenario(&name)?.to_config_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
