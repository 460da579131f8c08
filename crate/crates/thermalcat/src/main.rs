use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thermalcat::error::RunError;
use thermalcat::exec::execute;
use thermalcat::output::{write_run, DEFAULT_STEM};
use thermalcat::program::{parse_program, PulseProgram};
use thermalcat::sweep::{prepare, run_sweep};
use thermalcat::{ToleranceProfile, PROFILE_ENV};

#[derive(Parser)]
#[command(name = "thermalcat", about = "Run atom-cavity pulse programs", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a program and write its artifacts.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory (default: the program's `output.dir`, else `out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a program once per value of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dotted path of the parameter, e.g. `system.alpha` or `steps.3.lindblad.kappa`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        /// Sweep points run concurrently on this many threads.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Parse and validate a program without running it.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Print the version.
    Version,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    program: PathBuf,
    /// Reject unknown keys (`--strict false` downgrades them to warnings).
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
    strict: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load(common: &Common) -> Result<(String, PulseProgram), RunError> {
    let text = std::fs::read_to_string(&common.program)
        .map_err(|e| RunError::Parse(format!("cannot read {}: {e}", common.program.display())))?;
    let (program, warnings) = parse_program(&text, common.strict)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok((text, program))
}

fn profile() -> Result<ToleranceProfile, RunError> {
    ToleranceProfile::from_env().map_err(|e| RunError::Parse(format!("{PROFILE_ENV}: {e}")))
}

fn out_dir(flag: Option<PathBuf>, program: &PulseProgram) -> PathBuf {
    flag.or_else(|| program.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

fn dispatch(command: Command) -> Result<(), RunError> {
    match command {
        Command::Version => {
            println!("thermalcat {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
        Command::Validate { common } => {
            let (_, program) = load(&common)?;
            println!(
                "{}: ok, {} steps, {} mode(s)",
                common.program.display(),
                program.steps.len(),
                program.system.modes
            );
            Ok(())
        }
        Command::Run { common, out } => {
            let profile = profile()?;
            let (_, program) = load(&common)?;
            let start = Instant::now();
            let run = execute(&program, profile)?;
            let dir = out_dir(out, &program);
            let stem = program.output.name.as_deref().unwrap_or(DEFAULT_STEM);
            for path in write_run(&dir, stem, &run, start.elapsed())? {
                println!("{}", path.display());
            }
            for note in &run.summary.notes {
                eprintln!("note: {note}");
            }
            Ok(())
        }
        Command::Sweep { common, out, param, values, threads } => {
            let profile = profile()?;
            let (text, program) = load(&common)?;
            let template = prepare(&text, &param, &values, common.strict)?;
            let dir = out_dir(out, &program);
            let results = run_sweep(&template, &param, &values, &dir, common.strict, profile, threads)?;
            let failed = results.iter().filter(|r| r.outcome.is_err()).count();
            for r in &results {
                if let Err(f) = &r.outcome {
                    eprintln!("point {}: {}", r.value, f.message);
                }
            }
            println!("{}", Path::new(&dir).join("sweep.csv").display());
            println!("{} of {} points failed", failed, results.len());
            Ok(())
        }
    }
}
