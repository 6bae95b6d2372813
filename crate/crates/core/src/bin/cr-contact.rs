use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cr_contact::config::ProblemConfig;
use cr_contact::study::{field_dump, run_convergence_study, run_single, write_csv, write_csv_file};
use cr_contact::Error;

#[derive(Parser)]
#[command(
    name = "cr-contact",
    version,
    about = "Crouzeix-Raviart solver for frictional contact"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration (example-5.1, example-5.1-time)
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one refinement level
    Solve {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Write `mx my ux uy` per non-Dirichlet edge at the final time
        #[arg(long)]
        dump_fields: Option<PathBuf>,
        /// Write the mesh as `v`/`t`/`e` records
        #[arg(long)]
        dump_mesh: Option<PathBuf>,
    },
    /// Run the nested h/k convergence study
    Study {
        #[command(flatten)]
        source: Source,
        /// CSV output (defaults to `output.csv` from the config, else stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of levels
        #[arg(long)]
        levels: Option<usize>,
        /// Solve levels concurrently
        #[arg(long)]
        parallel: bool,
    },
    /// Print a built-in configuration as TOML
    Config {
        #[arg(long)]
        preset: String,
    },
}

enum Failure {
    Config(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::InvalidDomain(_)
            | Error::InvalidMesh(_)
            | Error::InvalidMaterial(_)
            | Error::InvalidParameter { .. } => Failure::Config(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn load(source: &Source) -> Result<ProblemConfig, Failure> {
    let cfg = match (&source.config, &source.preset) {
        (Some(path), _) => ProblemConfig::from_file(path)?,
        (None, Some(name)) => ProblemConfig::preset(name)?,
        (None, None) => {
            return Err(Failure::Config(
                "either --config or --preset is required".into(),
            ))
        }
    };
    Ok(cfg)
}

fn write(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Solver(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            source,
            level,
            dump_fields,
            dump_mesh,
        } => {
            let cfg = load(&source)?;
            let run = run_single(&cfg, level)?;
            println!("{}", run.summary());
            if let Some(path) = dump_fields.or(cfg.output.dump_fields.clone()) {
                write(&path, &field_dump(run.trajectory.final_displacement()))?;
            }
            if let Some(path) = dump_mesh {
                write(&path, &run.space().mesh().to_text())?;
            }
        }
        Command::Study {
            source,
            out,
            levels,
            parallel,
        } => {
            let mut cfg = load(&source)?;
            if let Some(l) = levels {
                cfg.mesh.levels = l;
            }
            cfg.study.parallel |= parallel;
            let result = run_convergence_study(&cfg)?;
            match out.or(cfg.output.csv.clone()) {
                Some(path) => {
                    write_csv_file(&path, &result.rows)?;
                    print!("{}", write_csv(&result.rows));
                }
                None => print!("{}", write_csv(&result.rows)),
            }
        }
        Command::Config { preset } => {
            print!("{}", ProblemConfig::preset(&preset)?.to_toml_string())
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            ExitCode::from(2)
        }
    }
}
