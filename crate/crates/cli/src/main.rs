mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Growth exponents, orbit classification and experiment reports for
/// self-adjoint matrix Lie algebras.
#[derive(Parser, Debug)]
#[command(name = "orbitgrowth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in algebras and their named vectors.
    Catalog,
    /// Structure of an algebra: Cartan split, center, Killing form.
    Analyze(AlgebraArgs),
    /// Growth exponents, Hilbert-Mumford value and minimality of a vector.
    Growth(VectorArgs),
    /// Bounded / closed / not-closed classification of the orbit of a vector.
    Classify(VectorArgs),
    /// Run an experiment and write its report.
    Experiment(ExperimentArgs),
    /// Re-run a JSON report from its embedded config and compare payloads.
    Replay {
        report: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    /// `key = value` config file (dotted keys, `#` comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Config override, e.g. `--set growth.restarts=32`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed; without it $ORBITGROWTH_SEED, then the config file, decide.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the JSON output to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write CSV rows (experiments only) to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AlgebraArgs {
    /// Catalog name or path to an `alg_v1` JSON file.
    #[arg(long)]
    algebra: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct VectorArgs {
    #[arg(long)]
    algebra: String,
    /// Comma-separated reals, a catalog vector name, or terms like `E23-E32`.
    #[arg(long, allow_hyphen_values = true)]
    vector: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// thm81, cor87, lemma95, appendix1 or prop91-94.
    name: String,
    #[arg(long)]
    algebra: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    vector: Option<String>,
    /// Values of N for appendix1, comma-separated.
    #[arg(long = "N", value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
    /// Largest s for appendix1.
    #[arg(long)]
    smax: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

/// Process exit status.
pub enum Outcome {
    Ok,
    ExperimentFailed,
}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_EXPERIMENT: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = orbitgrowth::catalog::self_test() {
        eprintln!("error: catalog self-test failed: {e}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    match commands::run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ExperimentFailed) => ExitCode::from(EXIT_EXPERIMENT),
        Err(e) => match e.downcast_ref::<orbitgrowth::Error>() {
            Some(lib) => {
                eprintln!("error: {}: {lib}", lib.kind());
                ExitCode::from(EXIT_VALIDATION)
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_USAGE)
            }
        },
    }
}
