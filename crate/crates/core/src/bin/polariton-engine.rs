use clap::Parser;
use polariton::cli::{self, Invocation, EXIT_OK, EXIT_VALIDATION};
use polariton::config::{self, Command};
use std::path::PathBuf;

/// Linear and pump-probe spectra of vibrational polaritons.
///
/// Commands: linear, transient, sweep, dispersion, tmm, fit.
/// `schema` prints the JSON schema of the config file.
#[derive(Parser, Debug)]
#[command(name = "polariton-engine", version)]
struct Args {
    /// Command to run.
    command: String,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set qm.f_pu=0.1` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides config and POLARITON_ENGINE_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized multi-start fits.
    #[arg(long)]
    seed: Option<u64>,
    /// Only load and validate the configuration.
    #[arg(long)]
    validate_only: bool,
}

fn main() {
    let args = Args::parse();
    if args.command == "schema" {
        let schema = serde_json::to_string_pretty(&config::schema()).expect("schema serializes");
        println!("{schema}");
        std::process::exit(EXIT_OK);
    }
    let command: Command = match args.command.parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(EXIT_VALIDATION);
        }
    };
    let Some(config) = args.config else {
        eprintln!("error: --config is required for `{command}`");
        std::process::exit(EXIT_VALIDATION);
    };
    let inv = Invocation {
        command,
        config,
        overrides: args.overrides,
        out: args.out,
        seed: args.seed,
        validate_only: args.validate_only,
    };
    let code = cli::run(&inv, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
