use clap::Parser;
use conebook::config::Command;
use conebook::{conventions, execute, Invocation};
use std::path::PathBuf;
use std::process::ExitCode;

/// Cone-field experiments on the open book of the three-sphere.
#[derive(Parser, Debug)]
#[command(name = "conebook", version)]
struct Cli {
    /// reach | prob | invariants | calabi | qstats | sde | recur | check-adapted
    #[arg(required_unless_present = "list_conventions")]
    command: Option<String>,

    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output path prefix (default: the command name).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Print conventions and reading choices, then exit.
    #[arg(long)]
    list_conventions: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_conventions {
        print!("{}", conventions::listing());
        return ExitCode::SUCCESS;
    }
    if let Ok(v) = std::env::var("CONEBOOK_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("conebook: could not size the worker pool: {e}");
                    return ExitCode::from(3);
                }
            }
            _ => {
                eprintln!("conebook: CONEBOOK_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(2);
            }
        }
    }
    let name = cli.command.expect("clap enforces the command");
    let command = match name.parse::<Command>() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("conebook: {e}");
            return ExitCode::from(2);
        }
    };
    let inv = Invocation { command, config_file: cli.config, overrides: cli.set, out: cli.out, seed: cli.seed };
    ExitCode::from(execute(&inv) as u8)
}
