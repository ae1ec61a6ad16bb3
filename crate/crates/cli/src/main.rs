//! `finslab`: command-line front end for finsler-lab.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad configuration or input
//! file, 3 numerical failure.

mod bench;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finsler_lab::{Error, Result};

use crate::bench::Suite;
use crate::config::Params;
use crate::output::Run;

#[derive(Parser, Debug)]
#[command(name = "finslab", version, about = "Polyhedral Finsler norms, shielding and lattice growth schemes")]
struct Cli {
    /// TOML config: top-level keys, overridden by a table named after the
    /// command (`[bench.ordering]` for `bench ordering`).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override one key, e.g. `--set eps=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Seed for every sampled quantity; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory. Defaults to `<root>/<command>`.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    /// Root for default output directories.
    #[arg(long, env = "FINSLAB_OUT_ROOT", default_value = "finslab-out", global = true)]
    root: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dual-ball vertices, sampled gauge values and subdifferential face dimensions.
    Norms,
    /// Verify the mollified shielding gauge on an annulus.
    Shield,
    /// Run the lattice growth scheme and write snapshots.
    Simulate,
    /// Run one verification suite.
    Bench {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Planar direction analysis of the dual ball.
    Twod,
}

impl Command {
    fn path(&self) -> Vec<&'static str> {
        match self {
            Command::Norms => vec!["norms"],
            Command::Shield => vec!["shield"],
            Command::Simulate => vec!["simulate"],
            Command::Bench { suite } => vec!["bench", suite.name()],
            Command::Twod => vec!["twod"],
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let path = cli.command.path();
    let mut params = Params::load(cli.config.as_deref(), &path, &cli.set)?;
    if let Some(s) = cli.seed {
        params.insert("seed", toml::Value::Integer(s as i64));
    }
    let seed = params.u64("seed", 0)?;
    let dir = cli.out.clone().unwrap_or_else(|| cli.root.join(path.join("-")));
    let mut run = Run::new(dir, &path.join(" "), seed)?;
    let passed = match &cli.command {
        Command::Norms => commands::norms(&params, &mut run)?,
        Command::Shield => commands::shield(&params, &mut run)?,
        Command::Simulate => commands::simulate(&params, &mut run)?,
        Command::Bench { suite } => bench::run_suite(*suite, &params, &mut run)?,
        Command::Twod => bench::write_reports(&bench::twod(&params)?, &mut run)?,
    };
    let manifest = run.finish(params.echo())?;
    println!("manifest: {}", manifest.display());
    Ok(passed)
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config() || matches!(e, Error::Io(_) | Error::Csv(_)) {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("finslab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_distinct_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 2);
        assert_eq!(exit_code(&Error::NumericAbort("x".into())), 3);
        assert_eq!(exit_code(&Error::Bracket("x".into())), 3);
        assert_eq!(exit_code(&Error::Quadrature("x".into())), 3);
    }
}
