//! Command-line front end for the `dadc` clustering pipeline.

pub mod config;
pub mod export;
pub mod run;

pub use config::{Cli, Command, GeneratorSpec, RunArgs, RunConfig, Task};
pub use run::{execute, CliError, Outcome};

/// Parses already-split arguments, runs the subcommand and returns its outcome.
pub fn run_args<I, S>(args: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    let (task, args) = cli.command.split();
    execute(&RunConfig::resolve(task, args)?)
}
