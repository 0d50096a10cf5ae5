use std::process::ExitCode;

use clap::Parser;
use dadc_cli::{execute, Cli, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (task, args) = cli.command.split();
    let result = RunConfig::resolve(task, args).and_then(|cfg| execute(&cfg));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for p in &outcome.written {
                println!("wrote: {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
