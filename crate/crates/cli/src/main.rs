mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let name = cli.command.name();
    let verbose = cli.command.verbosity();
    let start = std::time::Instant::now();
    match commands::run(cli.command) {
        Ok(()) => {
            if verbose > 0 {
                eprintln!("{name} finished in {:.3}s", start.elapsed().as_secs_f64());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            if matches!(e, error::CliError::Usage(_)) {
                if let Some(sub) = Cli::command().find_subcommand_mut(name) {
                    let mut sub = sub.clone().bin_name(format!("fringelab {name}"));
                    eprintln!("\n{}\nRun 'fringelab {name} --help' for every option.", sub.render_usage());
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
