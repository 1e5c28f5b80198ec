use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use pcs_cli::args::Cli;
use pcs_cli::exit;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PCS_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let command = Cli::command().after_help(exit::help_text());
    let cli = match command.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::SUCCESS });
        }
    };

    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    ExitCode::from(pcs_cli::run(cli, &mut stdout.lock(), &mut stderr.lock()))
}
