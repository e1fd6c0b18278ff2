use std::process::ExitCode;

use clap::Parser;
use susy_ep_cli::args::Cli;
use susy_ep_cli::{execute, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            return fail(CliError::Usage {
                reason: e.render().to_string().trim().to_string(),
            });
        }
    };
    match cli.into_config().and_then(|cfg| execute(&cfg)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}
