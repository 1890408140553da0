use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rkr_cli::args::{Cli, Format};
use rkr_cli::error::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match rkr_cli::run(&cli) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            context: format!("writing {}", path.display()),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                context: "writing stdout".into(),
                source,
            }),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
