mod args;
mod commands;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    /// Invalid arguments or configuration, exit code 2.
    Usage(String),
    /// Technique or frame not defined for the phase count, exit code 3.
    Unsupported(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Unsupported(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Unsupported(m) | CliError::Io(m) => m,
        }
    }
}

impl From<pwm_commutation::Error> for CliError {
    fn from(e: pwm_commutation::Error) -> Self {
        match e {
            pwm_commutation::Error::Unsupported(_) => CliError::Unsupported(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Duty(a) => commands::duty(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Report(a) => commands::report(&a),
        Command::Convert(a) => commands::convert(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pwmc: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
