//! `quatdyn`: simulate quaternion ODEs and run the structural checks from the
//! command line.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// A failure together with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INTEGRATION: u8 = 3;
pub const EXIT_IDENTITY: u8 = 4;
pub const EXIT_SEARCH: u8 = 5;

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_CONFIG, error: error.into() }
    }
}

impl From<quatdyn::Error> for Failure {
    fn from(e: quatdyn::Error) -> Self {
        use quatdyn::Error::*;
        let code = match &e {
            StepSizeUnderflow { .. } | NonFiniteRhs { .. } | QuadratureFailure(_) => EXIT_INTEGRATION,
            NoBracket(_) => EXIT_SEARCH,
            _ => EXIT_CONFIG,
        };
        Failure { code, error: e.into() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::config(e)
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("QUATDYN_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::config(anyhow::anyhow!("QUATDYN_THREADS must be a positive integer, got '{raw}'")))?;
    if n == 0 {
        return Err(Failure::config(anyhow::anyhow!("QUATDYN_THREADS must be at least 1")));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(Failure::config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| commands::run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
