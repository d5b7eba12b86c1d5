//! `ssiforge`: validate iStar models, report their SSI reading, export
//! diagrams and run credential-exchange simulations.
//!
//! Exit codes: 0 success, 1 the model or run has findings, 2 usage or I/O.

mod commands;
mod style;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ssiforge_core::dot::DotView;

#[derive(Parser)]
#[command(
    name = "ssiforge",
    version,
    about = "iStar goal models of SSI ecosystems, compiled into credential-exchanging agents"
)]
struct Cli {
    /// Output format for stdout
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a piStar model against the iStar 2.0 well-formedness rules
    Validate {
        /// piStar JSON model
        model: PathBuf,
    },
    /// Infer Issuer/Holder/Verifier roles, credential flows and SSI warnings
    Roles {
        model: PathBuf,
        /// JSON verb lexicon ({"issueVerbs": [..], "provideVerbs": [..], "checkVerbs": [..]})
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Exit 1 when there are warnings
        #[arg(long)]
        strict: bool,
    },
    /// Compile the model into agents and run the credential exchange
    Simulate(commands::SimulateArgs),
    /// Write a Graphviz view of the model
    Export {
        model: PathBuf,
        /// sd (strategic dependency) or sr (strategic rationale)
        #[arg(long, default_value = "sd")]
        view: DotView,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { model } => commands::validate(&model, cli.format),
        Command::Roles { model, lexicon, strict } => commands::roles(&model, lexicon.as_deref(), strict, cli.format),
        Command::Simulate(args) => commands::simulate(&args, cli.format),
        Command::Export { model, view, out } => commands::export(&model, view, out.as_deref()),
    };
    let status = match result {
        Ok(status) => status,
        Err(failure) => {
            eprintln!("{}", failure.message);
            failure.status
        }
    };
    ExitCode::from(status as u8)
}
