//! `httpdsl`: validate, run, generate, export blocks for and format `.http`
//! description files.
//!
//! Exit codes: 0 success, 1 domain failure (Failure branch, check failure,
//! name collisions), 2 usage, parse or I/O error, 3 transport error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "httpdsl", version, about = "Tooling for .http request description files")]
struct Cli {
    /// More log output; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and check files or directories; print diagnostics.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Execute one message.
    Run(RunArgs),
    /// Generate a client project.
    Generate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "rust")]
        dialect: String,
        /// Print the emit report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Export a block palette manifest.
    Blocks {
        paths: Vec<PathBuf>,
        /// Manifest file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Palette name; defaults to the output file stem.
        #[arg(long)]
        name: Option<String>,
        /// Put the four generic REST blocks first.
        #[arg(long)]
        with_rest_prelude: bool,
    },
    /// Rewrite files in canonical form.
    Fmt {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Report non-canonical files without writing.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    file: PathBuf,
    message: String,
    /// Input variable binding, `name=value`; repeatable.
    #[arg(long = "input", value_name = "NAME=VALUE", value_parser = parse_input)]
    inputs: Vec<(String, String)>,
    /// Environment variable override, `NAME=VALUE`; repeatable. Other
    /// environment variables come from the process environment.
    #[arg(long = "env", value_name = "NAME=VALUE", value_parser = parse_pair)]
    env: Vec<(String, String)>,
    /// `tcp` (default) or `mock:<script.json>`.
    #[arg(long, default_value = "tcp")]
    transport: String,
    /// Print the full response object as JSON.
    #[arg(long)]
    json: bool,
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    if k.is_empty() {
        return Err(format!("empty name in `{s}`"));
    }
    Ok((k.to_string(), v.to_string()))
}

fn parse_input(s: &str) -> Result<(String, String), String> {
    let (k, v) = parse_pair(s)?;
    if !httpdsl::model::is_identifier(&k) {
        return Err(format!("`{k}` is not a valid input variable name"));
    }
    Ok((k, v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_target(false)
        .format_timestamp(None)
        .init();

    let code = match cli.command {
        Command::Validate { paths } => commands::validate(&paths),
        Command::Run(a) => commands::run(commands::RunOptions {
            file: a.file,
            message: a.message,
            inputs: a.inputs,
            env: a.env,
            transport: a.transport,
            json: a.json,
        }),
        Command::Generate {
            paths,
            out,
            dialect,
            json,
        } => commands::generate(&paths, &out, &dialect, json),
        Command::Blocks {
            paths,
            out,
            name,
            with_rest_prelude,
        } => commands::blocks(&paths, out.as_deref(), name, with_rest_prelude),
        Command::Fmt { paths, check } => commands::fmt(&paths, check),
    };
    ExitCode::from(code)
}
