//! Operator commands. Every command prints a human summary by default or,
//! with `--json`, one JSON envelope on stdout:
//!
//! ```text
//! {"ok": true,  "command": "bench", "data": {...}}
//! {"ok": false, "command": "demo",  "data": {...}, "error": {"code": "...", "message": "..."}}
//! ```
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage or parse failure.

mod assets_cmd;
mod bench;
mod demo;
mod persona_cmd;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::assets::AssetKind;
use crate::providers::DelayRange;

#[derive(Debug, Parser)]
#[command(name = "synthpatient", version, about = "Synthetic patient encounters: personas, pipeline, gateway")]
pub struct Cli {
    /// Print one JSON envelope instead of human output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check and render patient profiles.
    #[command(subcommand)]
    Persona(PersonaCommand),
    /// Run a scripted conversation through the pipeline.
    Demo(DemoArgs),
    /// Measure per-stage latency over simulated turns.
    Bench(BenchArgs),
    /// Audit or populate the asset store.
    #[command(subcommand)]
    Assets(AssetsCommand),
    /// Host the HTTP/WebSocket gateway.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum PersonaCommand {
    /// Validate a profile document; issues print as `severity field_path message`.
    Validate { file: PathBuf },
    /// Print the assembled system prompt for a profile.
    RenderPrompt {
        file: PathBuf,
        /// Print only the prompt's content hash.
        #[arg(long)]
        hash: bool,
        /// Role-play instruction file (defaults to the bundled set).
        #[arg(long)]
        instructions: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
pub struct DemoArgs {
    /// Use the offline providers (no network, no credentials).
    #[arg(long)]
    pub offline: bool,
    /// Persona id.
    #[arg(long)]
    pub persona: String,
    /// One learner utterance per line.
    #[arg(long)]
    pub script: PathBuf,
    /// Directory of profile documents (defaults to the bundled personas).
    #[arg(long)]
    pub personas_dir: Option<PathBuf>,
    /// Asset store root (defaults to a fresh temporary store).
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Do not register stand-in base video and voice for the persona.
    #[arg(long)]
    pub no_placeholders: bool,
    /// Server config whose providers are used when `--offline` is absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Number of turns.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub turns: u32,
    /// Simulated lip-sync delay range in ms, `lo:hi`. Without it every
    /// provider runs offline.
    #[arg(long)]
    pub render_delay_ms: Option<DelayRange>,
    /// Seed for the simulated delays.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Persona id from the bundled set.
    #[arg(long, default_value = "maria-gonzalez")]
    pub persona: String,
}

#[derive(Debug, Subcommand)]
pub enum AssetsCommand {
    /// Re-hash every stored asset against the index.
    Fsck {
        #[arg(long)]
        store: PathBuf,
    },
    /// Register a base video or a voice descriptor.
    Register {
        /// `base_video` or `voice`.
        kind: AssetKind,
        file: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Declared id (base videos); defaults to the content hash.
        #[arg(long)]
        id: Option<String>,
        /// Base video length.
        #[arg(long)]
        duration_ms: Option<u64>,
        /// Whether the base video loops seamlessly.
        #[arg(long)]
        loopable: bool,
        /// Container name; defaults to the file extension.
        #[arg(long)]
        container: Option<String>,
    },
}

#[derive(Debug, clap::Args)]
pub struct ServeArgs {
    /// TOML config file; defaults run fully offline on 127.0.0.1:8080.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the bind address.
    #[arg(long)]
    pub bind: Option<String>,
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub exit: u8,
    pub data: Value,
    pub human: String,
    pub error: Option<(String, String)>,
}

impl Outcome {
    pub fn ok(data: Value, human: impl Into<String>) -> Self {
        Self {
            exit: 0,
            data,
            human: human.into(),
            error: None,
        }
    }

    /// Domain failure (exit 1).
    pub fn fail(code: &str, message: impl Into<String>) -> Self {
        Self {
            exit: 1,
            data: Value::Null,
            human: String::new(),
            error: Some((code.to_string(), message.into())),
        }
    }

    /// Usage or parse failure (exit 2).
    pub fn usage(code: &str, message: impl Into<String>) -> Self {
        Self {
            exit: 2,
            ..Self::fail(code, message)
        }
    }

    pub fn with_data(mut self, data: Value, human: impl Into<String>) -> Self {
        self.data = data;
        self.human = human.into();
        self
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Persona(PersonaCommand::Validate { .. }) => "persona validate",
        Command::Persona(PersonaCommand::RenderPrompt { .. }) => "persona render-prompt",
        Command::Demo(_) => "demo",
        Command::Bench(_) => "bench",
        Command::Assets(AssetsCommand::Fsck { .. }) => "assets fsck",
        Command::Assets(AssetsCommand::Register { .. }) => "assets register",
        Command::Serve(_) => "serve",
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .expect("tokio runtime")
}

pub fn execute(cli: Cli) -> Outcome {
    match cli.command {
        Command::Persona(PersonaCommand::Validate { file }) => persona_cmd::validate(&file),
        Command::Persona(PersonaCommand::RenderPrompt { file, hash, instructions }) => {
            persona_cmd::render_prompt(&file, hash, instructions.as_deref())
        }
        Command::Demo(args) => runtime().block_on(demo::run(args)),
        Command::Bench(args) => runtime().block_on(bench::run(args)),
        Command::Assets(AssetsCommand::Fsck { store }) => assets_cmd::fsck(&store),
        Command::Assets(AssetsCommand::Register {
            kind,
            file,
            store,
            id,
            duration_ms,
            loopable,
            container,
        }) => assets_cmd::register(kind, &file, &store, id, duration_ms, loopable, container),
        Command::Serve(args) => runtime().block_on(serve::run(args)),
    }
}

fn init_logging(serve: bool) {
    let default = if serve { "info" } else { "warn" };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

/// Parses arguments, runs the command and prints its outcome.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    init_logging(matches!(cli.command, Command::Serve(_)));
    let json = cli.json;
    let name = command_name(&cli.command);
    let outcome = execute(cli);
    if json {
        let mut env = json!({ "ok": outcome.exit == 0, "command": name, "data": outcome.data });
        if let Some((code, message)) = &outcome.error {
            env["error"] = json!({ "code": code, "message": message });
        }
        println!("{env}");
    } else {
        if !outcome.human.is_empty() {
            print!("{}", outcome.human);
            if !outcome.human.ends_with('\n') {
                println!();
            }
        }
        if let Some((code, message)) = &outcome.error {
            eprintln!("error: {code}: {message}");
        }
    }
    ExitCode::from(outcome.exit)
}
