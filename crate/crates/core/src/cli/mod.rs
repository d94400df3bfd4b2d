//! The `numina` command-line tool.
//!
//! Exit codes: 0 success, 2 configuration error, 3 input error, 4 generation
//! shortfall, 5 self-check failure. Diagnostics go to a JSON Lines log under
//! `<out>/logs/`; standard output carries a short human summary.

mod commands;
mod config;

pub use config::PipelineConfig;

use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::sync::{Mutex, Once};

#[derive(Debug, Parser)]
#[command(name = "numina", version, about = "Scene ground truth, QA generation and scoring")]
struct Cli {
    /// Pipeline config file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Use the offline synthesizing stub instead of the rewrite service.
    #[arg(long, global = true)]
    stub_llm: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic scenes, their analytic truth and sample SAQs.
    Synth,
    /// Compute NGT tables for every configured scene.
    Extract,
    /// Generate the QA dataset from NGT tables (and SAQ rewrites if enabled).
    Generate,
    /// Score a prediction file against a dataset.
    Score {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Check that a dataset scores perfectly against itself and is balanced.
    Selfcheck {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub(crate) enum CliError {
    Config(String),
    Input(String),
    Shortfall(String),
    SelfCheck(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Shortfall(_) => 4,
            CliError::SelfCheck(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Input(m) | CliError::Shortfall(m) | CliError::SelfCheck(m) => m,
        }
    }
}

static LOG_FILE: Mutex<Option<File>> = Mutex::new(None);
static LOG_INIT: Once = Once::new();

struct LogSink;

impl Write for LogSink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match LOG_FILE.lock().map(|mut g| g.as_mut().map(|f| f.write_all(buf))) {
            Ok(Some(r)) => r.map(|_| buf.len()),
            _ => Ok(buf.len()),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Routes tracing output for this run to `<out>/logs/<command>.jsonl`.
fn open_log(cfg: &PipelineConfig, command: &str) {
    LOG_INIT.call_once(|| {
        let _ = tracing_subscriber::fmt()
            .json()
            .with_max_level(tracing::Level::INFO)
            .with_writer(|| LogSink)
            .try_init();
    });
    let dir = cfg.out.join("logs");
    let file = std::fs::create_dir_all(&dir).and_then(|_| File::create(dir.join(format!("{command}.jsonl"))));
    if let Ok(mut g) = LOG_FILE.lock() {
        *g = file.ok();
    }
}

fn close_log() {
    if let Ok(mut g) = LOG_FILE.lock() {
        *g = None;
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut cfg = match &cli.config {
        Some(path) => match PipelineConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        },
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: config: {e}");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: worker pool: {e}");
            return 2;
        }
    };

    let name = match &cli.command {
        Command::Synth => "synth",
        Command::Extract => "extract",
        Command::Generate => "generate",
        Command::Score { .. } => "score",
        Command::Selfcheck { .. } => "selfcheck",
    };
    open_log(&cfg, name);
    tracing::info!(command = name, seed = cfg.seed, "start");
    let result = pool.install(|| match &cli.command {
        Command::Synth => commands::synth(&cfg),
        Command::Extract => commands::extract(&cfg),
        Command::Generate => commands::generate(&cfg, cli.stub_llm),
        Command::Score { dataset, predictions } => commands::score(&cfg, dataset.as_deref(), predictions),
        Command::Selfcheck { dataset } => commands::selfcheck(&cfg, dataset.as_deref()),
    });
    let code = match result {
        Ok(()) => {
            tracing::info!(command = name, "done");
            0
        }
        Err(e) => {
            tracing::error!(command = name, code = e.code(), error = e.message(), "failed");
            eprintln!("error: {}", e.message());
            e.code()
        }
    };
    close_log();
    code
}
