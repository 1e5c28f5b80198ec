use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcs_core::Mode;

#[derive(Debug, Parser)]
#[command(name = "pcs", version)]
#[command(about = "Guess the landmark patent behind a patent search from its citation spectrum")]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect or empty the on-disk response cache
    Cache {
        #[command(subcommand)]
        action: CacheAction,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// List the bundled fixtures and the query each one answers
    Fixtures {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CacheAction {
    /// One line per entry: key, query, creation time, patent count
    List,
    /// Delete every entry
    Clear,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Full JSON report
    #[default]
    Report,
    /// Per-year CSV table
    Table,
}

/// Settings shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML settings file
    #[arg(long, env = "PCS_CONFIG")]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub cache_dir: Option<PathBuf>,

    /// Directory holding named fixtures
    #[arg(long)]
    pub fixture_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Comma-separated keywords and "quoted phrases"
    #[arg(short, long, env = "PCS_QUERY", required_unless_present = "fixture")]
    pub query: Option<String>,

    /// Answer from a recorded fixture instead of the API
    #[arg(short, long, env = "PCS_FIXTURE")]
    pub fixture: Option<String>,

    /// pcs ranks years by normalized score, rpys by raw deviation
    #[arg(short, long, env = "PCS_MODE", default_value = "pcs")]
    pub mode: Mode,

    #[arg(long)]
    pub base_url: Option<String>,

    /// API dialect name
    #[arg(long)]
    pub dialect: Option<String>,

    /// Always fetch, and do not store the result
    #[arg(long)]
    pub no_cache: bool,

    /// Write to this file instead of stdout
    #[arg(short, long, env = "PCS_OUTPUT")]
    pub output: Option<PathBuf>,

    #[arg(long, env = "PCS_FORMAT", value_enum, default_value_t = Format::Report)]
    pub format: Format,

    /// Leave out timestamps and timings so reruns are byte-identical
    #[arg(long, env = "PCS_DETERMINISTIC")]
    pub deterministic: bool,

    /// Number of runner-up peak years to report
    #[arg(long)]
    pub top_k: Option<usize>,

    #[command(flatten)]
    pub common: CommonArgs,
}
