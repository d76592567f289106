//! Command implementations behind the `bvqa` binary.

pub mod args;
pub mod bench;
pub mod commands;
pub mod models;
pub mod visualize;

use anyhow::Result;
use args::{Cli, Command};

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some videos or kinds failed; the rest completed.
    Partial,
}

/// Bad flag combinations found after parsing; the binary exits with 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.common.jobs).build()?;
    pool.install(|| match &cli.command {
        Command::Extract(a) => commands::extract(&cli.common, a),
        Command::Train(a) => commands::train(&cli.common, a),
        Command::Evaluate(a) => commands::evaluate(&cli.common, a),
        Command::Correlate => commands::correlate(&cli.common),
        Command::Bench(a) => bench::bench(&cli.common, a),
        Command::Visualize(a) => visualize::visualize(&cli.common, a),
        Command::Synth(a) => commands::synth(&cli.common, a),
    })
}
