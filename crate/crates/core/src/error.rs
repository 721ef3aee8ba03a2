//! Crate-level error type unifying every stage's failures.

use thiserror::Error;

use crate::config::ConfigError;
use crate::samples::ParseError;
use crate::sim::log::LogError;
use crate::sim::plan::ScriptError;
use crate::sim::replay::ReplayError;
use crate::sim::summary::SummaryError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
}
