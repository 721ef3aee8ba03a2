//! Synthetic sessions and deterministic pipeline replay.

pub mod generate;
pub mod log;
pub mod plan;
pub mod replay;
pub mod summary;

pub use generate::{generate_session, SessionTraces, SimulatorConfig};
pub use log::{EventLog, EventRecord, LoggedRelease, Outcome};
pub use plan::{Block, BlockKind, Episode, EpisodeKind, EpisodeScript, SessionPlan};
pub use replay::{replay, Pipeline, ReplayError};
pub use summary::{summarize, Summary};
