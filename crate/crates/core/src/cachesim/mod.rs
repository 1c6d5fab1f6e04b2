//! Reserved-way key/handle cache model.
//!
//! Block keys are cached as packed (key, handle) pairs inside the first `m`
//! ways of each set at one or more cache levels. A key's line is chosen by
//! its pseudoaddress, `spatial_hash(key) % NR`, where `NR` is the number of
//! reserved lines at the outermost reserved level; set and tag at every level
//! derive from that one value, so co-resident keys agree on their line at
//! every level.

mod cost;
mod fa_buffer;
mod hierarchy;
mod line;
mod profile;
mod replay;

use thiserror::Error;

pub use cost::{amdahl, CostModelConfig, CostReport};
pub use fa_buffer::FaBuffer;
pub use hierarchy::{
    pseudoaddress, GlobalStats, KvCacheHierarchy, LevelStats, LineSnapshot, LookupOutcome, SimStats,
};
pub use line::PAIR_BYTES;
pub use profile::{CacheProfile, LevelConfig, LevelOverride};
pub use replay::{run_trace, run_trace_on, ReplayStats, RunReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("cache configuration error: {0}")]
    Config(String),
    #[error("no cache lines are reserved")]
    NotReserved,
    #[error("the invalid handle cannot be inserted; use kv_remove")]
    InvalidHandle,
}
