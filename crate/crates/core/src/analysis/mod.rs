//! Characterization of block-access traces: reuse gaps, distinct-block
//! counts, fully-associative hit-rate curves, resolution sweeps and store
//! footprints, with CSV writers for each.

mod csv_out;
mod curves;
mod footprint;
mod pipeline;
mod reuse;

use thiserror::Error;

use crate::cachesim::SimError;
use crate::mapper::MapperError;
use crate::store::StoreError;

pub use csv_out::{
    format_sig6, write_distinct_csv, write_footprint_csv, write_gap_csv, write_hit_curve_csv,
    write_sweep_csv, DISTINCT_HEADER, FOOTPRINT_HEADER, GAP_HEADER, HIT_CURVE_HEADER, SWEEP_HEADER,
};
pub use curves::{default_capacities, hit_rate_curve, plateau_onset, HitRatePoint};
pub use footprint::{footprint_keys, footprint_report, FootprintRow};
pub use pipeline::{render_frames, resolution_sweep, run_mapping, MappingRun, MappingSpec, SweepResult, SweepRow};
pub use reuse::{default_gap_edges, distinct_blocks, distinct_blocks_per_frame, reuse_gaps, reuse_gap_histogram, GapHistogram};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Mapper(#[from] MapperError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid analysis input: {0}")]
    InvalidInput(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
