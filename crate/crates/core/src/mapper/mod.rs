//! Synthetic depth frames and TSDF/ESDF map updates that emit block-access
//! traces.

mod camera;
mod depth_io;
mod integrate;
mod render;
mod scene;
mod trace;

use thiserror::Error;

use crate::grid::GridError;
use crate::store::StoreError;

pub use camera::{make_trajectory, CameraIntrinsics, Pose, TrajectorySpec};
pub use depth_io::{read_depth_frame, write_depth_frame, DEPTH_MAGIC};
pub use integrate::{IntegratorConfig, Mapper, RayGrouping, UpdateStats, DEFAULT_MAX_WEIGHT};
pub use render::{render_depth, render_depth_with, DepthFrame};
pub use scene::{Primitive, SceneSpec};
pub use trace::{AccessEvent, AccessOp, AccessTrace, TraceParseError, TRACE_HEADER};

#[derive(Debug, Error)]
pub enum MapperError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
