//! Evaluation toolkit for dense video panoptic segmentation and tracking.
//!
//! The headline metric is STQ, the geometric mean of a pixel-level
//! association quality (AQ) and a class mean IoU (SQ). The legacy metrics it
//! is usually compared against (PQ, PTQ, VPQ and the MOTSA family), two
//! tracking-by-detection baselines and synthetic scenario generators are
//! provided alongside.

pub mod error;
pub mod eval;
pub mod exact;
pub mod io;
pub mod legacy;
pub mod matching;
pub mod merge;
pub mod panoptic;
pub mod scenarios;
pub mod stq;
pub mod trackers;

pub use error::{Error, Result};
pub use panoptic::{
    extract_tubes, validate_frame, ClassId, ClassInfo, DatasetSpec, PanopticFrame, TrackId,
    TrackTube, VideoSequence, Violation, ViolationKind,
};
