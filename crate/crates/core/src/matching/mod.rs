//! Overlap statistics between label maps and assignment machinery.

mod hungarian;
mod overlap;

pub use hungarian::{hungarian, Assignment, CostMatrix};
pub use overlap::{
    bbox_iou, iou, match_by_threshold, overlap, BoundingBox, LabelKey, OverlapMode, OverlapTable,
    ThresholdMatch,
};
