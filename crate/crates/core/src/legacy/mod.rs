//! The segment-matching metrics STQ is compared against: PQ, PTQ/sPTQ, VPQ
//! and the mask-based CLEAR-MOT family (MOTSA, sMOTSA, MOTSP, IDS, sIDS).

mod segments;
mod vpq;

pub use segments::{
    motsa_suite, pq, ptq, segment_counts, ClassMatchCounts, FrameMatchState, MotsaClass,
    MotsaResult, PqCounts, PqResult, PtqClass, PtqResult, SegmentCounts,
};
pub use vpq::{vpq, vpq_counts, VpqCounts, VpqParams, VpqResult};
