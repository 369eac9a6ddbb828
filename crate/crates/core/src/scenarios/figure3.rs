use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::{ratio, Exact};
use crate::panoptic::{PanopticFrame, TrackId, VideoSequence};
use crate::scenarios::{scenario_spec, CAR};

/// Metric names used in [`ScenarioCase::expected`].
pub const STQ: &str = "STQ";
pub const AQ: &str = "AQ";
pub const SQ: &str = "SQ";
pub const PTQ: &str = "PTQ";
pub const VPQ_FULL: &str = "VPQ_full";

/// A ground-truth/prediction pair with its known metric values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioCase {
    pub name: String,
    pub gt: VideoSequence,
    pub pred: VideoSequence,
    pub expected: BTreeMap<&'static str, Exact>,
}

// One 1x1 car pixel per frame. `None` in a prediction is a void frame.
const GT_TRACKS: [&[u32]; 5] = [&[1, 1, 2, 2], &[1; 5], &[1; 5], &[1; 4], &[1; 4]];
const PRED_TRACKS: [&[Option<u32>]; 5] = [
    // one id spanning two ground-truth tracks (ID transfer)
    &[Some(1), Some(1), Some(1), Some(1)],
    &[Some(1), Some(1), Some(2), Some(2), Some(2)],
    // wrong id on the first frame only, corrected afterwards
    &[Some(2), Some(1), Some(1), Some(1), Some(1)],
    &[Some(2), Some(1), Some(1), Some(1)],
    // as #4 with the wrongly tracked segment removed
    &[None, Some(1), Some(1), Some(1)],
];

// (STQ², AQ, SQ, PTQ, full-video VPQ) as exact fractions
const EXPECTED: [[(u64, u64); 5]; 5] = [
    [(1, 2), (1, 2), (1, 1), (1, 1), (0, 1)],
    [(13, 25), (13, 25), (1, 1), (4, 5), (2, 5)],
    [(17, 25), (17, 25), (1, 1), (4, 5), (8, 15)],
    [(5, 8), (5, 8), (1, 1), (3, 4), (1, 2)],
    [(27, 64), (9, 16), (3, 4), (6, 7), (3, 4)],
];

/// The five association-error scenarios with tracks of up to five frames.
pub fn figure3(n: usize) -> Result<ScenarioCase> {
    if !(1..=5).contains(&n) {
        return Err(Error::InvalidParameter(format!("figure3 scenario must be 1..=5, got {n}")));
    }
    let spec = scenario_spec();
    let name = format!("scenario{n}");
    let gt_frames = GT_TRACKS[n - 1]
        .iter()
        .enumerate()
        .map(|(t, &id)| PanopticFrame::filled(1, 1, t as u32, CAR, TrackId(id)))
        .collect();
    let pred_frames = PRED_TRACKS[n - 1]
        .iter()
        .enumerate()
        .map(|(t, id)| match id {
            Some(id) => PanopticFrame::filled(1, 1, t as u32, CAR, TrackId(*id)),
            None => PanopticFrame::filled(1, 1, t as u32, spec.void_class_id(), spec.crowd_track_id()),
        })
        .collect();

    let [stq2, aq, sq, ptq, vpq] = EXPECTED[n - 1].map(|(a, b)| ratio(a, b));
    let expected = BTreeMap::from([
        (STQ, Exact::Sqrt(stq2)),
        (AQ, Exact::Rational(aq)),
        (SQ, Exact::Rational(sq)),
        (PTQ, Exact::Rational(ptq)),
        (VPQ_FULL, Exact::Rational(vpq)),
    ]);
    Ok(ScenarioCase {
        gt: VideoSequence::new(name.clone(), gt_frames)?,
        pred: VideoSequence::new(name.clone(), pred_frames)?,
        name,
        expected,
    })
}
