//! Brute-force STQ on explicit pixel sets, for cross-checking the counters.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::exact::{ratio, Rational};
use crate::panoptic::{ClassId, DatasetSpec, TrackId, VideoSequence};

/// Sequences larger than this (gt pixels over all frames) are rejected.
pub const ORACLE_PIXEL_LIMIT: usize = 100_000;

type Pixel = (u32, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub aq: Rational,
    pub sq: Rational,
    pub stq_squared: Rational,
}

fn set_iou(a: &HashSet<Pixel>, b: &HashSet<Pixel>) -> (usize, usize) {
    let inter = a.intersection(b).count();
    (inter, a.union(b).count())
}

/// Single-sequence STQ built from per-track and per-class pixel sets.
///
/// AQ uses the precision/recall form `TPA·IoU` rewritten through
/// `P·R / (P + R - P·R)`, which is algebraically equal to `TPA/|p ∪ g|`.
pub fn oracle_stq(gt: &VideoSequence, pred: &VideoSequence, spec: &DatasetSpec) -> Result<OracleResult> {
    let total: usize = gt.frames().iter().map(|f| f.len()).sum();
    if total > ORACLE_PIXEL_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "oracle limited to {ORACLE_PIXEL_LIMIT} pixels, got {total}"
        )));
    }

    let mut gt_tracks: BTreeMap<TrackId, HashSet<Pixel>> = BTreeMap::new();
    let mut pred_tracks: BTreeMap<TrackId, HashSet<Pixel>> = BTreeMap::new();
    let mut gt_classes: BTreeMap<ClassId, HashSet<Pixel>> = BTreeMap::new();
    let mut pred_classes: BTreeMap<ClassId, HashSet<Pixel>> = BTreeMap::new();

    for g in gt.frames() {
        let t = g.frame_index();
        let p = pred.frame(t);
        for i in 0..g.len() {
            let (gc, gi) = (g.semantic()[i], g.track()[i]);
            let (pc, pi) = match p {
                Some(p) => (p.semantic()[i], p.track()[i]),
                None => (spec.void_class_id(), spec.crowd_track_id()),
            };
            if gc == spec.ignore_class_id() {
                continue;
            }
            let px = (t, i);
            gt_classes.entry(gc).or_default().insert(px);
            pred_classes.entry(pc).or_default().insert(px);
            let crowd = spec.is_thing(gc) && gi == spec.crowd_track_id();
            if crowd {
                continue;
            }
            if spec.is_thing(gc) {
                gt_tracks.entry(gi).or_default().insert(px);
            }
            if spec.is_thing(pc) {
                pred_tracks.entry(pi).or_default().insert(px);
            }
        }
    }

    let mut aq = ratio(0, 1);
    for g in gt_tracks.values() {
        let mut track = ratio(0, 1);
        for p in pred_tracks.values() {
            let (inter, union) = set_iou(g, p);
            if inter == 0 {
                continue;
            }
            let precision = ratio(inter as u64, p.len() as u64);
            let recall = ratio(inter as u64, g.len() as u64);
            let iou = &precision * &recall / (&precision + &recall - &precision * &recall);
            debug_assert_eq!(iou, ratio(inter as u64, union as u64));
            track += ratio(inter as u64, 1) * iou;
        }
        aq += track / ratio(g.len() as u64, 1);
    }
    let aq = if gt_tracks.is_empty() {
        ratio(1, 1)
    } else {
        aq / ratio(gt_tracks.len() as u64, 1)
    };

    let classes: BTreeSet<ClassId> = gt_classes
        .keys()
        .chain(pred_classes.keys())
        .copied()
        .filter(|&c| c != spec.void_class_id())
        .collect();
    let empty = HashSet::new();
    let mut sq = ratio(0, 1);
    for c in &classes {
        let (inter, union) = set_iou(
            gt_classes.get(c).unwrap_or(&empty),
            pred_classes.get(c).unwrap_or(&empty),
        );
        sq += ratio(inter as u64, union as u64);
    }
    let sq = if classes.is_empty() {
        ratio(1, 1)
    } else {
        sq / ratio(classes.len() as u64, 1)
    };
    if gt_tracks.is_empty() && classes.is_empty() {
        return Err(Error::NothingToEvaluate);
    }

    Ok(OracleResult {
        stq_squared: &aq * &sq,
        aq,
        sq,
    })
}
