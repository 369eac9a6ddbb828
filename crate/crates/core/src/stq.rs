//! Streaming Segmentation and Tracking Quality.
//!
//! An [`StqAccumulator`] holds nothing but integer pixel counts, so frames,
//! sequences or shards of a dataset can be accumulated independently and
//! merged in any order. Scores are only formed in [`StqAccumulator::finalize`],
//! in exact rational arithmetic.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use crate::error::{Error, Result};
use crate::exact::{self, ratio, Exact, Rational};
use crate::matching::{overlap, LabelKey, OverlapMode};
use crate::panoptic::{ClassId, DatasetSpec, PanopticFrame, TrackId, VideoSequence};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct AssociationCounts {
    /// (gt track, pred track) → TPA
    overlaps: BTreeMap<(TrackId, TrackId), u64>,
    gt_sizes: BTreeMap<TrackId, u64>,
    pred_sizes: BTreeMap<TrackId, u64>,
}

impl AssociationCounts {
    fn add(&mut self, other: &AssociationCounts) {
        for (k, v) in &other.overlaps {
            *self.overlaps.entry(*k).or_insert(0) += v;
        }
        for (k, v) in &other.gt_sizes {
            *self.gt_sizes.entry(*k).or_insert(0) += v;
        }
        for (k, v) in &other.pred_sizes {
            *self.pred_sizes.entry(*k).or_insert(0) += v;
        }
    }
}

/// Mergeable pixel counts for SQ (per class) and AQ (per track pair).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StqAccumulator {
    spec: DatasetSpec,
    sem_intersections: BTreeMap<ClassId, u64>,
    sem_gt_sizes: BTreeMap<ClassId, u64>,
    sem_pred_sizes: BTreeMap<ClassId, u64>,
    sequences: BTreeMap<String, AssociationCounts>,
}

/// Final scores. `stq_squared == aq * sq` holds exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StqResult {
    pub aq: Rational,
    pub sq: Rational,
    pub stq_squared: Rational,
    pub per_class_iou: BTreeMap<ClassId, Rational>,
    pub per_track_aq: BTreeMap<(String, TrackId), Rational>,
}

impl StqResult {
    pub fn stq(&self) -> Exact {
        Exact::Sqrt(self.stq_squared.clone())
    }

    pub fn stq_f64(&self) -> f64 {
        self.stq().to_f64()
    }
}

impl StqAccumulator {
    pub fn new(spec: &DatasetSpec) -> Self {
        Self {
            spec: spec.clone(),
            sem_intersections: BTreeMap::new(),
            sem_gt_sizes: BTreeMap::new(),
            sem_pred_sizes: BTreeMap::new(),
            sequences: BTreeMap::new(),
        }
    }

    pub fn spec(&self) -> &DatasetSpec {
        &self.spec
    }

    /// Accumulates one aligned frame pair of sequence `sequence_id`.
    pub fn update(&mut self, gt: &PanopticFrame, pred: &PanopticFrame, sequence_id: &str) -> Result<()> {
        let semantic = overlap(gt, pred, OverlapMode::Semantic, &self.spec)?;
        let tracks = overlap(gt, pred, OverlapMode::ClassAgnosticTrack, &self.spec)?;

        for (key, n) in semantic.gt_sizes() {
            if let LabelKey::Class(c) = key {
                *self.sem_gt_sizes.entry(*c).or_insert(0) += n;
            }
        }
        for (key, n) in semantic.pred_sizes() {
            if let LabelKey::Class(c) = key {
                *self.sem_pred_sizes.entry(*c).or_insert(0) += n;
            }
        }
        for (&(g, p), n) in semantic.entries() {
            if let (LabelKey::Class(g), LabelKey::Class(p)) = (g, p) {
                if g == p {
                    *self.sem_intersections.entry(g).or_insert(0) += n;
                }
            }
        }

        let counts = self.sequences.entry(sequence_id.to_owned()).or_default();
        for (key, n) in tracks.gt_sizes() {
            if let LabelKey::Track(t) = key {
                *counts.gt_sizes.entry(*t).or_insert(0) += n;
            }
        }
        for (key, n) in tracks.pred_sizes() {
            if let LabelKey::Track(t) = key {
                *counts.pred_sizes.entry(*t).or_insert(0) += n;
            }
        }
        for (&(g, p), n) in tracks.entries() {
            if let (LabelKey::Track(g), LabelKey::Track(p)) = (g, p) {
                *counts.overlaps.entry((g, p)).or_insert(0) += n;
            }
        }
        Ok(())
    }

    /// Accumulates a whole sequence; ground-truth frames without a predicted
    /// counterpart are scored against an all-void prediction.
    pub fn update_sequence(&mut self, gt: &VideoSequence, pred: &VideoSequence) -> Result<()> {
        let spec = self.spec.clone();
        for (g, p) in gt.align(pred, &spec) {
            self.update(g, &p, gt.sequence_id())?;
        }
        Ok(())
    }

    /// Component-wise sum of all counts.
    pub fn merge(mut self, other: &StqAccumulator) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        for (dst, src) in [
            (&mut self.sem_intersections, &other.sem_intersections),
            (&mut self.sem_gt_sizes, &other.sem_gt_sizes),
            (&mut self.sem_pred_sizes, &other.sem_pred_sizes),
        ] {
            for (k, v) in src {
                *dst.entry(*k).or_insert(0) += v;
            }
        }
        for (seq, counts) in &other.sequences {
            self.sequences.entry(seq.clone()).or_default().add(counts);
        }
        Ok(self)
    }

    pub fn finalize(&self) -> Result<StqResult> {
        let void = self.spec.void_class_id();
        let classes: BTreeSet<ClassId> = self
            .sem_gt_sizes
            .keys()
            .chain(self.sem_pred_sizes.keys())
            .copied()
            .filter(|&c| c != void)
            .collect();

        let per_class_iou: BTreeMap<ClassId, Rational> = classes
            .iter()
            .map(|c| {
                let inter = self.sem_intersections.get(c).copied().unwrap_or(0);
                let gt = self.sem_gt_sizes.get(c).copied().unwrap_or(0);
                let pred = self.sem_pred_sizes.get(c).copied().unwrap_or(0);
                (*c, ratio(inter, gt + pred - inter))
            })
            .collect();

        let mut per_track_aq = BTreeMap::new();
        for (seq, counts) in &self.sequences {
            let mut terms: BTreeMap<TrackId, Vec<Rational>> = BTreeMap::new();
            for (&(g, p), &tpa) in &counts.overlaps {
                let union = counts.gt_sizes[&g] + counts.pred_sizes[&p] - tpa;
                terms.entry(g).or_default().push(ratio(tpa * tpa, union));
            }
            for (&g, &size) in &counts.gt_sizes {
                let weighted = exact::sum(terms.remove(&g).unwrap_or_default());
                per_track_aq.insert((seq.clone(), g), weighted / ratio(size, 1));
            }
        }

        if classes.is_empty() && per_track_aq.is_empty() {
            return Err(Error::NothingToEvaluate);
        }
        let aq = if per_track_aq.is_empty() {
            warn!("no ground-truth tracks; AQ defaults to 1");
            ratio(1, 1)
        } else {
            exact::sum(per_track_aq.values().cloned().collect()) / ratio(per_track_aq.len() as u64, 1)
        };
        let sq = if per_class_iou.is_empty() {
            ratio(1, 1)
        } else {
            exact::sum(per_class_iou.values().cloned().collect()) / ratio(per_class_iou.len() as u64, 1)
        };
        Ok(StqResult {
            stq_squared: &aq * &sq,
            aq,
            sq,
            per_class_iou,
            per_track_aq,
        })
    }
}

/// STQ of a single sequence pair.
pub fn evaluate_sequence(gt: &VideoSequence, pred: &VideoSequence, spec: &DatasetSpec) -> Result<StqResult> {
    let mut acc = StqAccumulator::new(spec);
    acc.update_sequence(gt, pred)?;
    acc.finalize()
}
