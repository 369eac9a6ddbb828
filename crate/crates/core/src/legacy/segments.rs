//! Frame-by-frame segment matching shared by PQ, PTQ and the MOTSA family.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;

use crate::error::Result;
use crate::exact::{self, int, ratio, Rational};
use crate::matching::{match_by_threshold, overlap, LabelKey, OverlapMode, OverlapTable};
use crate::panoptic::{ClassId, DatasetSpec, PanopticFrame, TrackId, VideoSequence};

/// Matched/unmatched segment counts of one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PqCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub iou_sum: Rational,
}

impl Default for PqCounts {
    fn default() -> Self {
        Self {
            tp: 0,
            fp: 0,
            fn_: 0,
            iou_sum: Rational::zero(),
        }
    }
}

impl PqCounts {
    pub fn add(&mut self, other: &PqCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.iou_sum += &other.iou_sum;
    }

    pub fn is_empty(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }

    /// `tp + fp/2 + fn/2`
    pub fn denominator(&self) -> Rational {
        ratio(2 * self.tp + self.fp + self.fn_, 2)
    }

    /// `Σ IoU(tp) / (|TP| + ½|FP| + ½|FN|)`; `None` for a class that never
    /// occurs.
    pub fn pq(&self) -> Option<Rational> {
        (!self.is_empty()).then(|| &self.iou_sum / self.denominator())
    }
}

/// Outcome of matching one frame (or one 3-D window) in segment mode.
pub(crate) struct FrameMatches {
    pub counts: BTreeMap<ClassId, PqCounts>,
    /// (gt segment, pred segment, IoU) for every true positive
    pub matched: Vec<(LabelKey, LabelKey, Rational)>,
}

/// Applies >0.5 IoU matching to a segment-mode table. Unmatched predictions
/// lying mostly on ignore or same-class crowd pixels are not false positives.
pub(crate) fn match_segments(table: &OverlapTable) -> FrameMatches {
    let matches = match_by_threshold(table);
    let mut counts: BTreeMap<ClassId, PqCounts> = BTreeMap::new();
    let mut matched_gt = BTreeSet::new();
    let mut matched_pred = BTreeSet::new();
    let mut matched = Vec::with_capacity(matches.len());
    for m in matches {
        let class = m.gt.class().expect("segment keys carry a class");
        let iou = m.iou();
        let c = counts.entry(class).or_default();
        c.tp += 1;
        c.iou_sum += &iou;
        matched_gt.insert(m.gt);
        matched_pred.insert(m.pred);
        matched.push((m.gt, m.pred, iou));
    }
    for &g in table.gt_sizes().keys() {
        if !matched_gt.contains(&g) {
            counts.entry(g.class().unwrap()).or_default().fn_ += 1;
        }
    }
    for (&p, &size) in table.pred_sizes() {
        if matched_pred.contains(&p) {
            continue;
        }
        let excused = table.pred_ignored(p) + table.pred_crowd(p);
        if 2 * excused > size {
            continue;
        }
        counts.entry(p.class().unwrap()).or_default().fp += 1;
    }
    FrameMatches { counts, matched }
}

/// Per-class counts including identity switches.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassMatchCounts {
    pub pq: PqCounts,
    pub idsw: u64,
    /// Identity switches weighted by the IoU of the switching match.
    pub soft_idsw: Rational,
}

/// Mergeable per-class segment statistics of one or more sequences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SegmentCounts {
    pub per_class: BTreeMap<ClassId, ClassMatchCounts>,
}

impl SegmentCounts {
    pub fn merge(&mut self, other: &SegmentCounts) {
        for (class, c) in &other.per_class {
            let dst = self.per_class.entry(*class).or_default();
            dst.pq.add(&c.pq);
            dst.idsw += c.idsw;
            dst.soft_idsw += &c.soft_idsw;
        }
    }

    pub fn pq(&self) -> PqResult {
        let per_class: BTreeMap<ClassId, Rational> = self
            .per_class
            .iter()
            .filter_map(|(c, counts)| counts.pq.pq().map(|v| (*c, v)))
            .collect();
        PqResult {
            mean: mean(per_class.values()),
            per_class,
        }
    }

    pub fn ptq(&self) -> PtqResult {
        let mut per_class = BTreeMap::new();
        for (class, c) in &self.per_class {
            if c.pq.is_empty() {
                continue;
            }
            let den = c.pq.denominator();
            let ptq = (&c.pq.iou_sum - int(c.idsw as i64)) / &den;
            let sptq = (&c.pq.iou_sum - &c.soft_idsw) / &den;
            per_class.insert(*class, PtqClass { ptq, sptq });
        }
        PtqResult {
            ptq: mean(per_class.values().map(|c| &c.ptq)),
            sptq: mean(per_class.values().map(|c| &c.sptq)),
            per_class,
        }
    }

    /// MOTSA family restricted to `classes` (normally the thing classes).
    pub fn motsa(&self, classes: &[ClassId]) -> MotsaResult {
        let mut per_class = BTreeMap::new();
        for class in classes {
            let c = self.per_class.get(class).cloned().unwrap_or_default();
            let gt = c.pq.tp + c.pq.fn_;
            let penalty = int(c.pq.fp as i64 + c.idsw as i64);
            let per_gt = |num: Rational| (gt > 0).then(|| num / int(gt as i64));
            per_class.insert(
                *class,
                MotsaClass {
                    motsa: per_gt(int(c.pq.tp as i64) - &penalty),
                    smotsa: per_gt(&c.pq.iou_sum - &penalty),
                    motsp: (c.pq.tp > 0).then(|| &c.pq.iou_sum / int(c.pq.tp as i64)),
                    ids: c.idsw,
                    sids: c.soft_idsw.clone(),
                    gt,
                    tp: c.pq.tp,
                    fp: c.pq.fp,
                },
            );
        }
        MotsaResult {
            motsa: mean(per_class.values().filter_map(|c| c.motsa.as_ref())),
            smotsa: mean(per_class.values().filter_map(|c| c.smotsa.as_ref())),
            motsp: mean(per_class.values().filter_map(|c| c.motsp.as_ref())),
            ids: per_class.values().map(|c| c.ids).sum(),
            sids: exact::sum(per_class.values().map(|c| c.sids.clone()).collect()),
            per_class,
        }
    }
}

fn mean<'a>(values: impl Iterator<Item = &'a Rational>) -> Option<Rational> {
    let v: Vec<Rational> = values.cloned().collect();
    let n = v.len() as u64;
    (n > 0).then(|| exact::sum(v) / ratio(n, 1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PqResult {
    pub per_class: BTreeMap<ClassId, Rational>,
    /// Mean over classes with any ground-truth or predicted segment.
    pub mean: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtqClass {
    pub ptq: Rational,
    pub sptq: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtqResult {
    pub per_class: BTreeMap<ClassId, PtqClass>,
    pub ptq: Option<Rational>,
    pub sptq: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotsaClass {
    pub motsa: Option<Rational>,
    pub smotsa: Option<Rational>,
    pub motsp: Option<Rational>,
    pub ids: u64,
    pub sids: Rational,
    pub gt: u64,
    pub tp: u64,
    pub fp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotsaResult {
    pub per_class: BTreeMap<ClassId, MotsaClass>,
    /// Means over classes with ground truth (MOTSP: with true positives).
    pub motsa: Option<Rational>,
    pub smotsa: Option<Rational>,
    pub motsp: Option<Rational>,
    pub ids: u64,
    pub sids: Rational,
}

/// In-order matching state of one sequence.
///
/// A ground-truth track remembers the prediction it was last matched to,
/// across frames where it is unmatched; matching it to a different
/// prediction later is an identity switch.
#[derive(Debug, Clone)]
pub struct FrameMatchState {
    spec: DatasetSpec,
    last_match: HashMap<LabelKey, TrackId>,
    counts: SegmentCounts,
}

impl FrameMatchState {
    pub fn new(spec: &DatasetSpec) -> Self {
        Self {
            spec: spec.clone(),
            last_match: HashMap::new(),
            counts: SegmentCounts::default(),
        }
    }

    pub fn push_frame(&mut self, gt: &PanopticFrame, pred: &PanopticFrame) -> Result<()> {
        let table = overlap(gt, pred, OverlapMode::Segment, &self.spec)?;
        let frame = match_segments(&table);
        for (class, c) in &frame.counts {
            self.counts.per_class.entry(*class).or_default().pq.add(c);
        }
        for (g, p, iou) in frame.matched {
            let class = g.class().unwrap();
            if !self.spec.is_thing(class) {
                continue;
            }
            let pred_track = p.track().unwrap();
            if let Some(prev) = self.last_match.insert(g, pred_track) {
                if prev != pred_track {
                    let c = self.counts.per_class.entry(class).or_default();
                    c.idsw += 1;
                    c.soft_idsw += iou;
                }
            }
        }
        Ok(())
    }

    pub fn counts(&self) -> &SegmentCounts {
        &self.counts
    }

    pub fn into_counts(self) -> SegmentCounts {
        self.counts
    }
}

/// Runs the matching state machine over an aligned sequence pair.
pub fn segment_counts(gt: &VideoSequence, pred: &VideoSequence, spec: &DatasetSpec) -> Result<SegmentCounts> {
    let mut state = FrameMatchState::new(spec);
    for (g, p) in gt.align(pred, spec) {
        state.push_frame(g, &p)?;
    }
    Ok(state.into_counts())
}

pub fn pq(gt: &VideoSequence, pred: &VideoSequence, spec: &DatasetSpec) -> Result<PqResult> {
    Ok(segment_counts(gt, pred, spec)?.pq())
}

pub fn ptq(gt: &VideoSequence, pred: &VideoSequence, spec: &DatasetSpec) -> Result<PtqResult> {
    Ok(segment_counts(gt, pred, spec)?.ptq())
}

pub fn motsa_suite(
    gt: &VideoSequence,
    pred: &VideoSequence,
    spec: &DatasetSpec,
    classes: &[ClassId],
) -> Result<MotsaResult> {
    Ok(segment_counts(gt, pred, spec)?.motsa(classes))
}
