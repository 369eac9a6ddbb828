use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::{ratio, Rational};
use crate::panoptic::{ClassId, DatasetSpec, PanopticFrame, TrackId};

/// How pixels are grouped into keys when counting overlaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OverlapMode {
    /// Keys are `(class, track)` segments. Ground-truth ignore and crowd pixels
    /// form no segment; predicted void forms no segment.
    Segment,
    /// Keys are thing track ids regardless of class. Pixels inside
    /// ground-truth ignore or crowd regions are dropped entirely.
    ClassAgnosticTrack,
    /// Keys are class ids. Ground-truth ignore pixels are dropped; predicted
    /// void is kept as its own key.
    Semantic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelKey {
    Segment { class: ClassId, track: TrackId },
    Track(TrackId),
    Class(ClassId),
}

impl LabelKey {
    pub fn class(&self) -> Option<ClassId> {
        match *self {
            LabelKey::Segment { class, .. } | LabelKey::Class(class) => Some(class),
            LabelKey::Track(_) => None,
        }
    }

    pub fn track(&self) -> Option<TrackId> {
        match *self {
            LabelKey::Segment { track, .. } | LabelKey::Track(track) => Some(track),
            LabelKey::Class(_) => None,
        }
    }
}

/// Sparse intersection counts between ground-truth and predicted keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapTable {
    mode: OverlapMode,
    entries: BTreeMap<(LabelKey, LabelKey), u64>,
    gt_sizes: BTreeMap<LabelKey, u64>,
    pred_sizes: BTreeMap<LabelKey, u64>,
    // segment mode only
    pred_ignored: BTreeMap<LabelKey, u64>,
    pred_crowd: BTreeMap<LabelKey, u64>,
}

fn bump(map: &mut BTreeMap<LabelKey, u64>, key: LabelKey, n: u64) {
    *map.entry(key).or_insert(0) += n;
}

impl OverlapTable {
    pub fn new(mode: OverlapMode) -> Self {
        Self {
            mode,
            entries: BTreeMap::new(),
            gt_sizes: BTreeMap::new(),
            pred_sizes: BTreeMap::new(),
            pred_ignored: BTreeMap::new(),
            pred_crowd: BTreeMap::new(),
        }
    }

    pub fn mode(&self) -> OverlapMode {
        self.mode
    }

    pub fn entries(&self) -> &BTreeMap<(LabelKey, LabelKey), u64> {
        &self.entries
    }

    pub fn gt_sizes(&self) -> &BTreeMap<LabelKey, u64> {
        &self.gt_sizes
    }

    pub fn pred_sizes(&self) -> &BTreeMap<LabelKey, u64> {
        &self.pred_sizes
    }

    pub fn intersection(&self, gt: LabelKey, pred: LabelKey) -> u64 {
        self.entries.get(&(gt, pred)).copied().unwrap_or(0)
    }

    pub fn gt_size(&self, key: LabelKey) -> u64 {
        self.gt_sizes.get(&key).copied().unwrap_or(0)
    }

    pub fn pred_size(&self, key: LabelKey) -> u64 {
        self.pred_sizes.get(&key).copied().unwrap_or(0)
    }

    /// Predicted pixels of `key` lying on ground-truth ignore.
    pub fn pred_ignored(&self, key: LabelKey) -> u64 {
        self.pred_ignored.get(&key).copied().unwrap_or(0)
    }

    /// Predicted pixels of `key` lying on a ground-truth crowd region of the
    /// same class.
    pub fn pred_crowd(&self, key: LabelKey) -> u64 {
        self.pred_crowd.get(&key).copied().unwrap_or(0)
    }

    /// Union used for IoU: predicted pixels on ignore are not counted.
    pub fn union(&self, gt: LabelKey, pred: LabelKey) -> u64 {
        self.gt_size(gt) + self.pred_size(pred) - self.intersection(gt, pred) - self.pred_ignored(pred)
    }

    /// Adds all counts of `other` (same mode) into `self`. Summing per-frame
    /// tables yields the table of the frames' 3-D union.
    pub fn add(&mut self, other: &OverlapTable) {
        assert_eq!(self.mode, other.mode, "cannot add overlap tables of different modes");
        for (k, v) in &other.entries {
            *self.entries.entry(*k).or_insert(0) += v;
        }
        for (dst, src) in [
            (&mut self.gt_sizes, &other.gt_sizes),
            (&mut self.pred_sizes, &other.pred_sizes),
            (&mut self.pred_ignored, &other.pred_ignored),
            (&mut self.pred_crowd, &other.pred_crowd),
        ] {
            for (k, v) in src {
                bump(dst, *k, *v);
            }
        }
    }

    fn record(
        &mut self,
        spec: &DatasetSpec,
        (gc, gt): (ClassId, TrackId),
        (pc, pt): (ClassId, TrackId),
        n: u64,
    ) {
        let gt_ignore = gc == spec.ignore_class_id();
        let gt_thing = spec.is_thing(gc);
        let gt_crowd = gt_thing && gt == spec.crowd_track_id();
        match self.mode {
            OverlapMode::Segment => {
                let gk = (!gt_ignore && !gt_crowd).then(|| LabelKey::Segment {
                    class: gc,
                    track: if gt_thing { gt } else { spec.crowd_track_id() },
                });
                let pk = (pc != spec.void_class_id()).then(|| LabelKey::Segment {
                    class: pc,
                    track: if spec.is_thing(pc) { pt } else { spec.crowd_track_id() },
                });
                if let Some(g) = gk {
                    bump(&mut self.gt_sizes, g, n);
                }
                if let Some(p) = pk {
                    bump(&mut self.pred_sizes, p, n);
                    if gt_ignore {
                        bump(&mut self.pred_ignored, p, n);
                    } else if gt_crowd && gc == pc {
                        bump(&mut self.pred_crowd, p, n);
                    }
                    if let Some(g) = gk {
                        *self.entries.entry((g, p)).or_insert(0) += n;
                    }
                }
            }
            OverlapMode::ClassAgnosticTrack => {
                if gt_ignore || gt_crowd {
                    return;
                }
                let gk = gt_thing.then_some(LabelKey::Track(gt));
                let pk = spec.is_thing(pc).then_some(LabelKey::Track(pt));
                if let Some(g) = gk {
                    bump(&mut self.gt_sizes, g, n);
                }
                if let Some(p) = pk {
                    bump(&mut self.pred_sizes, p, n);
                    if let Some(g) = gk {
                        *self.entries.entry((g, p)).or_insert(0) += n;
                    }
                }
            }
            OverlapMode::Semantic => {
                if gt_ignore {
                    return;
                }
                let (g, p) = (LabelKey::Class(gc), LabelKey::Class(pc));
                bump(&mut self.gt_sizes, g, n);
                bump(&mut self.pred_sizes, p, n);
                *self.entries.entry((g, p)).or_insert(0) += n;
            }
        }
    }
}

/// Exact overlap counts between two frames.
pub fn overlap(
    gt: &PanopticFrame,
    pred: &PanopticFrame,
    mode: OverlapMode,
    spec: &DatasetSpec,
) -> Result<OverlapTable> {
    gt.check_same_dims(pred)?;
    let mut table = OverlapTable::new(mode);
    let mut pixels = gt.labels().zip(pred.labels());
    let Some(mut run) = pixels.next() else {
        return Ok(table);
    };
    let mut run_len = 1u64;
    // label maps are piecewise constant; count runs instead of pixels
    for px in pixels {
        if px == run {
            run_len += 1;
        } else {
            table.record(spec, run.0, run.1, run_len);
            run = px;
            run_len = 1;
        }
    }
    table.record(spec, run.0, run.1, run_len);
    Ok(table)
}

/// IoU of two pixel sets given their sizes and intersection. `0/0` is 0.
pub fn iou(a_size: u64, b_size: u64, intersection: u64) -> Result<Rational> {
    if intersection > a_size.min(b_size) {
        return Err(Error::InvalidOverlap {
            a: a_size,
            b: b_size,
            intersection,
        });
    }
    let union = a_size + b_size - intersection;
    Ok(if union == 0 {
        ratio(0, 1)
    } else {
        ratio(intersection, union)
    })
}

/// Axis-aligned box with exclusive max corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        (self.x2 - self.x1).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y2 - self.y1).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

pub fn bbox_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let w = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let h = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// A ground-truth/prediction pair whose IoU exceeds one half.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdMatch {
    pub gt: LabelKey,
    pub pred: LabelKey,
    pub intersection: u64,
    pub union: u64,
}

impl ThresholdMatch {
    pub fn iou(&self) -> Rational {
        ratio(self.intersection, self.union)
    }
}

/// All pairs with IoU strictly above 0.5. Segment keys must agree on class.
///
/// Such pairs are unique: two predictions each covering more than half of
/// one ground-truth segment would have to overlap.
pub fn match_by_threshold(table: &OverlapTable) -> Vec<ThresholdMatch> {
    table
        .entries
        .iter()
        .filter(|((g, p), _)| g.class().is_none() || g.class() == p.class())
        .filter_map(|(&(gt, pred), &intersection)| {
            let union = table.union(gt, pred);
            (2 * intersection > union).then_some(ThresholdMatch {
                gt,
                pred,
                intersection,
                union,
            })
        })
        .collect()
}
