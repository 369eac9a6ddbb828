//! Tracking-by-detection baselines.
//!
//! Both trackers take per-frame predictions whose thing segments carry
//! frame-local ids and rewrite those ids into sequence-level track ids.
//! Stuff pixels and thing pixels with the crowd id are left untouched.

mod iou;
mod kalman;
mod sort;

pub use iou::{iou_associate, IouTrackerParams};
pub use kalman::BoxKalman;
pub use sort::{sort_track, SortParams};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matching::{hungarian, BoundingBox, CostMatrix};
use crate::panoptic::{ClassId, DatasetSpec, PanopticFrame, TrackId};

/// One thing segment of a single frame.
#[derive(Debug, Clone)]
struct Detection {
    class: ClassId,
    /// Sorted pixel offsets.
    pixels: Vec<usize>,
    bbox: BoundingBox,
}

fn detections(frame: &PanopticFrame, spec: &DatasetSpec) -> Vec<Detection> {
    let mut by_key: BTreeMap<(ClassId, TrackId), Vec<usize>> = BTreeMap::new();
    for (i, (class, track)) in frame.labels().enumerate() {
        if spec.is_thing(class) && track != spec.crowd_track_id() {
            by_key.entry((class, track)).or_default().push(i);
        }
    }
    let width = frame.width();
    by_key
        .into_iter()
        .map(|((class, _), pixels)| {
            let (mut x1, mut y1, mut x2, mut y2) = (usize::MAX, usize::MAX, 0, 0);
            for &i in &pixels {
                let (x, y) = (i % width, i / width);
                x1 = x1.min(x);
                y1 = y1.min(y);
                x2 = x2.max(x + 1);
                y2 = y2.max(y + 1);
            }
            let bbox = BoundingBox {
                x1: x1 as f64,
                y1: y1 as f64,
                x2: x2 as f64,
                y2: y2 as f64,
            };
            Detection { class, pixels, bbox }
        })
        .collect()
}

/// Size of the intersection of two sorted pixel lists.
fn intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn mask_iou(a: &[usize], b: &[usize]) -> f64 {
    let inter = intersection(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Hungarian assignment on `1 - similarity`, dropping pairs below `threshold`.
/// Returns `(detection, track)` index pairs.
fn associate(similarity: &[Vec<f64>], tracks: usize, threshold: f64) -> Result<Vec<(usize, usize)>> {
    if similarity.is_empty() || tracks == 0 {
        return Ok(Vec::new());
    }
    let cost = CostMatrix::from_fn(similarity.len(), tracks, |d, t| 1.0 - similarity[d][t]);
    let assignment = hungarian(&cost)?;
    Ok(assignment
        .pairs()
        .filter(|&(d, t)| similarity[d][t] >= threshold && similarity[d][t] > 0.0)
        .collect())
}

/// Monotone id source; 0 is never handed out.
#[derive(Debug)]
struct IdCounter {
    next: u32,
    max: TrackId,
}

impl IdCounter {
    fn new(spec: &DatasetSpec) -> Self {
        Self {
            next: 1,
            max: spec.max_track_id(),
        }
    }

    fn fresh(&mut self, crowd: TrackId) -> Result<TrackId> {
        if self.next == crowd.0 {
            self.next += 1;
        }
        if self.next > self.max.0 {
            return Err(Error::InvalidParameter(format!(
                "track id budget exhausted (max_track_id {})",
                self.max
            )));
        }
        let id = TrackId(self.next);
        self.next += 1;
        Ok(id)
    }
}

/// Copies `frame`, writing `ids[k]` onto the pixels of detection `k`.
fn relabel(frame: &PanopticFrame, dets: &[Detection], ids: &[TrackId]) -> Result<PanopticFrame> {
    let (sem, mut track) = frame.clone().into_parts();
    for (det, id) in dets.iter().zip(ids) {
        for &i in &det.pixels {
            track[i] = *id;
        }
    }
    PanopticFrame::new(frame.height(), frame.width(), frame.frame_index(), sem, track)
}

fn check_threshold(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}
