use log::{debug, warn};

use super::{associate, check_threshold, detections, relabel, BoxKalman, IdCounter};
use crate::error::Result;
use crate::matching::bbox_iou;
use crate::panoptic::{ClassId, DatasetSpec, TrackId, VideoSequence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortParams {
    /// Minimum box IoU between a prediction and a detection.
    pub iou_threshold: f64,
    /// Frames a track may go unmatched before it is dropped.
    pub max_age: u32,
    /// Consecutive hits before a track's id is emitted; the birth counts.
    pub min_hits: u32,
}

impl Default for SortParams {
    fn default() -> Self {
        Self {
            iou_threshold: 0.3,
            max_age: 10,
            min_hits: 1,
        }
    }
}

struct Track {
    id: TrackId,
    class: ClassId,
    filter: BoxKalman,
    hit_streak: u32,
    since_update: u32,
}

/// SORT: Kalman-predicted boxes matched to detection boxes by IoU.
///
/// Segments of tracks that have not reached `min_hits` keep the crowd id.
pub fn sort_track(seq: &VideoSequence, spec: &DatasetSpec, params: &SortParams) -> Result<VideoSequence> {
    check_threshold("iou_threshold", params.iou_threshold)?;
    let mut ids = IdCounter::new(spec);
    let mut tracks: Vec<Track> = Vec::new();
    let mut out = Vec::with_capacity(seq.len());
    let mut prev: Option<u32> = None;

    for frame in seq.frames() {
        let t = frame.frame_index();
        let steps = prev.map_or(1, |p| t - p);
        prev = Some(t);
        for tr in &mut tracks {
            for _ in 0..steps {
                tr.filter.predict();
            }
            if tr.since_update > 0 {
                tr.hit_streak = 0;
            }
            tr.since_update += steps;
        }

        let mut dets = detections(frame, spec);
        dets.retain(|d| {
            let ok = d.bbox.area() > 0.0;
            if !ok {
                warn!("frame {t}: skipping zero-area detection");
            }
            ok
        });
        let predicted: Vec<_> = tracks.iter().map(|tr| tr.filter.bbox()).collect();
        let similarity: Vec<Vec<f64>> = dets
            .iter()
            .map(|d| {
                tracks
                    .iter()
                    .zip(&predicted)
                    .map(|(tr, b)| if tr.class == d.class { bbox_iou(&d.bbox, b) } else { 0.0 })
                    .collect()
            })
            .collect();
        let matches = associate(&similarity, tracks.len(), params.iou_threshold)?;

        let mut owner: Vec<Option<usize>> = vec![None; dets.len()];
        for &(d, k) in &matches {
            let tr = &mut tracks[k];
            tr.filter.update(&dets[d].bbox);
            tr.since_update = 0;
            tr.hit_streak += 1;
            owner[d] = Some(k);
        }
        for (d, slot) in owner.iter_mut().enumerate() {
            if slot.is_none() {
                let id = ids.fresh(spec.crowd_track_id())?;
                debug!("frame {t}: new track {id}");
                tracks.push(Track {
                    id,
                    class: dets[d].class,
                    filter: BoxKalman::new(&dets[d].bbox),
                    hit_streak: 1,
                    since_update: 0,
                });
                *slot = Some(tracks.len() - 1);
            }
        }
        let frame_ids: Vec<TrackId> = owner
            .iter()
            .map(|k| {
                let tr = &tracks[k.expect("every detection has a track")];
                if tr.hit_streak >= params.min_hits {
                    tr.id
                } else {
                    spec.crowd_track_id()
                }
            })
            .collect();
        out.push(relabel(frame, &dets, &frame_ids)?);
        tracks.retain(|tr| tr.since_update <= params.max_age);
    }
    VideoSequence::new(seq.sequence_id(), out)
}
