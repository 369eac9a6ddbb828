use log::debug;

use super::{associate, check_threshold, detections, mask_iou, relabel, IdCounter};
use crate::error::Result;
use crate::panoptic::{ClassId, DatasetSpec, TrackId, VideoSequence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IouTrackerParams {
    /// Minimum mask IoU for a match (δ).
    pub iou_threshold: f64,
    /// Frames an unmatched track stays available for matching (σ).
    pub keep_alive: u32,
}

impl Default for IouTrackerParams {
    fn default() -> Self {
        Self {
            iou_threshold: 0.3,
            keep_alive: 10,
        }
    }
}

struct Track {
    id: TrackId,
    class: ClassId,
    mask: Vec<usize>,
    last_frame: u32,
}

/// Links segments of consecutive frames by mask IoU.
///
/// Every frame is matched against all live tracks with a Hungarian
/// assignment on `1 - IoU`; pairs of different class or with IoU below the
/// threshold are rejected afterwards. A track survives `keep_alive` frames
/// without a match, measured in frame indices.
pub fn iou_associate(seq: &VideoSequence, spec: &DatasetSpec, params: &IouTrackerParams) -> Result<VideoSequence> {
    check_threshold("iou_threshold", params.iou_threshold)?;
    let mut ids = IdCounter::new(spec);
    let mut tracks: Vec<Track> = Vec::new();
    let mut out = Vec::with_capacity(seq.len());

    for frame in seq.frames() {
        let t = frame.frame_index();
        tracks.retain(|tr| t - tr.last_frame - 1 <= params.keep_alive);
        let dets = detections(frame, spec);
        let similarity: Vec<Vec<f64>> = dets
            .iter()
            .map(|d| {
                tracks
                    .iter()
                    .map(|tr| if tr.class == d.class { mask_iou(&d.pixels, &tr.mask) } else { 0.0 })
                    .collect()
            })
            .collect();
        let matches = associate(&similarity, tracks.len(), params.iou_threshold)?;

        let mut assigned: Vec<Option<TrackId>> = vec![None; dets.len()];
        for &(d, k) in &matches {
            assigned[d] = Some(tracks[k].id);
            tracks[k].mask = dets[d].pixels.clone();
            tracks[k].last_frame = t;
        }
        let mut frame_ids = Vec::with_capacity(dets.len());
        for (d, slot) in assigned.into_iter().enumerate() {
            let id = match slot {
                Some(id) => id,
                None => {
                    let id = ids.fresh(spec.crowd_track_id())?;
                    debug!("frame {t}: new track {id}");
                    tracks.push(Track {
                        id,
                        class: dets[d].class,
                        mask: dets[d].pixels.clone(),
                        last_frame: t,
                    });
                    id
                }
            };
            frame_ids.push(id);
        }
        out.push(relabel(frame, &dets, &frame_ids)?);
    }
    VideoSequence::new(seq.sequence_id(), out)
}
