//! Seeded synthetic sequences for property tests.
//!
//! Generator version 1: `rand_chacha::ChaCha8Rng` seeded with
//! `seed_from_u64(seed)`, draws taken in the order documented on
//! [`random_scenario`]. Any change to the draw order bumps
//! [`GENERATOR_VERSION`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::panoptic::{ClassId, PanopticFrame, TrackId, VideoSequence};
use crate::scenarios::{scenario_spec, CAR, IGNORE, PEDESTRIAN, ROAD};

pub const GENERATOR_VERSION: u32 = 1;

/// Error pattern applied to the prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corruption {
    None,
    /// One predicted id covers two ground-truth tracks.
    IdTransfer,
    /// A track receives a fresh id from some frame onwards.
    LateSwitch,
    /// A track is predicted as void in a random subset of its frames.
    Dropout,
    /// A track is predicted with the other thing class, ids untouched.
    ClassFlip,
}

impl Corruption {
    pub const ALL: [Corruption; 5] = [
        Corruption::None,
        Corruption::IdTransfer,
        Corruption::LateSwitch,
        Corruption::Dropout,
        Corruption::ClassFlip,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Corruption::None => "none",
            Corruption::IdTransfer => "id_transfer",
            Corruption::LateSwitch => "late_switch",
            Corruption::Dropout => "dropout",
            Corruption::ClassFlip => "class_flip",
        }
    }
}

impl fmt::Display for Corruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Corruption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Corruption::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown corruption {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomScenarioParams {
    pub seed: u64,
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub tracks: usize,
    pub corruption: Corruption,
}

#[derive(Debug, Clone)]
struct Rect {
    id: u32,
    class: ClassId,
    x: usize,
    w: usize,
    h: usize,
    y0: usize,
    vy: i64,
    first: usize,
    last: usize,
}

impl Rect {
    fn y_at(&self, t: usize, rows: usize) -> usize {
        // bounce between 0 and rows - h
        let span = (rows - self.h) as i64;
        if span == 0 || self.vy == 0 {
            return self.y0;
        }
        let period = 2 * span;
        let raw = (self.y0 as i64 + self.vy * t as i64).rem_euclid(period);
        (if raw > span { period - raw } else { raw }) as usize
    }
}

/// Ground truth of moving rectangles plus a corrupted copy as prediction.
///
/// Each track owns a vertical band of width `width / tracks`, so tracks never
/// overlap. Rows `0..height-1` hold road and tracks; the bottom row holds an
/// ignore strip, a car crowd strip and road. Per track the generator draws,
/// in order: width, height, x offset, y start, vertical velocity, class,
/// first frame, last frame. The corruption then draws its own values.
pub fn random_scenario(params: &RandomScenarioParams) -> Result<(VideoSequence, VideoSequence)> {
    let RandomScenarioParams {
        seed,
        frames,
        height,
        width,
        tracks,
        corruption,
    } = *params;
    if frames == 0 || height == 0 || width == 0 {
        return Err(Error::InvalidParameter("scenario dimensions must be positive".into()));
    }
    if height < 2 {
        return Err(Error::InvalidParameter("scenario needs at least 2 rows".into()));
    }
    let rows = height - 1;
    let band = width.checked_div(tracks).unwrap_or(width);
    if tracks > 0 && band == 0 {
        return Err(Error::InvalidParameter(format!(
            "{tracks} tracks cannot fit side by side in width {width}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rects: Vec<Rect> = (0..tracks)
        .map(|i| {
            let w = rng.random_range(1..=band);
            let h = rng.random_range(1..=rows.div_ceil(2));
            let x = i * band + rng.random_range(0..=band - w);
            let y0 = rng.random_range(0..=rows - h);
            let vy = rng.random_range(-1i64..=1);
            let class = if rng.random_bool(0.5) { CAR } else { PEDESTRIAN };
            let first = rng.random_range(0..frames);
            let last = rng.random_range(first..frames);
            Rect {
                id: i as u32 + 1,
                class,
                x,
                w,
                h,
                y0,
                vy,
                first,
                last,
            }
        })
        .collect();

    let render = |t: usize, rects: &[Rect]| {
        PanopticFrame::from_fn(height, width, t as u32, |x, y| {
            if y == rows {
                return match x * 3 / width {
                    0 => (IGNORE, TrackId(0)),
                    1 => (CAR, TrackId(0)),
                    _ => (ROAD, TrackId(0)),
                };
            }
            for r in rects {
                if (r.first..=r.last).contains(&t) && (r.x..r.x + r.w).contains(&x) {
                    let top = r.y_at(t, rows);
                    if (top..top + r.h).contains(&y) {
                        return (r.class, TrackId(r.id));
                    }
                }
            }
            (ROAD, TrackId(0))
        })
    };

    let gt_frames: Vec<PanopticFrame> = (0..frames).map(|t| render(t, &rects)).collect();
    let spec = scenario_spec();
    let void = spec.void_class_id();

    let pred_frames: Vec<PanopticFrame> = match (corruption, rects.len()) {
        (Corruption::None, _) | (_, 0) => gt_frames.clone(),
        (Corruption::IdTransfer, n) if n < 2 => gt_frames.clone(),
        (Corruption::IdTransfer, n) => {
            let a = rng.random_range(0..n) as u32 + 1;
            let b = (a + rng.random_range(0..n as u32 - 1)) % n as u32 + 1;
            gt_frames
                .iter()
                .map(|f| f.map_labels(|c, t| if t == TrackId(b) { (c, TrackId(a)) } else { (c, t) }))
                .collect()
        }
        (Corruption::LateSwitch, n) => {
            let r = &rects[rng.random_range(0..n)];
            let from = rng.random_range(r.first..=r.last);
            let fresh = TrackId(n as u32 + 1);
            gt_frames
                .iter()
                .enumerate()
                .map(|(t, f)| {
                    f.map_labels(|c, id| if t >= from && id == TrackId(r.id) { (c, fresh) } else { (c, id) })
                })
                .collect()
        }
        (Corruption::Dropout, n) => {
            let r = &rects[rng.random_range(0..n)];
            let dropped: Vec<bool> = (0..frames).map(|_| rng.random_bool(0.5)).collect();
            gt_frames
                .iter()
                .enumerate()
                .map(|(t, f)| {
                    f.map_labels(|c, id| {
                        if dropped[t] && id == TrackId(r.id) {
                            (void, TrackId(0))
                        } else {
                            (c, id)
                        }
                    })
                })
                .collect()
        }
        (Corruption::ClassFlip, n) => {
            let r = &rects[rng.random_range(0..n)];
            let flipped = if r.class == CAR { PEDESTRIAN } else { CAR };
            gt_frames
                .iter()
                .map(|f| f.map_labels(|c, id| if id == TrackId(r.id) { (flipped, id) } else { (c, id) }))
                .collect()
        }
    };

    let name = format!("random-{seed}");
    Ok((
        VideoSequence::new(name.clone(), gt_frames)?,
        VideoSequence::new(name, pred_frames)?,
    ))
}
