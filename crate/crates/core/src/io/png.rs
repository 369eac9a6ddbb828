use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use log::{debug, warn};

use crate::error::{Error, Result};
use crate::panoptic::{ClassId, PanopticFrame, TrackId, VideoSequence};

/// Channel layout of a panoptic PNG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PngEncoding {
    /// R = class id, G = track id high byte, B = track id low byte.
    #[default]
    RgbSemanticTrack,
}

impl PngEncoding {
    pub fn max_class_id(&self) -> ClassId {
        ClassId(u8::MAX as u16)
    }

    pub fn max_track_id(&self) -> TrackId {
        TrackId(u16::MAX as u32)
    }

    pub fn encode(&self, frame: &PanopticFrame) -> Result<RgbImage> {
        let mut img = RgbImage::new(frame.width() as u32, frame.height() as u32);
        for (i, (class, track)) in frame.labels().enumerate() {
            if class > self.max_class_id() || track > self.max_track_id() {
                return Err(Error::InvalidParameter(format!(
                    "label ({class}, {track}) at pixel ({}, {}) does not fit 8-bit class / 16-bit track encoding",
                    i % frame.width(),
                    i / frame.width()
                )));
            }
            let x = (i % frame.width()) as u32;
            let y = (i / frame.width()) as u32;
            img.put_pixel(x, y, Rgb([class.0 as u8, (track.0 >> 8) as u8, track.0 as u8]));
        }
        Ok(img)
    }

    pub fn decode(&self, img: &RgbImage, frame_index: u32) -> Result<PanopticFrame> {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let (sem, track) = img
            .pixels()
            .map(|Rgb([r, g, b])| (ClassId(*r as u16), TrackId(((*g as u32) << 8) | *b as u32)))
            .unzip();
        PanopticFrame::new(h, w, frame_index, sem, track)
    }
}

pub fn frame_file_name(frame_index: u32) -> String {
    format!("{frame_index:06}.png")
}

/// Frame index of a file named `<digits>.png`.
pub fn parse_frame_index(file_name: &str) -> Option<u32> {
    let stem = file_name.strip_suffix(".png")?;
    if stem.is_empty() || !stem.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    stem.parse().ok()
}

pub fn write_frame(frame: &PanopticFrame, path: &Path) -> Result<()> {
    let img = PngEncoding::default()
        .encode(frame)
        .map_err(|e| Error::file(path, e.to_string()))?;
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::file(path, e.to_string()))
}

pub fn read_frame(path: &Path, frame_index: u32) -> Result<PanopticFrame> {
    let img = image::open(path).map_err(|e| Error::file(path, e.to_string()))?;
    if !matches!(img, image::DynamicImage::ImageRgb8(_)) {
        return Err(Error::file(path, format!("expected 8-bit RGB PNG, found {:?}", img.color())));
    }
    PngEncoding::default()
        .decode(&img.into_rgb8(), frame_index)
        .map_err(|e| Error::file(path, e.to_string()))
}

/// Reads every `<index>.png` in `dir`; the directory name is the sequence id.
/// Other files are skipped.
pub fn read_sequence(dir: &Path) -> Result<VideoSequence> {
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut files: BTreeMap<u32, PathBuf> = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if !name.ends_with(".png") {
            debug!("skipping {}", path.display());
            continue;
        }
        let Some(index) = parse_frame_index(&name) else {
            return Err(Error::file(&path, "frame file name must be <frame index>.png"));
        };
        if let Some(prev) = files.insert(index, path.clone()) {
            return Err(Error::file(
                &path,
                format!("duplicate frame index {index} (also {})", prev.display()),
            ));
        }
    }
    if files.is_empty() {
        warn!("{}: no frames", dir.display());
    }
    let frames = files
        .iter()
        .map(|(&index, path)| read_frame(path, index))
        .collect::<Result<Vec<_>>>()?;
    VideoSequence::new(id, frames).map_err(|e| Error::file(dir, e.to_string()))
}

/// Writes one PNG per frame into `dir`, creating it if needed.
pub fn write_sequence(seq: &VideoSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for frame in seq.frames() {
        write_frame(frame, &dir.join(frame_file_name(frame.frame_index())))?;
    }
    Ok(())
}
