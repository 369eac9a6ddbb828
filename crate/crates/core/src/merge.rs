//! Fusing a semantic label map with instance annotations.
//!
//! Instance pixels overwrite the semantic map (case I). Around each instance
//! class a square dilation band is cut out: semantic pixels of the same
//! class inside the band become void (case II). Everything else keeps its
//! semantic label with the crowd id (case III).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::panoptic::{ClassId, PanopticFrame, TrackId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeConfig {
    /// Side length of the square structuring element; odd, at least 1.
    pub kernel: usize,
    /// Label written on case II pixels.
    pub void: ClassId,
    /// Instance class to semantic class; classes not listed map to themselves.
    pub class_map: BTreeMap<ClassId, ClassId>,
    /// Track id written on case II and case III pixels.
    pub crowd: TrackId,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self {
            kernel: 15,
            void: ClassId(255),
            class_map: BTreeMap::new(),
            crowd: TrackId(0),
        }
    }
}

impl MergeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kernel.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "dilation kernel must be odd and >= 1, got {}",
                self.kernel
            )));
        }
        Ok(())
    }

    fn semantic_class(&self, instance_class: ClassId) -> ClassId {
        self.class_map.get(&instance_class).copied().unwrap_or(instance_class)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergeCase {
    Instance,
    Band,
    Semantic,
}

/// Square dilation of a boolean mask, done as two 1-D passes.
pub fn dilate(mask: &[bool], height: usize, width: usize, kernel: usize) -> Vec<bool> {
    let r = kernel / 2;
    let pass = |src: &[bool], len: usize, stride: usize, lines: usize, step: usize| {
        let mut out = vec![false; src.len()];
        for line in 0..lines {
            let base = line * step;
            let mut prefix = vec![0usize; len + 1];
            for i in 0..len {
                prefix[i + 1] = prefix[i] + src[base + i * stride] as usize;
            }
            for i in 0..len {
                let lo = i.saturating_sub(r);
                let hi = (i + r + 1).min(len);
                out[base + i * stride] = prefix[hi] > prefix[lo];
            }
        }
        out
    };
    let rows = pass(mask, width, 1, height, width);
    pass(&rows, height, width, width, 1)
}

/// Case decision for every pixel.
pub fn classify(semantic: &PanopticFrame, instances: &PanopticFrame, cfg: &MergeConfig) -> Result<Vec<MergeCase>> {
    cfg.validate()?;
    semantic.check_same_dims(instances)?;
    let (h, w) = semantic.dims();
    let in_instance: Vec<bool> = instances.track().iter().map(|&t| t != cfg.crowd).collect();

    let classes: BTreeSet<ClassId> = instances
        .labels()
        .filter(|&(_, t)| t != cfg.crowd)
        .map(|(c, _)| cfg.semantic_class(c))
        .collect();
    let mut band_of: BTreeMap<ClassId, Vec<bool>> = BTreeMap::new();
    for class in classes {
        let mask: Vec<bool> = instances
            .labels()
            .map(|(c, t)| t != cfg.crowd && cfg.semantic_class(c) == class)
            .collect();
        band_of.insert(class, dilate(&mask, h, w, cfg.kernel));
    }

    Ok(semantic
        .semantic()
        .iter()
        .enumerate()
        .map(|(i, k)| {
            if in_instance[i] {
                MergeCase::Instance
            } else if band_of.get(k).is_some_and(|d| d[i]) {
                MergeCase::Band
            } else {
                MergeCase::Semantic
            }
        })
        .collect())
}

/// Merged panoptic frame; the frame index is taken from `semantic`.
pub fn merge_frame(semantic: &PanopticFrame, instances: &PanopticFrame, cfg: &MergeConfig) -> Result<PanopticFrame> {
    let cases = classify(semantic, instances, cfg)?;
    let mut sem = Vec::with_capacity(cases.len());
    let mut track = Vec::with_capacity(cases.len());
    for (i, case) in cases.iter().enumerate() {
        let (c, t) = match case {
            MergeCase::Instance => (cfg.semantic_class(instances.semantic()[i]), instances.track()[i]),
            MergeCase::Band => (cfg.void, cfg.crowd),
            MergeCase::Semantic => (semantic.semantic()[i], cfg.crowd),
        };
        sem.push(c);
        track.push(t);
    }
    PanopticFrame::new(semantic.height(), semantic.width(), semantic.frame_index(), sem, track)
}
