//! Domain types shared by every metric: dataset specifications, dense
//! panoptic label maps, video sequences and track tubes.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Semantic class id of a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
#[repr(transparent)]
pub struct ClassId(pub u16);

/// Track (instance) id of a pixel. Scoped to one sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
#[repr(transparent)]
pub struct TrackId(pub u32);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub id: ClassId,
    pub name: String,
    pub is_thing: bool,
}

/// Class table and reserved label values of a dataset.
///
/// Stuff classes and crowd regions carry `crowd_track_id`; it is never a real
/// track identity. `ignore_class_id` marks ground-truth regions that are not
/// evaluated, `void_class_id` is the "no claim" label a prediction may emit.
/// The two may share a value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    name: String,
    classes: Vec<ClassInfo>,
    crowd_track_id: TrackId,
    ignore_class_id: ClassId,
    void_class_id: ClassId,
    max_track_id: TrackId,
    // indexed by class id; 0 = unknown, 1 = stuff, 2 = thing
    kinds: Vec<u8>,
}

const KIND_UNKNOWN: u8 = 0;
const KIND_STUFF: u8 = 1;
const KIND_THING: u8 = 2;

impl DatasetSpec {
    pub fn new(
        name: impl Into<String>,
        classes: Vec<ClassInfo>,
        crowd_track_id: TrackId,
        ignore_class_id: ClassId,
        void_class_id: ClassId,
        max_track_id: TrackId,
    ) -> Result<Self> {
        let max_class = classes
            .iter()
            .map(|c| c.id.0)
            .chain([ignore_class_id.0, void_class_id.0])
            .max()
            .unwrap_or(0) as usize;
        let mut kinds = vec![KIND_UNKNOWN; max_class + 1];
        for class in &classes {
            let slot = &mut kinds[class.id.0 as usize];
            if *slot != KIND_UNKNOWN {
                return Err(Error::InvalidSpec(format!(
                    "class id {} is declared more than once",
                    class.id
                )));
            }
            *slot = if class.is_thing { KIND_THING } else { KIND_STUFF };
        }
        for (what, id) in [("ignore", ignore_class_id), ("void", void_class_id)] {
            if kinds[id.0 as usize] != KIND_UNKNOWN {
                return Err(Error::InvalidSpec(format!(
                    "{what} class id {id} collides with a declared class"
                )));
            }
        }
        if crowd_track_id > max_track_id {
            return Err(Error::InvalidSpec(format!(
                "crowd track id {crowd_track_id} exceeds max_track_id {max_track_id}"
            )));
        }
        Ok(Self {
            name: name.into(),
            classes,
            crowd_track_id,
            ignore_class_id,
            void_class_id,
            max_track_id,
            kinds,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    pub fn crowd_track_id(&self) -> TrackId {
        self.crowd_track_id
    }

    pub fn ignore_class_id(&self) -> ClassId {
        self.ignore_class_id
    }

    pub fn void_class_id(&self) -> ClassId {
        self.void_class_id
    }

    pub fn max_track_id(&self) -> TrackId {
        self.max_track_id
    }

    fn kind(&self, class: ClassId) -> u8 {
        self.kinds
            .get(class.0 as usize)
            .copied()
            .unwrap_or(KIND_UNKNOWN)
    }

    #[inline]
    pub fn is_thing(&self, class: ClassId) -> bool {
        self.kind(class) == KIND_THING
    }

    #[inline]
    pub fn is_stuff(&self, class: ClassId) -> bool {
        self.kind(class) == KIND_STUFF
    }

    /// Declared classes only; ignore and void are reserved labels.
    pub fn is_declared(&self, class: ClassId) -> bool {
        self.kind(class) != KIND_UNKNOWN
    }

    pub fn class(&self, id: ClassId) -> Option<&ClassInfo> {
        self.classes.iter().find(|c| c.id == id)
    }

    pub fn thing_classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.classes.iter().filter(|c| c.is_thing).map(|c| c.id)
    }

    /// Stable hex digest of the spec contents.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.name.as_bytes());
        hasher.update([0]);
        for class in &self.classes {
            hasher.update(class.id.0.to_le_bytes());
            hasher.update(class.name.as_bytes());
            hasher.update([0, class.is_thing as u8]);
        }
        hasher.update(self.crowd_track_id.0.to_le_bytes());
        hasher.update(self.ignore_class_id.0.to_le_bytes());
        hasher.update(self.void_class_id.0.to_le_bytes());
        hasher.update(self.max_track_id.0.to_le_bytes());
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Dense per-pixel (class, track) map of one video frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanopticFrame {
    height: usize,
    width: usize,
    frame_index: u32,
    semantic: Vec<ClassId>,
    track: Vec<TrackId>,
}

impl PanopticFrame {
    pub fn new(
        height: usize,
        width: usize,
        frame_index: u32,
        semantic: Vec<ClassId>,
        track: Vec<TrackId>,
    ) -> Result<Self> {
        let n = height * width;
        if semantic.len() != n || track.len() != n {
            return Err(Error::InvalidSequence(format!(
                "frame {frame_index}: {height}x{width} needs {n} labels, got {} semantic / {} track",
                semantic.len(),
                track.len()
            )));
        }
        Ok(Self {
            height,
            width,
            frame_index,
            semantic,
            track,
        })
    }

    /// Frame with every pixel set to the same label.
    pub fn filled(height: usize, width: usize, frame_index: u32, class: ClassId, track: TrackId) -> Self {
        Self {
            height,
            width,
            frame_index,
            semantic: vec![class; height * width],
            track: vec![track; height * width],
        }
    }

    /// Builds a frame from a per-pixel labelling function `f(x, y)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        frame_index: u32,
        mut f: impl FnMut(usize, usize) -> (ClassId, TrackId),
    ) -> Self {
        let n = height * width;
        let mut semantic = Vec::with_capacity(n);
        let mut track = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                let (c, t) = f(x, y);
                semantic.push(c);
                track.push(t);
            }
        }
        Self {
            height,
            width,
            frame_index,
            semantic,
            track,
        }
    }

    /// The all-void prediction standing in for a missing frame.
    pub fn void_like(other: &PanopticFrame, spec: &DatasetSpec) -> Self {
        Self::filled(
            other.height,
            other.width,
            other.frame_index,
            spec.void_class_id(),
            spec.crowd_track_id(),
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.semantic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.semantic.is_empty()
    }

    pub fn frame_index(&self) -> u32 {
        self.frame_index
    }

    pub fn with_frame_index(mut self, frame_index: u32) -> Self {
        self.frame_index = frame_index;
        self
    }

    pub fn semantic(&self) -> &[ClassId] {
        &self.semantic
    }

    pub fn track(&self) -> &[TrackId] {
        &self.track
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (ClassId, TrackId) {
        let i = y * self.width + x;
        (self.semantic[i], self.track[i])
    }

    /// Iterates `(class, track)` in row-major order.
    pub fn labels(&self) -> impl Iterator<Item = (ClassId, TrackId)> + '_ {
        self.semantic.iter().copied().zip(self.track.iter().copied())
    }

    /// Returns a copy with every label rewritten by `f`.
    pub fn map_labels(&self, mut f: impl FnMut(ClassId, TrackId) -> (ClassId, TrackId)) -> Self {
        let (semantic, track) = self.labels().map(|(c, t)| f(c, t)).unzip();
        Self {
            height: self.height,
            width: self.width,
            frame_index: self.frame_index,
            semantic,
            track,
        }
    }

    pub fn into_parts(self) -> (Vec<ClassId>, Vec<TrackId>) {
        (self.semantic, self.track)
    }

    pub(crate) fn check_same_dims(&self, other: &PanopticFrame) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }
}

/// Ordered frames of one video. Track ids are scoped to the sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoSequence {
    sequence_id: String,
    frames: Vec<PanopticFrame>,
}

impl VideoSequence {
    pub fn new(sequence_id: impl Into<String>, frames: Vec<PanopticFrame>) -> Result<Self> {
        let sequence_id = sequence_id.into();
        for pair in frames.windows(2) {
            if pair[1].frame_index() <= pair[0].frame_index() {
                return Err(Error::InvalidSequence(format!(
                    "{sequence_id}: frame indices must be strictly increasing ({} then {})",
                    pair[0].frame_index(),
                    pair[1].frame_index()
                )));
            }
            if pair[1].dims() != pair[0].dims() {
                return Err(Error::InvalidSequence(format!(
                    "{sequence_id}: frame {} is {:?}, expected {:?}",
                    pair[1].frame_index(),
                    pair[1].dims(),
                    pair[0].dims()
                )));
            }
        }
        Ok(Self { sequence_id, frames })
    }

    pub fn empty(sequence_id: impl Into<String>) -> Self {
        Self {
            sequence_id: sequence_id.into(),
            frames: Vec::new(),
        }
    }

    pub fn sequence_id(&self) -> &str {
        &self.sequence_id
    }

    pub fn frames(&self) -> &[PanopticFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, frame_index: u32) -> Option<&PanopticFrame> {
        self.frames
            .binary_search_by_key(&frame_index, |f| f.frame_index())
            .ok()
            .map(|i| &self.frames[i])
    }

    pub fn into_frames(self) -> Vec<PanopticFrame> {
        self.frames
    }

    pub fn with_sequence_id(mut self, sequence_id: impl Into<String>) -> Self {
        self.sequence_id = sequence_id.into();
        self
    }

    /// Pairs every frame of `self` (ground truth) with the prediction frame of
    /// the same index; missing predictions are replaced by all-void frames.
    pub fn align<'a>(
        &'a self,
        pred: &'a VideoSequence,
        spec: &'a DatasetSpec,
    ) -> impl Iterator<Item = (&'a PanopticFrame, std::borrow::Cow<'a, PanopticFrame>)> + 'a {
        self.frames.iter().map(move |gt| {
            let pred = match pred.frame(gt.frame_index()) {
                Some(p) => std::borrow::Cow::Borrowed(p),
                None => std::borrow::Cow::Owned(PanopticFrame::void_like(gt, spec)),
            };
            (gt, pred)
        })
    }
}

/// Class-agnostic pixel multiset of one track across a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackTube {
    pub sequence_id: String,
    pub track_id: TrackId,
    pub size: u64,
    pub per_frame_sizes: BTreeMap<u32, u64>,
}

/// One tube per thing track of `seq`; crowd pixels are not a track.
pub fn extract_tubes(seq: &VideoSequence, spec: &DatasetSpec) -> BTreeMap<TrackId, TrackTube> {
    let mut tubes: BTreeMap<TrackId, TrackTube> = BTreeMap::new();
    for frame in seq.frames() {
        for (class, track) in frame.labels() {
            if !spec.is_thing(class) || track == spec.crowd_track_id() {
                continue;
            }
            let tube = tubes.entry(track).or_insert_with(|| TrackTube {
                sequence_id: seq.sequence_id().to_owned(),
                track_id: track,
                size: 0,
                per_frame_sizes: BTreeMap::new(),
            });
            tube.size += 1;
            *tube.per_frame_sizes.entry(frame.frame_index()).or_insert(0) += 1;
        }
    }
    tubes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    UnknownClass { class: ClassId },
    StuffWithTrack { class: ClassId },
    IgnoreWithTrack,
    VoidWithTrack,
    TrackOutOfRange { class: ClassId },
}

/// An invariant breach, aggregated over all pixels of one kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub pixels: u64,
    /// First offending pixel as `(x, y)`.
    pub first: (usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y) = self.first;
        match self.kind {
            ViolationKind::UnknownClass { class } => write!(f, "unknown class id {class}"),
            ViolationKind::StuffWithTrack { class } => {
                write!(f, "stuff class {class} carries a track id")
            }
            ViolationKind::IgnoreWithTrack => write!(f, "ignore label carries a track id"),
            ViolationKind::VoidWithTrack => write!(f, "void label carries a track id"),
            ViolationKind::TrackOutOfRange { class } => {
                write!(f, "class {class} has a track id above max_track_id")
            }
        }?;
        write!(f, " ({} px, first at x={x} y={y})", self.pixels)
    }
}

/// Checks every pixel against the invariants of `spec`. Empty iff valid.
pub fn validate_frame(frame: &PanopticFrame, spec: &DatasetSpec) -> Vec<Violation> {
    let crowd = spec.crowd_track_id();
    let mut found: BTreeMap<ViolationKind, Violation> = BTreeMap::new();
    for (i, (class, track)) in frame.labels().enumerate() {
        let kind = if class == spec.ignore_class_id() {
            (track != crowd).then_some(ViolationKind::IgnoreWithTrack)
        } else if class == spec.void_class_id() {
            (track != crowd).then_some(ViolationKind::VoidWithTrack)
        } else if !spec.is_declared(class) {
            Some(ViolationKind::UnknownClass { class })
        } else if spec.is_stuff(class) && track != crowd {
            Some(ViolationKind::StuffWithTrack { class })
        } else if track > spec.max_track_id() {
            Some(ViolationKind::TrackOutOfRange { class })
        } else {
            None
        };
        if let Some(kind) = kind {
            found
                .entry(kind)
                .or_insert(Violation {
                    kind,
                    pixels: 0,
                    first: (i % frame.width(), i / frame.width()),
                })
                .pixels += 1;
        }
    }
    found.into_values().collect()
}
