//! Video Panoptic Quality over spans of frames.
//!
//! For span length k the frames `t, t+λ, …, t+(k-1)λ` form one window; every
//! `(class, track)` segment becomes a 3-D tube over the window, tubes are
//! matched by 3-D IoU > 0.5, and per-class counts are pooled over all windows
//! before forming the PQ ratio.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::{self, ratio, Rational};
use crate::legacy::segments::{match_segments, PqCounts};
use crate::matching::{overlap, OverlapMode, OverlapTable};
use crate::panoptic::{ClassId, DatasetSpec, VideoSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VpqParams {
    /// Largest span length; spans 1..=k are evaluated.
    pub k: usize,
    /// Frame stride inside a span.
    pub lambda: usize,
    /// Single window covering the whole sequence instead of short spans.
    pub full_video: bool,
}

impl Default for VpqParams {
    fn default() -> Self {
        Self {
            k: 4,
            lambda: 5,
            full_video: false,
        }
    }
}

impl VpqParams {
    pub fn full_video() -> Self {
        Self {
            k: 1,
            lambda: 1,
            full_video: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.lambda == 0 {
            return Err(Error::InvalidParameter(format!(
                "VPQ needs k >= 1 and lambda >= 1 (got k={}, lambda={})",
                self.k, self.lambda
            )));
        }
        Ok(())
    }
}

/// Pooled per-class counts for each span length. Mergeable across sequences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VpqCounts {
    pub per_span: BTreeMap<usize, BTreeMap<ClassId, PqCounts>>,
    pub windows: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VpqResult {
    pub vpq: Rational,
    /// Span length → mean over classes of the pooled PQ ratio.
    pub per_span: BTreeMap<usize, Rational>,
}

impl VpqCounts {
    pub fn merge(&mut self, other: &VpqCounts) {
        for (k, classes) in &other.per_span {
            let dst = self.per_span.entry(*k).or_default();
            for (c, counts) in classes {
                dst.entry(*c).or_default().add(counts);
            }
        }
        for (k, n) in &other.windows {
            *self.windows.entry(*k).or_insert(0) += n;
        }
    }

    pub fn finalize(&self) -> Result<VpqResult> {
        let mut per_span = BTreeMap::new();
        for (k, classes) in &self.per_span {
            let scores: Vec<Rational> = classes.values().filter_map(PqCounts::pq).collect();
            if scores.is_empty() {
                continue;
            }
            let n = scores.len() as u64;
            per_span.insert(*k, exact::sum(scores) / ratio(n, 1));
        }
        if per_span.is_empty() {
            return Err(Error::InvalidSequence("VPQ: no window fits any sequence".into()));
        }
        let n = per_span.len() as u64;
        Ok(VpqResult {
            vpq: exact::sum(per_span.values().cloned().collect()) / ratio(n, 1),
            per_span,
        })
    }
}

/// Window counts of one aligned sequence pair.
pub fn vpq_counts(
    gt: &VideoSequence,
    pred: &VideoSequence,
    spec: &DatasetSpec,
    params: &VpqParams,
) -> Result<VpqCounts> {
    params.validate()?;
    let tables: Vec<OverlapTable> = gt
        .align(pred, spec)
        .map(|(g, p)| overlap(g, &p, OverlapMode::Segment, spec))
        .collect::<Result<_>>()?;
    let n = tables.len();
    let mut counts = VpqCounts::default();

    let mut windows: Vec<(usize, Vec<usize>)> = Vec::new();
    if params.full_video {
        if n > 0 {
            windows.push((1, (0..n).collect()));
        }
    } else {
        for k in 1..=params.k {
            let span = (k - 1) * params.lambda;
            for start in 0..n.saturating_sub(span) {
                windows.push((k, (0..k).map(|i| start + i * params.lambda).collect()));
            }
        }
    }

    for (k, frames) in windows {
        let mut table = OverlapTable::new(OverlapMode::Segment);
        for &f in &frames {
            table.add(&tables[f]);
        }
        let matched = match_segments(&table);
        let dst = counts.per_span.entry(k).or_default();
        for (c, pc) in &matched.counts {
            dst.entry(*c).or_default().add(pc);
        }
        *counts.windows.entry(k).or_insert(0) += 1;
    }
    Ok(counts)
}

pub fn vpq(gt: &VideoSequence, pred: &VideoSequence, spec: &DatasetSpec, params: &VpqParams) -> Result<VpqResult> {
    vpq_counts(gt, pred, spec, params)?.finalize()
}
