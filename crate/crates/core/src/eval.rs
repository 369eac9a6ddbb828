//! Dataset-level evaluation: per-sequence counts computed in parallel,
//! merged in sequence-id order and rendered into a [`MetricReport`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::info;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{Exact, ExactNumber, Rational};
use crate::io::{MetricReport, MetricValue, MetricValues, VpqSettings, REPORT_FORMAT};
use crate::legacy::{segment_counts, SegmentCounts, VpqCounts, VpqParams};
use crate::panoptic::{validate_frame, ClassId, DatasetSpec, VideoSequence};
use crate::stq::StqAccumulator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Stq,
    Aq,
    Sq,
    Vpq,
    Ptq,
    Sptq,
    Ids,
    Sids,
    Smotsa,
    Motsp,
    Pq,
    Motsa,
}

impl Metric {
    /// Every metric, in report table order.
    pub const ALL: [Metric; 12] = [
        Metric::Stq,
        Metric::Aq,
        Metric::Sq,
        Metric::Vpq,
        Metric::Ptq,
        Metric::Sptq,
        Metric::Ids,
        Metric::Sids,
        Metric::Smotsa,
        Metric::Motsp,
        Metric::Pq,
        Metric::Motsa,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Stq => "STQ",
            Metric::Aq => "AQ",
            Metric::Sq => "SQ",
            Metric::Vpq => "VPQ",
            Metric::Ptq => "PTQ",
            Metric::Sptq => "sPTQ",
            Metric::Ids => "IDS",
            Metric::Sids => "sIDS",
            Metric::Smotsa => "sMOTSA",
            Metric::Motsp => "MOTSP",
            Metric::Pq => "PQ",
            Metric::Motsa => "MOTSA",
        }
    }

    fn needs_segments(&self) -> bool {
        matches!(
            self,
            Metric::Ptq | Metric::Sptq | Metric::Ids | Metric::Sids | Metric::Smotsa | Metric::Motsp | Metric::Pq | Metric::Motsa
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let known: Vec<&str> = Metric::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidParameter(format!("unknown metric {s:?} (known: {}, all)", known.join(", ")))
            })
    }
}

/// Parses a comma-separated metric list; `all` selects everything. STQ, AQ
/// and SQ are always included. The result is in table order.
pub fn parse_metrics(list: &str) -> Result<Vec<Metric>> {
    let mut selected = vec![Metric::Stq, Metric::Aq, Metric::Sq];
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            selected.extend(Metric::ALL);
        } else {
            selected.push(item.parse()?);
        }
    }
    selected.sort();
    selected.dedup();
    Ok(selected)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOptions {
    pub metrics: Vec<Metric>,
    pub vpq: VpqParams,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            metrics: vec![Metric::Stq, Metric::Aq, Metric::Sq],
            vpq: VpqParams::default(),
            jobs: 0,
        }
    }
}

/// All counts of one sequence; mergeable.
#[derive(Debug, Clone)]
struct SequenceCounts {
    stq: StqAccumulator,
    segments: Option<SegmentCounts>,
    vpq: Option<VpqCounts>,
}

fn check_sequence(seq: &VideoSequence, spec: &DatasetSpec, role: &str) -> Result<()> {
    for frame in seq.frames() {
        if let Some(v) = validate_frame(frame, spec).first() {
            return Err(Error::InvalidSequence(format!(
                "{role} sequence {:?}, frame {}: {v}",
                seq.sequence_id(),
                frame.frame_index(),
            )));
        }
    }
    Ok(())
}

fn count_sequence(gt: &VideoSequence, pred: &VideoSequence, spec: &DatasetSpec, opts: &EvalOptions) -> Result<SequenceCounts> {
    check_sequence(gt, spec, "ground-truth")?;
    check_sequence(pred, spec, "predicted")?;
    let mut stq = StqAccumulator::new(spec);
    stq.update_sequence(gt, pred)?;
    let segments = opts
        .metrics
        .iter()
        .any(Metric::needs_segments)
        .then(|| segment_counts(gt, pred, spec))
        .transpose()?;
    let vpq = opts
        .metrics
        .contains(&Metric::Vpq)
        .then(|| crate::legacy::vpq_counts(gt, pred, spec, &opts.vpq))
        .transpose()?;
    Ok(SequenceCounts { stq, segments, vpq })
}

fn number(e: Exact) -> Option<MetricValue> {
    Some(MetricValue::Number(ExactNumber::from(e)))
}

fn rational(r: Option<Rational>) -> Option<MetricValue> {
    r.map(Exact::Rational).and_then(number)
}

fn values(counts: &SequenceCounts, spec: &DatasetSpec, metrics: &[Metric], strict: bool) -> Result<MetricValues> {
    let stq = match counts.stq.finalize() {
        Ok(r) => Some(r),
        Err(e) if strict => return Err(e),
        Err(_) => None,
    };
    let things: Vec<ClassId> = spec.thing_classes().collect();
    let ptq = counts.segments.as_ref().map(SegmentCounts::ptq);
    let pq = counts.segments.as_ref().map(SegmentCounts::pq);
    let motsa = counts.segments.as_ref().map(|s| s.motsa(&things));
    let vpq = match counts.vpq.as_ref().map(VpqCounts::finalize) {
        Some(Ok(r)) => Some(r.vpq),
        Some(Err(e)) if strict => return Err(e),
        _ => None,
    };

    let mut out = MetricValues::new();
    for m in metrics {
        let v = match m {
            Metric::Stq => stq.as_ref().and_then(|r| number(r.stq())),
            Metric::Aq => rational(stq.as_ref().map(|r| r.aq.clone())),
            Metric::Sq => rational(stq.as_ref().map(|r| r.sq.clone())),
            Metric::Vpq => rational(vpq.clone()),
            Metric::Ptq => rational(ptq.as_ref().and_then(|p| p.ptq.clone())),
            Metric::Sptq => rational(ptq.as_ref().and_then(|p| p.sptq.clone())),
            Metric::Pq => rational(pq.as_ref().and_then(|p| p.mean.clone())),
            Metric::Ids => motsa.as_ref().map(|r| MetricValue::Count(r.ids)),
            Metric::Sids => rational(motsa.as_ref().map(|r| r.sids.clone())),
            Metric::Motsa => rational(motsa.as_ref().and_then(|r| r.motsa.clone())),
            Metric::Smotsa => rational(motsa.as_ref().and_then(|r| r.smotsa.clone())),
            Metric::Motsp => rational(motsa.as_ref().and_then(|r| r.motsp.clone())),
        };
        out.insert(m.name().to_owned(), v);
    }
    Ok(out)
}

/// Evaluates the sequences named in `ids`, loading each pair with `load`
/// inside a worker. Results do not depend on `opts.jobs`.
pub fn evaluate<L>(ids: &[String], load: L, spec: &DatasetSpec, opts: &EvalOptions) -> Result<MetricReport>
where
    L: Fn(&str) -> Result<(VideoSequence, VideoSequence)> + Sync,
{
    let mut ids = ids.to_vec();
    ids.sort();
    ids.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let per_sequence: Vec<Result<SequenceCounts>> = pool.install(|| {
        ids.par_iter()
            .map(|id| {
                let (gt, pred) = load(id)?;
                info!("evaluating {id} ({} frames)", gt.len());
                count_sequence(&gt, &pred, spec, opts)
            })
            .collect()
    });

    let mut total = SequenceCounts {
        stq: StqAccumulator::new(spec),
        segments: None,
        vpq: None,
    };
    let mut sequences = BTreeMap::new();
    for (id, counts) in ids.iter().zip(per_sequence) {
        let counts = counts?;
        sequences.insert(id.clone(), values(&counts, spec, &opts.metrics, false)?);
        total.stq = total.stq.merge(&counts.stq)?;
        if let Some(s) = &counts.segments {
            total.segments.get_or_insert_with(SegmentCounts::default).merge(s);
        }
        if let Some(v) = &counts.vpq {
            total.vpq.get_or_insert_with(VpqCounts::default).merge(v);
        }
    }
    let aggregate = values(&total, spec, &opts.metrics, true)?;
    let class_iou = total
        .stq
        .finalize()?
        .per_class_iou
        .into_iter()
        .map(|(c, iou)| {
            let name = spec.class(c).map_or_else(|| c.to_string(), |i| i.name.clone());
            (name, ExactNumber::from(Exact::Rational(iou)))
        })
        .collect();

    Ok(MetricReport {
        format: REPORT_FORMAT.to_owned(),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        spec_name: spec.name().to_owned(),
        spec_fingerprint: spec.fingerprint(),
        metrics: opts.metrics.iter().map(|m| m.name().to_owned()).collect(),
        vpq: opts.metrics.contains(&Metric::Vpq).then_some(VpqSettings {
            k: opts.vpq.k,
            lambda: opts.vpq.lambda,
            full_video: opts.vpq.full_video,
        }),
        aggregate,
        class_iou,
        sequences,
    })
}

/// In-memory variant of [`evaluate`] over `(gt, pred)` pairs.
pub fn evaluate_pairs(pairs: &[(VideoSequence, VideoSequence)], spec: &DatasetSpec, opts: &EvalOptions) -> Result<MetricReport> {
    let by_id: BTreeMap<String, &(VideoSequence, VideoSequence)> =
        pairs.iter().map(|p| (p.0.sequence_id().to_owned(), p)).collect();
    if by_id.len() != pairs.len() {
        return Err(Error::InvalidParameter("duplicate sequence ids".into()));
    }
    let ids: Vec<String> = by_id.keys().cloned().collect();
    evaluate(&ids, |id| Ok(by_id[id].clone()), spec, opts)
}

/// Plain-text table: one row per sequence plus the aggregate, columns in
/// table order.
pub fn format_table(report: &MetricReport) -> String {
    let cell = |v: Option<&Option<MetricValue>>| match v {
        Some(Some(MetricValue::Count(n))) => n.to_string(),
        Some(Some(MetricValue::Number(x))) => x.value.clone(),
        _ => "-".to_owned(),
    };
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["sequence".to_owned()];
    header.extend(report.metrics.iter().cloned());
    rows.push(header);
    for (id, vals) in report.sequences.iter().chain([(&"ALL".to_owned(), &report.aggregate)]) {
        let mut row = vec![id.clone()];
        row.extend(report.metrics.iter().map(|m| cell(vals.get(m))));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
