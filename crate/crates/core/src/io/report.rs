use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactNumber;

pub const REPORT_FORMAT: &str = "stepeval-report/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Count(u64),
    Number(ExactNumber),
}

/// Metric name to value; `None` where the metric is undefined.
pub type MetricValues = BTreeMap<String, Option<MetricValue>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VpqSettings {
    pub k: usize,
    pub lambda: usize,
    pub full_video: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricReport {
    pub format: String,
    pub tool_version: String,
    pub spec_name: String,
    pub spec_fingerprint: String,
    pub metrics: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vpq: Option<VpqSettings>,
    pub aggregate: MetricValues,
    /// Class name to IoU over all sequences.
    pub class_iou: BTreeMap<String, ExactNumber>,
    pub sequences: BTreeMap<String, MetricValues>,
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_json_atomic(contents: &str, path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_report(report: &MetricReport, path: &Path) -> Result<()> {
    write_json_atomic(&report.to_json(), path)
}
