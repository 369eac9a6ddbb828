//! On-disk formats: panoptic PNG frames, dataset directories, dataset spec
//! files and metric reports.

mod dataset;
mod png;
mod report;
mod spec_file;

pub use dataset::{list_sequences, read_mapping};
pub use png::{
    frame_file_name, parse_frame_index, read_frame, read_sequence, write_frame, write_sequence,
    PngEncoding,
};
pub use report::{write_json_atomic, write_report, MetricReport, MetricValue, MetricValues, VpqSettings, REPORT_FORMAT};
pub use spec_file::{bundled_spec, load_spec, parse_spec, spec_to_toml, BUNDLED_SPECS, SPEC_FORMAT};
