use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::panoptic::{ClassId, ClassInfo, DatasetSpec, TrackId};

pub const SPEC_FORMAT: &str = "stepeval-spec/1";

/// Names and contents of the spec files shipped with the crate.
pub const BUNDLED_SPECS: [(&str, &str); 2] = [
    ("kitti-step", include_str!("../../specs/kitti-step.spec")),
    ("motchallenge-step", include_str!("../../specs/motchallenge-step.spec")),
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    format: Spanned<String>,
    name: String,
    #[serde(default)]
    crowd_track_id: u32,
    ignore_class_id: u16,
    void_class_id: u16,
    max_track_id: u32,
    classes: Vec<ClassEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    id: Spanned<u16>,
    name: String,
    thing: bool,
}

#[derive(Serialize)]
struct SpecOut<'a> {
    format: &'a str,
    name: &'a str,
    crowd_track_id: u32,
    ignore_class_id: u16,
    void_class_id: u16,
    max_track_id: u32,
    classes: Vec<ClassOut<'a>>,
}

#[derive(Serialize)]
struct ClassOut<'a> {
    id: u16,
    name: &'a str,
    thing: bool,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parses a spec document; `origin` names it in error messages.
pub fn parse_spec(text: &str, origin: &str) -> Result<DatasetSpec> {
    let file: SpecFile =
        toml::from_str(text).map_err(|e| Error::InvalidSpec(format!("{origin}: {e}")))?;
    if file.format.get_ref() != SPEC_FORMAT {
        return Err(Error::InvalidSpec(format!(
            "{origin}:{}: unsupported format {:?}, expected {SPEC_FORMAT:?}",
            line_of(text, file.format.span().start),
            file.format.get_ref()
        )));
    }
    let mut seen: BTreeMap<u16, usize> = BTreeMap::new();
    for class in &file.classes {
        let line = line_of(text, class.id.span().start);
        if let Some(first) = seen.insert(*class.id.get_ref(), line) {
            return Err(Error::InvalidSpec(format!(
                "{origin}:{line}: class id {} already declared on line {first}",
                class.id.get_ref()
            )));
        }
    }
    let classes = file
        .classes
        .into_iter()
        .map(|c| ClassInfo {
            id: ClassId(c.id.into_inner()),
            name: c.name,
            is_thing: c.thing,
        })
        .collect();
    DatasetSpec::new(
        file.name,
        classes,
        TrackId(file.crowd_track_id),
        ClassId(file.ignore_class_id),
        ClassId(file.void_class_id),
        TrackId(file.max_track_id),
    )
    .map_err(|e| Error::InvalidSpec(format!("{origin}: {e}")))
}

/// Loads a spec file, or a bundled spec when `path` is one of the bundled
/// names and no such file exists.
pub fn load_spec(path: &Path) -> Result<DatasetSpec> {
    if !path.exists() {
        if let Some(spec) = path.to_str().and_then(bundled_spec) {
            return spec;
        }
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spec(&text, &path.display().to_string())
}

pub fn bundled_spec(name: &str) -> Option<Result<DatasetSpec>> {
    BUNDLED_SPECS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_spec(text, n))
}

pub fn spec_to_toml(spec: &DatasetSpec) -> String {
    let out = SpecOut {
        format: SPEC_FORMAT,
        name: spec.name(),
        crowd_track_id: spec.crowd_track_id().0,
        ignore_class_id: spec.ignore_class_id().0,
        void_class_id: spec.void_class_id().0,
        max_track_id: spec.max_track_id().0,
        classes: spec
            .classes()
            .iter()
            .map(|c| ClassOut { id: c.id.0, name: &c.name, thing: c.is_thing })
            .collect(),
    };
    toml::to_string(&out).expect("spec serializes")
}
