//! Synthetic sequences with known metric values.

mod figure3;
mod oracle;
mod random;

pub use figure3::{figure3, ScenarioCase, AQ, PTQ, SQ, STQ, VPQ_FULL};
pub use oracle::{oracle_stq, OracleResult, ORACLE_PIXEL_LIMIT};
pub use random::{random_scenario, Corruption, RandomScenarioParams, GENERATOR_VERSION};

use crate::panoptic::{ClassId, ClassInfo, DatasetSpec, TrackId};

pub const ROAD: ClassId = ClassId(0);
pub const CAR: ClassId = ClassId(1);
pub const PEDESTRIAN: ClassId = ClassId(2);
pub const IGNORE: ClassId = ClassId(255);

/// Road (stuff), car and pedestrian (things); 255 is both ignore and void.
pub fn scenario_spec() -> DatasetSpec {
    DatasetSpec::new(
        "scenario",
        vec![
            ClassInfo { id: ROAD, name: "road".into(), is_thing: false },
            ClassInfo { id: CAR, name: "car".into(), is_thing: true },
            ClassInfo { id: PEDESTRIAN, name: "pedestrian".into(), is_thing: true },
        ],
        TrackId(0),
        IGNORE,
        IGNORE,
        TrackId(65535),
    )
    .expect("scenario spec is valid")
}
