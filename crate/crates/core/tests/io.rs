use std::fs;

use proptest::prelude::*;
use stepeval::io::{
    bundled_spec, list_sequences, load_spec, parse_spec, read_mapping, read_sequence, spec_to_toml,
    write_frame, write_sequence, write_json_atomic,
};
use stepeval::{ClassId, PanopticFrame, TrackId, VideoSequence};

fn arb_sequence() -> impl Strategy<Value = VideoSequence> {
    (1usize..6, 1usize..6, prop::collection::btree_set(0u32..40, 0..5)).prop_flat_map(|(h, w, indices)| {
        let n = indices.len();
        prop::collection::vec(prop::collection::vec((0u16..256, 0u32..65536), h * w), n).prop_map(move |frames| {
            let frames = indices
                .iter()
                .zip(frames)
                .map(|(&t, px)| {
                    let (c, tr): (Vec<_>, Vec<_>) = px.into_iter().map(|(c, t)| (ClassId(c), TrackId(t))).unzip();
                    PanopticFrame::new(h, w, t, c, tr).unwrap()
                })
                .collect();
            VideoSequence::new("seq", frames).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn png_round_trip(seq in arb_sequence()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq");
        write_sequence(&seq, &path).unwrap();
        prop_assert_eq!(read_sequence(&path).unwrap(), seq);
    }
}

#[test]
fn track_overflow_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = PanopticFrame::filled(2, 2, 0, ClassId(1), TrackId(65536));
    let err = write_frame(&f, &dir.path().join("000000.png")).unwrap_err();
    assert!(err.to_string().contains("000000.png"), "{err}");
}

#[test]
fn empty_directory_is_an_empty_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("0007");
    fs::create_dir(&path).unwrap();
    let seq = read_sequence(&path).unwrap();
    assert!(seq.is_empty());
    assert_eq!(seq.sequence_id(), "0007");
}

#[test]
fn duplicate_frame_index_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = PanopticFrame::filled(1, 1, 0, ClassId(0), TrackId(0));
    write_frame(&f, &dir.path().join("1.png")).unwrap();
    write_frame(&f, &dir.path().join("000001.png")).unwrap();
    let err = read_sequence(dir.path()).unwrap_err().to_string();
    assert!(err.contains("duplicate frame index 1"), "{err}");
}

#[test]
fn badly_named_frame_is_an_error_and_other_files_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let f = PanopticFrame::filled(1, 1, 0, ClassId(0), TrackId(0));
    write_frame(&f, &dir.path().join("000000.png")).unwrap();
    fs::write(dir.path().join("notes.txt"), "x").unwrap();
    assert_eq!(read_sequence(dir.path()).unwrap().len(), 1);
    write_frame(&f, &dir.path().join("frame.png")).unwrap();
    assert!(read_sequence(dir.path()).unwrap_err().to_string().contains("frame.png"));
}

#[test]
fn grayscale_png_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    image::GrayImage::new(2, 2).save(dir.path().join("000000.png")).unwrap();
    assert!(read_sequence(dir.path()).is_err());
}

#[test]
fn missing_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(read_sequence(&dir.path().join("nope")).is_err());
}

#[test]
fn bundled_specs() {
    let kitti = bundled_spec("kitti-step").unwrap().unwrap();
    assert_eq!(kitti.classes().len(), 19);
    let things: Vec<&str> = kitti.classes().iter().filter(|c| c.is_thing).map(|c| c.name.as_str()).collect();
    assert_eq!(things, ["pedestrian", "car"]);
    let mot = bundled_spec("motchallenge-step").unwrap().unwrap();
    assert_eq!(mot.classes().len(), 7);
    let things: Vec<&str> = mot.classes().iter().filter(|c| c.is_thing).map(|c| c.name.as_str()).collect();
    assert_eq!(things, ["pedestrian"]);
    assert!(bundled_spec("cityscapes").is_none());
    assert_eq!(load_spec("kitti-step".as_ref()).unwrap(), kitti);
}

const HEADER: &str = "format = \"stepeval-spec/1\"\nname = \"t\"\nignore_class_id = 255\nvoid_class_id = 255\nmax_track_id = 100\n";

#[test]
fn duplicate_class_id_reports_lines() {
    let text = format!(
        "{HEADER}\n[[classes]]\nid = 3\nname = \"a\"\nthing = false\n\n[[classes]]\nid = 3\nname = \"b\"\nthing = true\n"
    );
    let err = parse_spec(&text, "x.spec").unwrap_err().to_string();
    assert!(err.contains("x.spec:13"), "{err}");
    assert!(err.contains("line 8"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let text = format!("{HEADER}colour = 1\nclasses = []\n");
    let err = parse_spec(&text, "x.spec").unwrap_err().to_string();
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn wrong_format_is_rejected() {
    let text = HEADER.replace("stepeval-spec/1", "stepeval-spec/9") + "classes = []\n";
    assert!(parse_spec(&text, "x").is_err());
}

#[test]
fn spec_text_round_trip() {
    let kitti = bundled_spec("kitti-step").unwrap().unwrap();
    let again = parse_spec(&spec_to_toml(&kitti), "rt").unwrap();
    assert_eq!(again, kitti);
    assert_eq!(again.fingerprint(), kitti.fingerprint());
}

#[test]
fn dataset_listing_and_mapping() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["b", "a", "c"] {
        fs::create_dir(dir.path().join(name)).unwrap();
    }
    fs::write(dir.path().join("readme.txt"), "").unwrap();
    assert_eq!(list_sequences(dir.path()).unwrap(), ["a", "b", "c"]);
    let map = dir.path().join("map.toml");
    fs::write(&map, "[sequences]\na = \"pred_a\"\n").unwrap();
    assert_eq!(read_mapping(&map).unwrap()["a"], "pred_a");
    fs::write(&map, "[other]\n").unwrap();
    assert!(read_mapping(&map).is_err());
}

#[test]
fn atomic_write_replaces_content() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_json_atomic("one", &path).unwrap();
    write_json_atomic("two", &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "two");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}
