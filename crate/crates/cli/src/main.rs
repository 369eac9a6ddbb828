use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use stepeval::eval::{evaluate, format_table, parse_metrics, EvalOptions, Metric};
use stepeval::exact::ExactNumber;
use stepeval::io::{
    list_sequences, load_spec, read_mapping, read_sequence, spec_to_toml, write_json_atomic, write_report,
    write_sequence,
};
use stepeval::legacy::VpqParams;
use stepeval::merge::{merge_frame, MergeConfig};
use stepeval::scenarios::{self, figure3, random_scenario, scenario_spec, Corruption, RandomScenarioParams};
use stepeval::trackers::{iou_associate, sort_track, IouTrackerParams, SortParams};
use stepeval::{ClassId, DatasetSpec, VideoSequence};

/// Segmentation and tracking quality for video panoptic label maps.
#[derive(Parser)]
#[command(name = "stepeval", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate predictions against ground truth.
    Eval(EvalArgs),
    /// Assign track ids to per-frame predictions.
    Track(TrackArgs),
    /// Write synthetic scenarios with known metric values.
    GenScenarios(GenArgs),
    /// Fuse semantic label maps with instance annotations.
    Merge(MergeArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth root with one directory of PNG frames per sequence.
    #[arg(long)]
    gt: PathBuf,
    /// Prediction root laid out like --gt.
    #[arg(long)]
    pred: PathBuf,
    /// Dataset spec file, or a bundled spec name (kitti-step, motchallenge-step).
    #[arg(long)]
    spec: PathBuf,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated metrics beyond STQ/AQ/SQ, or "all".
    #[arg(long, default_value = "", value_parser = parse_metric_list)]
    metrics: MetricList,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    vpq_k: u32,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    vpq_lambda: u32,
    /// Score VPQ on one window spanning each whole sequence.
    #[arg(long)]
    vpq_full_video: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// TOML file with a [sequences] table mapping gt names to pred names.
    #[arg(long)]
    mapping: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Iou,
    Sort,
}

#[derive(Args)]
struct TrackArgs {
    /// Prediction root with frame-local segment ids.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "iou")]
    method: Method,
    #[arg(long, default_value_t = 0.3)]
    iou_threshold: f64,
    /// Frames an unmatched track survives (iou method).
    #[arg(long, default_value_t = 10)]
    keep_alive: u32,
    /// Frames an unmatched track survives (sort method).
    #[arg(long, default_value_t = 10)]
    max_age: u32,
    #[arg(long, default_value_t = 1)]
    min_hits: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Figure3,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    which: Which,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random sequences.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    frames: u64,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(2..))]
    height: u64,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    width: u64,
    #[arg(long, default_value_t = 3)]
    tracks: u64,
    /// none, id_transfer, late_switch, dropout or class_flip.
    #[arg(long, default_value = "none")]
    corruption: String,
}

#[derive(Args)]
struct MergeArgs {
    /// Root of semantic label maps (class in the red channel).
    #[arg(long)]
    semantic: PathBuf,
    /// Root of instance annotations in panoptic encoding.
    #[arg(long)]
    instances: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Odd side length of the square dilation kernel.
    #[arg(long, default_value_t = 15)]
    kernel: usize,
    /// Label written on voided band pixels.
    #[arg(long, default_value_t = 255)]
    void: u16,
    /// Instance-to-semantic class pairs, e.g. "1:13,2:11".
    #[arg(long)]
    class_map: Option<String>,
}

#[derive(Clone)]
struct MetricList(Vec<Metric>);

fn parse_metric_list(s: &str) -> Result<MetricList, String> {
    parse_metrics(s).map(MetricList).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STEPEVAL_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => run_eval(a),
        Command::Track(a) => run_track(a),
        Command::GenScenarios(a) => run_gen(a),
        Command::Merge(a) => run_merge(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_spec_arg(path: &Path) -> Result<DatasetSpec> {
    load_spec(path).with_context(|| format!("loading spec {}", path.display()))
}

fn run_eval(a: EvalArgs) -> Result<()> {
    let spec = load_spec_arg(&a.spec)?;
    let mapping = match &a.mapping {
        Some(p) => read_mapping(p)?,
        None => BTreeMap::new(),
    };
    let gt_ids = list_sequences(&a.gt)?;
    let pred_ids: BTreeSet<String> = list_sequences(&a.pred)?.into_iter().collect();
    for key in mapping.keys() {
        ensure!(gt_ids.contains(key), "mapping names unknown ground-truth sequence {key:?}");
    }
    let pred_name = |gt: &str| mapping.get(gt).cloned().unwrap_or_else(|| gt.to_owned());
    let claimed: BTreeSet<String> = gt_ids.iter().map(|g| pred_name(g)).collect();
    if let Some(orphan) = pred_ids.iter().find(|p| !claimed.contains(*p)) {
        bail!("prediction sequence {orphan:?} has no ground-truth sequence");
    }
    for g in &gt_ids {
        if !pred_ids.contains(&pred_name(g)) {
            warn!("no prediction for sequence {g:?}; scoring it as all void");
        }
    }
    if gt_ids.is_empty() {
        warn!("{}: no sequences", a.gt.display());
    }

    let opts = EvalOptions {
        metrics: a.metrics.0,
        vpq: if a.vpq_full_video {
            VpqParams::full_video()
        } else {
            VpqParams { k: a.vpq_k as usize, lambda: a.vpq_lambda as usize, full_video: false }
        },
        jobs: a.jobs,
    };
    let load = |id: &str| -> stepeval::Result<(VideoSequence, VideoSequence)> {
        let gt = read_sequence(&a.gt.join(id))?;
        let pred_dir = a.pred.join(pred_name(id));
        let pred = if pred_dir.is_dir() {
            read_sequence(&pred_dir)?.with_sequence_id(id)
        } else {
            VideoSequence::empty(id)
        };
        Ok((gt, pred))
    };
    let report = evaluate(&gt_ids, load, &spec, &opts)?;
    if let Some(out) = &a.out {
        write_report(&report, out).with_context(|| format!("writing {}", out.display()))?;
        info!("report written to {}", out.display());
    }
    print!("{}", format_table(&report));
    Ok(())
}

fn run_track(a: TrackArgs) -> Result<()> {
    let spec = load_spec_arg(&a.spec)?;
    let ids = list_sequences(&a.pred)?;
    if ids.is_empty() {
        warn!("{}: no sequences to track", a.pred.display());
    }
    for id in ids {
        let seq = read_sequence(&a.pred.join(&id))?;
        let tracked = match a.method {
            Method::Iou => iou_associate(
                &seq,
                &spec,
                &IouTrackerParams { iou_threshold: a.iou_threshold, keep_alive: a.keep_alive },
            )?,
            Method::Sort => sort_track(
                &seq,
                &spec,
                &SortParams { iou_threshold: a.iou_threshold, max_age: a.max_age, min_hits: a.min_hits },
            )?,
        };
        write_sequence(&tracked, &a.out.join(&id))?;
        info!("tracked {id}");
    }
    Ok(())
}

fn write_scenario_spec(out: &Path) -> Result<()> {
    let path = out.join("scenario.spec");
    fs::write(&path, spec_to_toml(&scenario_spec())).with_context(|| format!("writing {}", path.display()))
}

fn run_gen(a: GenArgs) -> Result<()> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_scenario_spec(&a.out)?;
    match a.which {
        Which::Figure3 => {
            let mut manifest: BTreeMap<String, BTreeMap<&str, ExactNumber>> = BTreeMap::new();
            for n in 1..=5 {
                let case = figure3(n)?;
                write_sequence(&case.gt, &a.out.join("gt").join(&case.name))?;
                write_sequence(&case.pred, &a.out.join("pred").join(&case.name))?;
                let entry = manifest.entry(case.name.clone()).or_default();
                for (key, name) in [(scenarios::STQ, "STQ"), (scenarios::PTQ, "PTQ"), (scenarios::VPQ_FULL, "VPQ")] {
                    entry.insert(name, ExactNumber::from(&case.expected[key]));
                }
            }
            let doc = serde_json::json!({
                "format": "stepeval-manifest/1",
                "spec": "scenario.spec",
                "vpq_full_video": true,
                "expected": manifest,
            });
            let text = serde_json::to_string_pretty(&doc)? + "\n";
            write_json_atomic(&text, &a.out.join("manifest.json"))?;
        }
        Which::Random => {
            let corruption: Corruption = a.corruption.parse()?;
            for i in 0..a.count {
                let params = RandomScenarioParams {
                    seed: a.seed.wrapping_add(i),
                    frames: a.frames as usize,
                    height: a.height as usize,
                    width: a.width as usize,
                    tracks: a.tracks as usize,
                    corruption,
                };
                let (gt, pred) = random_scenario(&params)?;
                write_sequence(&gt, &a.out.join("gt").join(gt.sequence_id()))?;
                write_sequence(&pred, &a.out.join("pred").join(pred.sequence_id()))?;
            }
        }
    }
    Ok(())
}

fn parse_class_map(s: &str) -> Result<BTreeMap<ClassId, ClassId>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (from, to) = pair.split_once(':').with_context(|| format!("class map entry {pair:?} is not FROM:TO"))?;
            Ok((ClassId(from.trim().parse()?), ClassId(to.trim().parse()?)))
        })
        .collect()
}

fn run_merge(a: MergeArgs) -> Result<()> {
    let cfg = MergeConfig {
        kernel: a.kernel,
        void: ClassId(a.void),
        class_map: a.class_map.as_deref().map(parse_class_map).transpose()?.unwrap_or_default(),
        ..MergeConfig::default()
    };
    cfg.validate()?;
    for id in list_sequences(&a.semantic)? {
        let semantic = read_sequence(&a.semantic.join(&id))?;
        let instances = read_sequence(&a.instances.join(&id))
            .with_context(|| format!("instance annotations for sequence {id:?}"))?;
        let sem_idx: BTreeSet<u32> = semantic.frames().iter().map(|f| f.frame_index()).collect();
        let inst_idx: BTreeSet<u32> = instances.frames().iter().map(|f| f.frame_index()).collect();
        if sem_idx != inst_idx {
            let fmt = |v: Vec<&u32>| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ");
            bail!(
                "sequence {id:?}: frames missing from instances: [{}]; missing from semantic: [{}]",
                fmt(sem_idx.difference(&inst_idx).collect()),
                fmt(inst_idx.difference(&sem_idx).collect())
            );
        }
        let merged = semantic
            .frames()
            .iter()
            .zip(instances.frames())
            .map(|(s, i)| merge_frame(s, i, &cfg))
            .collect::<stepeval::Result<Vec<_>>>()?;
        write_sequence(&VideoSequence::new(id.clone(), merged)?, &a.out.join(&id))?;
        info!("merged {id}");
    }
    Ok(())
}
