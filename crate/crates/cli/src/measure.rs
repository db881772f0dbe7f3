use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use musnoise::audio::ChannelMode;
use musnoise::eval::{measure_noise_frames, ActivityMask};
use musnoise::measures::{measure_audio, MeasureId, MeasureResult};
use serde::Serialize;

use crate::common::{classify, load_for_analysis, parse_channel, write_json, AnalysisArgs, Uncomputable};

pub const SCHEMA: &str = "musnoise.measure/1";

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Unprocessed signal.
    pub reference: PathBuf,
    /// Processed signal, time-aligned with the reference.
    pub processed: PathBuf,
    /// Measures to evaluate.
    #[arg(long, value_delimiter = ',', default_values_t = MeasureId::ALL)]
    pub measures: Vec<MeasureId>,
    /// Activity mask file (one 0/1 per frame); only frames marked 0 are used.
    #[arg(long, conflicts_with = "target")]
    pub mask: Option<PathBuf>,
    /// Target-only WAV; frames where it is above -60 dBFS are left out.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Analyze a single channel (index) or the mono mix instead of every
    /// channel.
    #[arg(long, value_parser = parse_channel)]
    pub channel: Option<ChannelMode>,
    /// Include per-frame values in the output.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Serialize)]
struct BandEntry {
    index: usize,
    low_hz: f64,
    high_hz: f64,
}

#[derive(Serialize)]
struct Entry {
    raw: f64,
    scaled: f64,
    band: Option<BandEntry>,
    n_frames: usize,
    channel: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<Option<f64>>>,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    reference: String,
    processed: String,
    sample_rate: u32,
    window: usize,
    bands: Vec<[f64; 2]>,
    frames: &'static str,
    measures: BTreeMap<MeasureId, Option<Entry>>,
    reasons: BTreeMap<MeasureId, String>,
}

pub fn run(args: MeasureArgs) -> anyhow::Result<()> {
    let settings = args.analysis.settings()?;
    let reference = load_for_analysis(&args.reference, args.channel)?;
    let processed = load_for_analysis(&args.processed, args.channel)?;
    if reference.len() != processed.len() {
        log::warn!("lengths differ ({} vs {} samples); trimming to the shorter", reference.len(), processed.len());
    }
    let len = reference.len().min(processed.len());

    let mask = match (&args.mask, &args.target) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(ActivityMask::parse(&text).with_context(|| path.display().to_string())?)
        }
        (None, Some(path)) => {
            let mut target = load_for_analysis(path, args.channel)?;
            if target.len() < len {
                bail!("{}: target is shorter than the signals", path.display());
            }
            target.truncate(len);
            Some(ActivityMask::from_target(&target, &settings.stft))
        }
        (None, None) => None,
    };

    let results = match &mask {
        Some(m) => measure_noise_frames(&args.measures, &reference, &processed, &settings, m),
        None => measure_audio(&args.measures, &reference, &processed, &settings),
    }
    .map_err(classify)?;

    let bands = settings.layout.bands();
    let mut report = Report {
        schema: SCHEMA,
        reference: args.reference.display().to_string(),
        processed: args.processed.display().to_string(),
        sample_rate: settings.stft.sample_rate(),
        window: settings.stft.window_len(),
        bands: bands.iter().map(|b| [b.low_hz, b.high_hz]).collect(),
        frames: if mask.is_some() { "noise_only" } else { "all" },
        measures: BTreeMap::new(),
        reasons: BTreeMap::new(),
    };
    for (id, r) in results {
        match r {
            Ok(MeasureResult { raw, scaled, selected_band, n_frames, frame_trace, channel, .. }) => {
                let band = selected_band.map(|i| BandEntry { index: i, low_hz: bands[i].low_hz, high_hz: bands[i].high_hz });
                let trace = if args.trace { frame_trace } else { None };
                report.measures.insert(id, Some(Entry { raw, scaled, band, n_frames, channel, trace }));
            }
            Err(e) => {
                report.measures.insert(id, None);
                report.reasons.insert(id, e.to_string());
            }
        }
    }
    write_json(&report)?;
    if report.measures.values().all(Option::is_none) {
        return Err(Uncomputable("no requested measure could be computed".into()).into());
    }
    Ok(())
}
