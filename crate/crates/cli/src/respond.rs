use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use musnoise::audio::ANALYSIS_RATE;
use musnoise::eval::{response_score, run_response_experiment, ExperimentItem, ResponseScore, DEFAULT_LEVELS};
use musnoise::measures::MeasureId;
use musnoise::synth::test_set;
use serde::Serialize;

use crate::common::{classify, load_for_analysis, write_json, AnalysisArgs, Uncomputable};

pub const SCHEMA: &str = "musnoise.respond/1";
pub const CSV_SCHEMA: &str = "musnoise.responses/1";

#[derive(Debug, Args)]
pub struct RespondArgs {
    /// Directory of WAV items.
    #[arg(required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub items: Option<PathBuf>,
    /// Use this many generated speech-over-background items instead.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Length of each generated item in seconds.
    #[arg(long, default_value_t = 5.0, requires = "synthetic")]
    pub duration: f64,
    /// Zeroing percentages, strictly ascending.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LEVELS)]
    pub levels: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = MeasureId::ALL)]
    pub measures: Vec<MeasureId>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the long-format response table (item, level, measure, value)
    /// here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Serialize)]
struct Curve {
    score: Option<ResponseScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    items: usize,
    mean: Vec<f64>,
    std: Vec<f64>,
}

#[derive(Serialize)]
struct Skipped {
    item: String,
    measure: Option<MeasureId>,
    reason: String,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    seed: u64,
    levels: Vec<f64>,
    items: Vec<String>,
    measures: BTreeMap<MeasureId, Option<Curve>>,
    skipped: Vec<Skipped>,
}

fn load_dir(dir: &Path) -> anyhow::Result<Vec<ExperimentItem>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")));
    paths.sort();
    if paths.is_empty() {
        bail!("{}: no WAV files", dir.display());
    }
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            Ok(ExperimentItem { name, audio: load_for_analysis(p, None)? })
        })
        .collect()
}

pub fn run(args: RespondArgs) -> anyhow::Result<()> {
    let settings = args.analysis.settings()?;
    let items = match (&args.items, args.synthetic) {
        (Some(dir), _) => load_dir(dir)?,
        (None, Some(0)) => bail!("--synthetic needs at least one item"),
        (None, Some(n)) => test_set(n, args.duration, ANALYSIS_RATE, args.seed),
        (None, None) => unreachable!("clap requires one of the two"),
    };
    log::info!("{} items x {} levels x {} measures", items.len(), args.levels.len(), args.measures.len());
    let exp = run_response_experiment(&items, &args.levels, &args.measures, args.seed, &settings).map_err(classify)?;

    if let Some(path) = &args.csv {
        write_csv(path, &args.levels, &exp.curves).with_context(|| format!("writing {}", path.display()))?;
    }

    let mut measures = BTreeMap::new();
    for &id in &args.measures {
        let curve = exp.curves.get(&id).map(|c| {
            let (score, reason) = match response_score(c) {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Curve { score, reason, items: c.items.len(), mean: c.mean.clone(), std: c.std.clone() }
        });
        measures.insert(id, curve);
    }
    let report = Report {
        schema: SCHEMA,
        seed: args.seed,
        levels: args.levels.clone(),
        items: items.iter().map(|i| i.name.clone()).collect(),
        measures,
        skipped: exp
            .skipped
            .into_iter()
            .map(|s| Skipped { item: s.item, measure: s.measure, reason: s.reason })
            .collect(),
    };
    write_json(&report)?;
    if exp.curves.is_empty() {
        return Err(Uncomputable("no measure produced a response curve".into()).into());
    }
    Ok(())
}

fn write_csv(
    path: &Path,
    levels: &[f64],
    curves: &BTreeMap<MeasureId, musnoise::eval::ResponseCurve>,
) -> anyhow::Result<()> {
    let mut file = File::create(path)?;
    writeln!(file, "# schema: {CSV_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["item", "level", "measure", "value"])?;
    // item-major order, levels ascending, measures in id order
    let mut rows = Vec::new();
    for (id, c) in curves {
        for (name, values) in c.items.iter().zip(&c.per_item) {
            for (level, v) in levels.iter().zip(values) {
                rows.push((name.clone(), *level, *id, *v));
            }
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (name, level, id, v) in rows {
        w.write_record([name, level.to_string(), id.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
