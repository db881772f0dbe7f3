use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::Args;
use musnoise::eval::{correlate, CorrelationReport};
use musnoise::measures::MeasureId;
use serde::Serialize;

use crate::common::{write_json, Uncomputable};

pub const SCHEMA: &str = "musnoise.correlate/1";

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// CSV with columns `item`, `score` and optionally `reference`
    /// (true/false, 1/0, yes/no; reference rows are left out).
    pub scores: PathBuf,
    /// CSV keyed by `item`: either long (`measure`, `value` columns) or wide
    /// (one column per measure id).
    pub measures: PathBuf,
    /// Restrict the report to these measures.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<MeasureId>,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    /// Items present in both files, references included.
    joined: usize,
    unmatched: Vec<String>,
    measures: BTreeMap<MeasureId, Option<CorrelationReport>>,
    reasons: BTreeMap<MeasureId, String>,
}

fn reader(path: &Path) -> anyhow::Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.eq_ignore_ascii_case(name))
}

fn parse_flag(s: &str) -> anyhow::Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" => Ok(false),
        "1" | "true" | "yes" => Ok(true),
        other => bail!("'{other}' is not a reference flag"),
    }
}

fn parse_num(s: &str, what: &str) -> anyhow::Result<f64> {
    s.parse().map_err(|_| anyhow!("{what}: '{s}' is not a number"))
}

/// `item -> (score, is_reference)`
fn read_scores(path: &Path) -> anyhow::Result<BTreeMap<String, (f64, bool)>> {
    let mut r = reader(path)?;
    let headers = r.headers()?.clone();
    let item = column(&headers, "item").ok_or_else(|| anyhow!("{}: no 'item' column", path.display()))?;
    let score = column(&headers, "score").ok_or_else(|| anyhow!("{}: no 'score' column", path.display()))?;
    let reference = column(&headers, "reference");
    let mut out = BTreeMap::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let at = || format!("{} row {}", path.display(), line + 1);
        let id = rec.get(item).unwrap_or_default().to_string();
        let s = parse_num(rec.get(score).unwrap_or_default(), &at())?;
        let is_ref = match reference {
            Some(c) => parse_flag(rec.get(c).unwrap_or_default()).with_context(at)?,
            None => false,
        };
        if out.insert(id.clone(), (s, is_ref)).is_some() {
            bail!("{}: item '{id}' appears twice", at());
        }
    }
    Ok(out)
}

/// `measure -> item -> value`
fn read_measures(path: &Path) -> anyhow::Result<BTreeMap<MeasureId, BTreeMap<String, f64>>> {
    let mut r = reader(path)?;
    let headers = r.headers()?.clone();
    let item = column(&headers, "item").ok_or_else(|| anyhow!("{}: no 'item' column", path.display()))?;
    let long = column(&headers, "measure").zip(column(&headers, "value"));
    let wide: Vec<(usize, MeasureId)> =
        headers.iter().enumerate().filter_map(|(i, h)| h.parse().ok().map(|id| (i, id))).collect();
    if long.is_none() && wide.is_empty() {
        bail!("{}: expected 'measure' and 'value' columns or measure-id columns", path.display());
    }
    let mut out: BTreeMap<MeasureId, BTreeMap<String, f64>> = BTreeMap::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let at = format!("{} row {}", path.display(), line + 1);
        let id = rec.get(item).unwrap_or_default().to_string();
        let cells: Vec<(MeasureId, &str)> = match long {
            Some((m, v)) => {
                let measure = rec.get(m).unwrap_or_default().parse().with_context(|| at.clone())?;
                vec![(measure, rec.get(v).unwrap_or_default())]
            }
            None => wide.iter().map(|&(c, m)| (m, rec.get(c).unwrap_or_default())).collect(),
        };
        for (measure, text) in cells {
            // empty cells are missing values
            if text.is_empty() {
                continue;
            }
            let v = parse_num(text, &at)?;
            if out.entry(measure).or_default().insert(id.clone(), v).is_some() {
                bail!("{at}: item '{id}' has two values for {measure}");
            }
        }
    }
    Ok(out)
}

pub fn run(args: CorrelateArgs) -> anyhow::Result<()> {
    let scores = read_scores(&args.scores)?;
    let mut values = read_measures(&args.measures)?;
    if !args.only.is_empty() {
        values.retain(|id, _| args.only.contains(id));
        if values.is_empty() {
            bail!("none of the requested measures is in {}", args.measures.display());
        }
    }

    let measured: BTreeSet<&String> = values.values().flat_map(|m| m.keys()).collect();
    let joined: Vec<&String> = scores.keys().filter(|k| measured.contains(k)).collect();
    let usable = joined.iter().filter(|k| !scores[k.as_str()].1).count();
    if usable < 3 {
        bail!("{usable} non-reference items are present in both files; at least 3 are needed");
    }
    let unmatched: Vec<String> =
        scores.keys().chain(measured.iter().copied()).filter(|k| !joined.contains(k)).cloned().collect();
    if !unmatched.is_empty() {
        log::warn!("{} items appear in only one file", unmatched.len());
    }

    let mut report =
        Report { schema: SCHEMA, joined: joined.len(), unmatched, measures: BTreeMap::new(), reasons: BTreeMap::new() };
    for (id, by_item) in &values {
        let rows = by_item
            .iter()
            .filter_map(|(item, v)| scores.get(item).map(|&(s, is_ref)| (item.as_str(), s, *v, is_ref)));
        match correlate(rows) {
            Ok(r) => {
                report.measures.insert(*id, Some(r));
            }
            Err(e) => {
                report.measures.insert(*id, None);
                report.reasons.insert(*id, e.to_string());
            }
        }
    }
    write_json(&report)?;
    if report.measures.values().all(Option::is_none) {
        return Err(Uncomputable("no measure could be correlated".into()).into());
    }
    Ok(())
}
