//! Response of the measures to gradually increasing spectral-hole distortion.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::audio::AudioBuffer;
use crate::distortion::{derive_seed, distort_audio, DistortionSpec, MaskScope};
use crate::error::{Error, Result};
use crate::measures::{measure_audio, MeasureId, MeasureSettings};

use super::stats::kendall;

/// Zeroing percentages used when none are given.
pub const DEFAULT_LEVELS: [f64; 7] = [0.0, 10.0, 25.0, 50.0, 75.0, 90.0, 99.8];

/// Scaled measure output per item and control level.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    pub control: Vec<f64>,
    pub items: Vec<String>,
    /// `items x levels`, values in `[0, 100]`.
    pub per_item: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Population standard deviation across items, per level.
    pub std: Vec<f64>,
}

impl ResponseCurve {
    pub fn new(control: Vec<f64>, items: Vec<String>, per_item: Vec<Vec<f64>>) -> Result<Self> {
        if control.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("control levels must be strictly ascending".into()));
        }
        if items.len() != per_item.len() || per_item.iter().any(|r| r.len() != control.len()) {
            return Err(Error::ShapeMismatch("response matrix does not match items x levels".into()));
        }
        let n = per_item.len() as f64;
        let mean: Vec<f64> = (0..control.len())
            .map(|j| per_item.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let std = (0..control.len())
            .map(|j| (per_item.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt())
            .collect();
        Ok(Self { control, items, per_item, mean, std })
    }
}

/// Components of the response score.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResponseScore {
    /// Product of the three components, in `[0, 1]`.
    pub rho: f64,
    /// Kendall tau between control and mean response, floored at 0.
    pub monotonicity: f64,
    /// Range of the mean response as a fraction of 100.
    pub span: f64,
    /// Mean inter-item standard deviation over 50, clamped to `[0, 1]`.
    pub deviation: f64,
}

/// `rho = m * s * (1 - d)`; a constant mean curve scores 0.
pub fn response_score(curve: &ResponseCurve) -> Result<ResponseScore> {
    if curve.control.len() < 3 || curve.per_item.len() < 2 {
        return Err(Error::NotComputable(format!(
            "response score needs >= 3 levels and >= 2 items, got {} and {}",
            curve.control.len(),
            curve.per_item.len()
        )));
    }
    let max = curve.mean.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = curve.mean.iter().copied().fold(f64::INFINITY, f64::min);
    let span = ((max - min) / 100.0).clamp(0.0, 1.0);
    let monotonicity = kendall(&curve.control, &curve.mean).map_or(0.0, |t| t.max(0.0));
    let deviation = (curve.std.iter().sum::<f64>() / curve.std.len() as f64 / 50.0).clamp(0.0, 1.0);
    Ok(ResponseScore { rho: monotonicity * span * (1.0 - deviation), monotonicity, span, deviation })
}

/// One named input of a response experiment.
#[derive(Debug, Clone)]
pub struct ExperimentItem {
    pub name: String,
    pub audio: AudioBuffer,
}

/// A measure that could not be evaluated on an item.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedItem {
    pub item: String,
    pub measure: Option<MeasureId>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ResponseExperiment {
    pub curves: BTreeMap<MeasureId, ResponseCurve>,
    pub skipped: Vec<SkippedItem>,
}

/// Distorts every item at every level and evaluates `measures`.
///
/// The reference for each item is its own 0% reconstruction, so level 0 is
/// an exact identity. All levels of an item share one mask seed, derived
/// from `seed` and the item's position; masks therefore grow by inclusion.
/// Items that fail are dropped from the affected curves and listed in
/// `skipped`. Work is spread over the current rayon pool.
pub fn run_response_experiment(
    items: &[ExperimentItem],
    levels: &[f64],
    measures: &[MeasureId],
    seed: u64,
    settings: &MeasureSettings,
) -> Result<ResponseExperiment> {
    if items.is_empty() {
        return Err(Error::InvalidConfig("response experiment needs at least one item".into()));
    }
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("levels must be non-empty and strictly ascending".into()));
    }
    for &p in levels {
        DistortionSpec::new(p, 0, MaskScope::Global)?;
    }
    let identity = DistortionSpec::new(0.0, 0, MaskScope::Global)?;

    let mut skipped = Vec::new();
    let references: Vec<Option<AudioBuffer>> = items
        .par_iter()
        .map(|it| distort_audio(&it.audio, &identity, settings.stft))
        .collect::<Vec<_>>()
        .into_iter()
        .zip(items)
        .map(|(r, it)| {
            r.map_err(|e| {
                log::warn!("skipping item {}: {e}", it.name);
                skipped.push(SkippedItem { item: it.name.clone(), measure: None, reason: e.to_string() });
            })
            .ok()
        })
        .collect();

    // scaled value (or failure reason) per item, level and measure
    let cells: Vec<Vec<Result<f64, String>>> = references
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_some())
        .flat_map(|(i, _)| levels.iter().map(move |&p| (i, p)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, percent)| {
            let reference = references[i].as_ref().expect("filtered");
            let d = DistortionSpec::new(percent, derive_seed(&[seed, i as u64]), MaskScope::Global)
                .expect("validated above");
            let processed = if percent == 0.0 {
                Ok(reference.clone())
            } else {
                distort_audio(&items[i].audio, &d, settings.stft)
            };
            match processed.and_then(|p| measure_audio(measures, reference, &p, settings)) {
                Ok(rs) => rs.into_iter().map(|(_, r)| r.map(|m| m.scaled).map_err(|e| e.to_string())).collect(),
                Err(e) => vec![Err(e.to_string()); measures.len()],
            }
        })
        .collect();

    let ok_items: Vec<usize> = (0..items.len()).filter(|&i| references[i].is_some()).collect();
    let mut curves = BTreeMap::new();
    for (mi, &id) in measures.iter().enumerate() {
        let mut names = Vec::new();
        let mut rows = Vec::new();
        for (pos, &i) in ok_items.iter().enumerate() {
            let row: Result<Vec<f64>, String> =
                (0..levels.len()).map(|j| cells[pos * levels.len() + j][mi].clone()).collect();
            match row {
                Ok(r) => {
                    names.push(items[i].name.clone());
                    rows.push(r);
                }
                Err(reason) => {
                    log::warn!("skipping item {} for {id}: {reason}", items[i].name);
                    skipped.push(SkippedItem { item: items[i].name.clone(), measure: Some(id), reason });
                }
            }
        }
        if !rows.is_empty() {
            curves.insert(id, ResponseCurve::new(levels.to_vec(), names, rows)?);
        }
    }
    Ok(ResponseExperiment { curves, skipped })
}
