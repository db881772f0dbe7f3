//! Evaluation harness: response experiments, correlation with listening-test
//! scores, and target-activity frame selection.

mod activity;
mod response;
mod stats;

pub use activity::{measure_noise_frames, select_noise_frames, ActivityMask, ACTIVITY_GATE_DBFS};
pub use response::{
    response_score, run_response_experiment, ExperimentItem, ResponseCurve, ResponseExperiment, ResponseScore,
    SkippedItem, DEFAULT_LEVELS,
};
pub use stats::{kendall, pearson};

use serde::Serialize;

use crate::error::{Error, Result};

/// Correlation of a measure with perceptual scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub pearson_r: f64,
    pub kendall_t: f64,
    pub n: usize,
    /// Items left out because they are flagged as references.
    pub excluded: Vec<String>,
}

/// Correlates `(id, score, measure, is_reference)` observations; references
/// are excluded.
pub fn correlate<'a>(
    rows: impl IntoIterator<Item = (&'a str, f64, f64, bool)>,
) -> Result<CorrelationReport> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (id, score, value, is_ref) in rows {
        if is_ref {
            excluded.push(id.to_string());
        } else {
            xs.push(score);
            ys.push(value);
        }
    }
    if xs.len() < 3 {
        return Err(Error::NotComputable(format!("{} usable pairs; at least 3 are needed", xs.len())));
    }
    Ok(CorrelationReport { pearson_r: pearson(&xs, &ys)?, kendall_t: kendall(&xs, &ys)?, n: xs.len(), excluded })
}
