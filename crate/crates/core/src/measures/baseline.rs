//! Black-box log-kurtosis ratios on raw power spectra.

use crate::error::{Error, Result};
use crate::kurtosis::{alpha_weights, FrameKurtosisSeries};
use crate::stft::PowerSpectrogram;

use super::{MeasureId, MeasureResult};

/// Upper clamp of `delta_kurt` before rescaling.
pub const DELTA_KURT_CEILING: f64 = 1.4;

/// Upper clamp of `delta_kurt_w` before rescaling.
pub const DELTA_KURT_W_CEILING: f64 = 2.2;

fn check_shapes(nin: &PowerSpectrogram, nout: &PowerSpectrogram) -> Result<()> {
    if nin.power.dim() != nout.power.dim() {
        return Err(Error::ShapeMismatch(format!(
            "power spectrograms differ: {:?} vs {:?}",
            nin.power.dim(),
            nout.power.dim()
        )));
    }
    Ok(())
}

/// `ln(mean kurt_out / mean kurt_in)`, each mean over that signal's own
/// valid frames.
fn log_ratio(
    id: MeasureId,
    kin: FrameKurtosisSeries,
    kout: FrameKurtosisSeries,
) -> Result<MeasureResult> {
    let mean_in = kin
        .mean_valid()
        .ok_or_else(|| Error::NotComputable("no frame of the unprocessed signal has a defined kurtosis".into()))?;
    let mean_out = kout
        .mean_valid()
        .ok_or_else(|| Error::NotComputable("no frame of the processed signal has a defined kurtosis".into()))?;
    let raw = (mean_out / mean_in).ln();
    let trace = kin
        .0
        .iter()
        .zip(&kout.0)
        .map(|(i, o)| Some((o.as_ref()? / i.as_ref()?).ln()))
        .collect();
    Ok(MeasureResult {
        measure: id,
        raw,
        scaled: id.scale(raw),
        selected_band: None,
        n_frames: kin.valid_count().min(kout.valid_count()),
        frame_trace: Some(trace),
        channel: 0,
    })
}

pub fn delta_kurt(nin: &PowerSpectrogram, nout: &PowerSpectrogram) -> Result<MeasureResult> {
    check_shapes(nin, nout)?;
    log_ratio(MeasureId::DeltaKurt, FrameKurtosisSeries::of(nin), FrameKurtosisSeries::of(nout))
}

/// [`delta_kurt`] limited to non-negative values.
pub fn delta_kurt_lim(nin: &PowerSpectrogram, nout: &PowerSpectrogram) -> Result<MeasureResult> {
    let mut r = delta_kurt(nin, nout)?;
    r.measure = MeasureId::DeltaKurtLim;
    r.raw = r.raw.max(0.0);
    r.scaled = MeasureId::DeltaKurtLim.scale(r.raw);
    Ok(r)
}

/// Log ratio of mean weighted kurtoses; each signal is weighted by the
/// reciprocal temporal mean of its own bins.
pub fn delta_kurt_w(nin: &PowerSpectrogram, nout: &PowerSpectrogram) -> Result<MeasureResult> {
    check_shapes(nin, nout)?;
    let kin = FrameKurtosisSeries::weighted(nin, &alpha_weights(nin));
    let kout = FrameKurtosisSeries::weighted(nout, &alpha_weights(nout));
    log_ratio(MeasureId::DeltaKurtW, kin, kout)
}
