//! Log-kurtosis-ratio measures of musical noise.
//!
//! Every measure compares an unprocessed signal (`nin`) against its processed
//! counterpart (`nout`) and reports a raw value plus a score rescaled to
//! `[0, 100]`. The three baselines work on raw power spectra; the sub-band
//! measure ([`MeasureId::DeltaKurtPi`]) applies the perceptual pre-processing
//! of [`crate::prepro`] first.

mod baseline;
mod pi;

pub use baseline::{delta_kurt, delta_kurt_lim, delta_kurt_w, DELTA_KURT_CEILING, DELTA_KURT_W_CEILING};
pub use pi::{
    analyze_band, band_delta_kurt, band_energy_weight, delta_kurt_pi, delta_kurt_pi_power, select_band,
    BandAnalysis, PiAnalysis, BAND_DELTA_LIMIT,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::prepro::SubBandLayout;
use crate::stft::{PowerSpectrogram, Stft, StftConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureId {
    DeltaKurt,
    DeltaKurtLim,
    DeltaKurtW,
    DeltaKurtPi,
}

impl MeasureId {
    pub const ALL: [MeasureId; 4] =
        [MeasureId::DeltaKurt, MeasureId::DeltaKurtLim, MeasureId::DeltaKurtW, MeasureId::DeltaKurtPi];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureId::DeltaKurt => "delta_kurt",
            MeasureId::DeltaKurtLim => "delta_kurt_lim",
            MeasureId::DeltaKurtW => "delta_kurt_w",
            MeasureId::DeltaKurtPi => "delta_kurt_pi",
        }
    }

    /// Maps a raw value onto `[0, 100]`.
    pub fn scale(self, raw: f64) -> f64 {
        let ceiling = match self {
            MeasureId::DeltaKurt | MeasureId::DeltaKurtLim => DELTA_KURT_CEILING,
            MeasureId::DeltaKurtW => DELTA_KURT_W_CEILING,
            MeasureId::DeltaKurtPi => BAND_DELTA_LIMIT,
        };
        raw.clamp(0.0, ceiling) / ceiling * 100.0
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown measure '{s}'")))
    }
}

/// Output of one measure on one signal pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureResult {
    pub measure: MeasureId,
    pub raw: f64,
    /// `raw` mapped onto `[0, 100]`.
    pub scaled: f64,
    /// Index into the band layout; only set for the sub-band measure.
    pub selected_band: Option<usize>,
    /// Frames that contributed to the value.
    pub n_frames: usize,
    /// Per-frame values over the analyzed frames; `None` where undefined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_trace: Option<Vec<Option<f64>>>,
    /// Channel the value came from when several were analyzed.
    pub channel: usize,
}

/// Analysis grid and band layout shared by all measures.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasureSettings {
    pub stft: StftConfig,
    pub layout: SubBandLayout,
}

/// Evaluates one measure on a pair of power spectrograms.
pub fn measure_power(
    id: MeasureId,
    nin: &PowerSpectrogram,
    nout: &PowerSpectrogram,
    layout: &SubBandLayout,
) -> Result<MeasureResult> {
    match id {
        MeasureId::DeltaKurt => delta_kurt(nin, nout),
        MeasureId::DeltaKurtLim => delta_kurt_lim(nin, nout),
        MeasureId::DeltaKurtW => delta_kurt_w(nin, nout),
        MeasureId::DeltaKurtPi => delta_kurt_pi_power(nin, nout, layout).map(|a| a.result),
    }
}

/// Evaluates several measures on a (possibly multichannel) audio pair.
///
/// Both buffers must share channel count and sample rate, which must equal
/// the analysis rate. Lengths are trimmed to the shorter buffer. Each channel
/// is measured on its own and the channel with the highest scaled value is
/// reported; a measure errors only if it fails on every channel.
pub fn measure_audio(
    ids: &[MeasureId],
    reference: &AudioBuffer,
    processed: &AudioBuffer,
    settings: &MeasureSettings,
) -> Result<Vec<(MeasureId, Result<MeasureResult>)>> {
    let powers = channel_powers(reference, processed, &settings.stft)?;
    Ok(measure_channels(ids, &powers, &settings.layout))
}

/// Evaluates several measures on per-channel spectrogram pairs, reporting
/// the worst channel of each.
pub fn measure_channels(
    ids: &[MeasureId],
    powers: &[(PowerSpectrogram, PowerSpectrogram)],
    layout: &SubBandLayout,
) -> Vec<(MeasureId, Result<MeasureResult>)> {
    ids.iter()
        .map(|&id| {
            let per_channel = powers.iter().map(|(nin, nout)| measure_power(id, nin, nout, layout));
            (id, worst_channel(per_channel))
        })
        .collect()
}

/// Power spectrograms for each channel pair, after the shape checks of
/// [`measure_audio`].
pub fn channel_powers(
    reference: &AudioBuffer,
    processed: &AudioBuffer,
    cfg: &StftConfig,
) -> Result<Vec<(PowerSpectrogram, PowerSpectrogram)>> {
    if reference.num_channels() != processed.num_channels() {
        return Err(Error::ShapeMismatch(format!(
            "reference has {} channels, processed has {}",
            reference.num_channels(),
            processed.num_channels()
        )));
    }
    for buf in [reference, processed] {
        if buf.sample_rate() != cfg.sample_rate() {
            return Err(Error::ShapeMismatch(format!(
                "buffer is at {} Hz, analysis expects {} Hz",
                buf.sample_rate(),
                cfg.sample_rate()
            )));
        }
    }
    let len = reference.len().min(processed.len());
    let stft = Stft::new(*cfg);
    reference
        .channels()
        .zip(processed.channels())
        .map(|(r, p)| Ok((stft.analyze(&r[..len])?.power(), stft.analyze(&p[..len])?.power())))
        .collect()
}

fn worst_channel(results: impl Iterator<Item = Result<MeasureResult>>) -> Result<MeasureResult> {
    let mut best: Option<MeasureResult> = None;
    let mut first_err = None;
    for (ch, r) in results.enumerate() {
        match r {
            Ok(mut m) => {
                m.channel = ch;
                if best.as_ref().is_none_or(|b| m.scaled > b.scaled) {
                    best = Some(m);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or_else(|| Error::NotComputable("no channels".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_through_strings() {
        for id in MeasureId::ALL {
            assert_eq!(id.as_str().parse::<MeasureId>().unwrap(), id);
        }
        assert!("kurt".parse::<MeasureId>().is_err());
    }

    #[test]
    fn scaling_ranges() {
        assert_eq!(MeasureId::DeltaKurt.scale(0.7), 50.0);
        assert_eq!(MeasureId::DeltaKurt.scale(-0.3), 0.0);
        assert_eq!(MeasureId::DeltaKurtW.scale(2.2), 100.0);
        assert_eq!(MeasureId::DeltaKurtW.scale(7.0), 100.0);
        assert_eq!(MeasureId::DeltaKurtPi.scale(0.25), 50.0);
    }

    #[test]
    fn worst_channel_picks_highest_scaled() {
        let mk = |scaled: f64| MeasureResult {
            measure: MeasureId::DeltaKurtPi,
            raw: scaled / 200.0,
            scaled,
            selected_band: Some(0),
            n_frames: 1,
            frame_trace: None,
            channel: 0,
        };
        let r = worst_channel(vec![Ok(mk(10.0)), Ok(mk(30.0)), Err(Error::EmptyAfterPreprocessing)].into_iter()).unwrap();
        assert_eq!((r.scaled, r.channel), (30.0, 1));
        assert!(worst_channel(vec![Err(Error::EmptyAfterPreprocessing)].into_iter()).is_err());
    }
}
