//! Target-activity masks and noise-frame selection.
//!
//! When the unprocessed input contains a target source plus interferers,
//! only frames where the target is silent are compared.
//!
//! Mask text format: one `0` or `1` per frame (`1` = target active),
//! separated by any whitespace; `#` starts a comment running to end of line.

use std::fmt::Write as _;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::measures::{channel_powers, measure_channels, MeasureId, MeasureResult, MeasureSettings};
use crate::stft::{PowerSpectrogram, StftConfig};

/// Frame level, in dBFS, above which the target counts as active.
pub const ACTIVITY_GATE_DBFS: f64 = -60.0;

/// Per-frame flag: `true` where the target source is active.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityMask(pub Vec<bool>);

impl ActivityMask {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut flags = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("");
            for tok in content.split_whitespace() {
                flags.push(match tok {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "activity mask line {}: expected 0 or 1, found '{other}'",
                            lineno + 1
                        )))
                    }
                });
            }
        }
        Ok(Self(flags))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(2 * self.0.len());
        for &f in &self.0 {
            let _ = writeln!(s, "{}", u8::from(f));
        }
        s
    }

    /// Gates the RMS of every analysis frame of the target signal at
    /// [`ACTIVITY_GATE_DBFS`]. All channels are pooled.
    pub fn from_target(target: &AudioBuffer, cfg: &StftConfig) -> Self {
        let frames = cfg.num_frames(target.len());
        let gate = 10f64.powf(ACTIVITY_GATE_DBFS / 10.0);
        let flags = (0..frames)
            .map(|l| {
                let start = l * cfg.hop();
                let (sum, n) = target.channels().fold((0.0, 0usize), |(s, n), c| {
                    let seg = &c[start..start + cfg.window_len()];
                    (s + seg.iter().map(|x| x * x).sum::<f64>(), n + seg.len())
                });
                sum / n as f64 > gate
            })
            .collect();
        Self(flags)
    }
}

/// Keeps the frames where the target is inactive, in order, from both
/// spectrograms.
pub fn select_noise_frames(
    nin: &PowerSpectrogram,
    nout: &PowerSpectrogram,
    mask: &ActivityMask,
) -> Result<(PowerSpectrogram, PowerSpectrogram)> {
    if nin.num_frames() != mask.len() || nout.num_frames() != mask.len() {
        return Err(Error::ShapeMismatch(format!(
            "activity mask has {} frames, spectrograms have {} and {}",
            mask.len(),
            nin.num_frames(),
            nout.num_frames()
        )));
    }
    let keep: Vec<usize> = mask.0.iter().enumerate().filter(|(_, &a)| !a).map(|(l, _)| l).collect();
    if keep.is_empty() {
        return Err(Error::TargetAlwaysActive);
    }
    Ok((nin.select_frames(&keep), nout.select_frames(&keep)))
}

/// Like [`crate::measures::measure_audio`], restricted to the frames where
/// `mask` marks the target inactive.
pub fn measure_noise_frames(
    ids: &[MeasureId],
    reference: &AudioBuffer,
    processed: &AudioBuffer,
    settings: &MeasureSettings,
    mask: &ActivityMask,
) -> Result<Vec<(MeasureId, Result<MeasureResult>)>> {
    let powers = channel_powers(reference, processed, &settings.stft)?
        .iter()
        .map(|(nin, nout)| select_noise_frames(nin, nout, mask))
        .collect::<Result<Vec<_>>>()?;
    Ok(measure_channels(ids, &powers, &settings.layout))
}
