//! Audio buffers, WAV I/O and resampling.

mod resample;
mod wav;

pub use resample::{resample, ANALYSIS_RATE};
pub use wav::{decode_wav, encode_wav, load_wav, save_wav, SampleFormat};

use crate::error::{Error, Result};

/// Multichannel audio held as one `Vec<f64>` per channel.
///
/// All channels have the same length and samples nominally lie in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

/// How [`downmix_or_select`] reduces a buffer to one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// Average of all channels.
    MonoMix,
    /// One channel, verbatim.
    Select(usize),
}

impl AudioBuffer {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(Error::InvalidConfig("buffer needs at least one channel".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::ShapeMismatch("channels differ in length".into()));
        }
        Ok(Self { channels, sample_rate })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Number of sample frames (samples per channel).
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> Option<&[f64]> {
        self.channels.get(index).map(Vec::as_slice)
    }

    pub fn channels(&self) -> impl Iterator<Item = &[f64]> {
        self.channels.iter().map(Vec::as_slice)
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / f64::from(self.sample_rate)
    }

    /// Shortens every channel to `len` frames. No-op when already shorter.
    pub fn truncate(&mut self, len: usize) {
        for c in &mut self.channels {
            c.truncate(len);
        }
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|x| x * gain).collect())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Reduces a buffer to a single channel.
pub fn downmix_or_select(buf: &AudioBuffer, mode: ChannelMode) -> Result<AudioBuffer> {
    let samples = match mode {
        ChannelMode::Select(index) => buf
            .channel(index)
            .ok_or(Error::InvalidChannel { index, channels: buf.num_channels() })?
            .to_vec(),
        ChannelMode::MonoMix => {
            if buf.num_channels() == 1 {
                buf.channels[0].clone()
            } else {
                let n = buf.num_channels() as f64;
                (0..buf.len())
                    .map(|i| buf.channels.iter().map(|c| c[i]).sum::<f64>() / n)
                    .collect()
            }
        }
    };
    AudioBuffer::mono(samples, buf.sample_rate)
}
