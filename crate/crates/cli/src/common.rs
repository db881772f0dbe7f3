use std::fmt;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use clap::Args;
use musnoise::audio::{downmix_or_select, load_wav, resample, AudioBuffer, ChannelMode, ANALYSIS_RATE};
use musnoise::measures::MeasureSettings;
use musnoise::prepro::SubBandLayout;
use musnoise::stft::StftConfig;
use musnoise::Error;

/// Marks a failure as "the inputs were fine but nothing could be computed".
/// Exits with status 1 instead of 2.
#[derive(Debug)]
pub struct Uncomputable(pub String);

impl fmt::Display for Uncomputable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Uncomputable {}

/// Wraps a library error, routing the "no result" kinds to [`Uncomputable`].
pub fn classify(e: Error) -> anyhow::Error {
    match e {
        Error::NotComputable(_) | Error::EmptyAfterPreprocessing | Error::TargetAlwaysActive | Error::TooShort { .. } => {
            Uncomputable(e.to_string()).into()
        }
        other => other.into(),
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Analysis window length in samples; a power of two.
    #[arg(long, default_value_t = 1024)]
    pub window: usize,
    /// Ascending sub-band edges in Hz for the sub-band measure.
    #[arg(long, value_delimiter = ',', default_values_t = [50.0, 750.0, 6000.0, 16000.0])]
    pub bands: Vec<f64>,
}

impl AnalysisArgs {
    pub fn settings(&self) -> anyhow::Result<MeasureSettings> {
        let stft = StftConfig::new(self.window, ANALYSIS_RATE)?;
        let layout = SubBandLayout::from_edges(&self.bands)?;
        layout.band_bins(&stft)?;
        Ok(MeasureSettings { stft, layout })
    }
}

/// `mix` or a zero-based channel index.
pub fn parse_channel(s: &str) -> Result<ChannelMode, String> {
    if s == "mix" {
        return Ok(ChannelMode::MonoMix);
    }
    s.parse().map(ChannelMode::Select).map_err(|_| format!("expected 'mix' or a channel index, got '{s}'"))
}

pub fn load(path: &Path) -> anyhow::Result<AudioBuffer> {
    if !path.exists() {
        bail!("{}: no such file", path.display());
    }
    load_wav(path).with_context(|| format!("reading {}", path.display()))
}

/// Loads a WAV, optionally reduces its channels, and resamples it to the
/// analysis rate.
pub fn load_for_analysis(path: &Path, channel: Option<ChannelMode>) -> anyhow::Result<AudioBuffer> {
    let mut buf = load(path)?;
    if let Some(mode) = channel {
        buf = downmix_or_select(&buf, mode).with_context(|| path.display().to_string())?;
    }
    if buf.sample_rate() != ANALYSIS_RATE {
        log::info!("resampling {} from {} Hz", path.display(), buf.sample_rate());
        buf = resample(&buf, ANALYSIS_RATE)?;
    }
    Ok(buf)
}

/// Pretty JSON on stdout. A closed pipe (e.g. `| head`) is not an error.
pub fn write_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
