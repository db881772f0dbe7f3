use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use musnoise::audio::{save_wav, SampleFormat};
use musnoise::distortion::{distort_audio, DistortionSpec, MaskScope};
use musnoise::stft::StftConfig;

use crate::common::{classify, load};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scope {
    Global,
    PerFrame,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Pcm16,
    Pcm24,
    Pcm32,
    F32,
    F64,
}

#[derive(Debug, Args)]
pub struct DistortArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Share of STFT bins set to zero, in percent.
    #[arg(long)]
    pub percent: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw the mask over the whole spectrogram or frame by frame.
    #[arg(long, value_enum, default_value_t = Scope::Global)]
    pub scope: Scope,
    #[arg(long, value_enum, default_value_t = Format::F32)]
    pub format: Format,
    /// Analysis window length in samples; a power of two.
    #[arg(long, default_value_t = 1024)]
    pub window: usize,
}

pub fn run(args: DistortArgs) -> anyhow::Result<()> {
    let scope = match args.scope {
        Scope::Global => MaskScope::Global,
        Scope::PerFrame => MaskScope::PerFrame,
    };
    let spec = DistortionSpec::new(args.percent, args.seed, scope)?;
    let input = load(&args.input)?;
    // the mask works on bins, so the file is processed at its own rate
    let cfg = StftConfig::new(args.window, input.sample_rate())?;
    let out = distort_audio(&input, &spec, cfg).map_err(classify)?;
    let format = match args.format {
        Format::Pcm16 => SampleFormat::Pcm16,
        Format::Pcm24 => SampleFormat::Pcm24,
        Format::Pcm32 => SampleFormat::Pcm32,
        Format::F32 => SampleFormat::Float32,
        Format::F64 => SampleFormat::Float64,
    };
    save_wav(&args.output, &out, format).with_context(|| format!("writing {}", args.output.display()))?;
    log::info!("zeroed {}% of bins, wrote {} samples", args.percent, out.len());
    Ok(())
}
