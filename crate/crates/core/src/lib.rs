//! Objective measures of musical noise based on spectral kurtosis.
//!
//! Musical noise is the warbling artifact left by isolated holes and peaks
//! in a processed spectrogram. The measures here compare the spectral
//! kurtosis of a signal before and after processing:
//!
//! * [`measures::delta_kurt`], [`measures::delta_kurt_lim`] and
//!   [`measures::delta_kurt_w`] are black-box log-kurtosis ratios on raw
//!   power spectra;
//! * [`measures::delta_kurt_pi`] works on A-weighted, threshold-limited
//!   sub-bands and weights frames by their energy.
//!
//! The [`distortion`] module produces controlled musical noise by zeroing a
//! share of STFT bins, and [`eval`] turns measure outputs into response
//! curves and correlations with listening-test scores.
//!
//! ```
//! use musnoise::audio::AudioBuffer;
//! use musnoise::distortion::{distort_audio, DistortionSpec, MaskScope};
//! use musnoise::measures::{delta_kurt_pi, MeasureSettings};
//! use musnoise::synth::harp_arpeggio;
//!
//! let x = AudioBuffer::mono(harp_arpeggio(2.0, 48_000, 1), 48_000)?;
//! let settings = MeasureSettings::default();
//! let clean = distort_audio(&x, &DistortionSpec::new(0.0, 0, MaskScope::Global)?, settings.stft)?;
//! let holes = distort_audio(&x, &DistortionSpec::new(50.0, 7, MaskScope::Global)?, settings.stft)?;
//! let r = delta_kurt_pi(&clean, &holes, &settings)?;
//! assert!(r.scaled > 0.0 && r.scaled <= 100.0);
//! # Ok::<(), musnoise::Error>(())
//! ```

pub mod audio;
pub mod distortion;
mod error;
pub mod eval;
pub mod kurtosis;
pub mod measures;
pub mod prepro;
pub mod stft;
pub mod synth;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kurtosis.md")]
    mod kurtosis {}
    #[doc = include_str!("../../../book/src/preprocessing.md")]
    mod preprocessing {}
    #[doc = include_str!("../../../book/src/subband.md")]
    mod subband {}
    #[doc = include_str!("../../../book/src/distortion.md")]
    mod distortion {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
