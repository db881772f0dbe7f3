//! Sine-window STFT analysis and overlap-add synthesis.
//!
//! Frame `l` covers samples `[l*hop, l*hop + window_len)`, is weighted by
//! `w(n) = sin(pi (n + 0.5) / window_len)` and zero-padded to `dft_len`
//! before the transform. Only the one-sided spectrum (`dft_len/2 + 1` bins)
//! is kept. Tail samples that do not fill a whole window are dropped.
//!
//! Synthesis applies the same window again; `w^2` at 50% overlap sums to one,
//! so `synthesize(analyze(x))` reconstructs `x` except in the first and last
//! half-window.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::audio::{AudioBuffer, ANALYSIS_RATE};
use crate::error::{Error, Result};

/// Analysis grid. `hop` and `dft_len` follow from `window_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    window_len: usize,
    sample_rate: u32,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self { window_len: 1024, sample_rate: ANALYSIS_RATE }
    }
}

impl StftConfig {
    pub fn new(window_len: usize, sample_rate: u32) -> Result<Self> {
        if window_len < 4 || !window_len.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "window length {window_len} must be a power of two >= 4"
            )));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        Ok(Self { window_len, sample_rate })
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn hop(&self) -> usize {
        self.window_len / 2
    }

    pub fn dft_len(&self) -> usize {
        2 * self.window_len
    }

    /// One-sided bin count `K`.
    pub fn num_bins(&self) -> usize {
        self.dft_len() / 2 + 1
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Centre frequency of bin `k` in Hz.
    pub fn bin_hz(&self, k: usize) -> f64 {
        k as f64 * f64::from(self.sample_rate) / self.dft_len() as f64
    }

    /// Number of whole frames that fit in `len` samples.
    pub fn num_frames(&self, len: usize) -> usize {
        if len < self.window_len {
            0
        } else {
            (len - self.window_len) / self.hop() + 1
        }
    }

    /// Samples spanned by `frames` frames.
    pub fn span(&self, frames: usize) -> usize {
        if frames == 0 {
            0
        } else {
            (frames - 1) * self.hop() + self.window_len
        }
    }

    pub fn window(&self) -> Vec<f64> {
        let n = self.window_len as f64;
        (0..self.window_len).map(|i| (PI * (i as f64 + 0.5) / n).sin()).collect()
    }
}

/// Complex one-sided STFT, `frames x bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    pub bins: Array2<Complex64>,
    pub config: StftConfig,
}

/// Per-bin power `|X(k,l)|^2`, `frames x bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrogram {
    pub power: Array2<f64>,
    pub config: StftConfig,
}

impl ComplexSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.bins.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.bins.ncols()
    }

    pub fn power(&self) -> PowerSpectrogram {
        power(self)
    }
}

impl PowerSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.power.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.power.ncols()
    }

    pub fn frame(&self, l: usize) -> ArrayView1<'_, f64> {
        self.power.row(l)
    }

    /// Keeps only the frames at `indices`, in the order given.
    pub fn select_frames(&self, indices: &[usize]) -> Self {
        Self { power: self.power.select(Axis(0), indices), config: self.config }
    }
}

/// Reusable forward/inverse transform plans for one [`StftConfig`].
pub struct Stft {
    config: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(config: StftConfig) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            config,
            window: config.window(),
            forward: planner.plan_fft_forward(config.dft_len()),
            inverse: planner.plan_fft_inverse(config.dft_len()),
        }
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn analyze(&self, samples: &[f64]) -> Result<ComplexSpectrogram> {
        let cfg = &self.config;
        let frames = cfg.num_frames(samples.len());
        if frames == 0 {
            return Err(Error::TooShort { len: samples.len(), window: cfg.window_len() });
        }
        let k = cfg.num_bins();
        let mut bins = Array2::<Complex64>::zeros((frames, k));
        let mut buf = vec![Complex64::default(); cfg.dft_len()];
        let mut scratch = vec![Complex64::default(); self.forward.get_inplace_scratch_len()];
        for (l, mut row) in bins.outer_iter_mut().enumerate() {
            let start = l * cfg.hop();
            let seg = &samples[start..start + cfg.window_len()];
            for (b, (x, w)) in buf.iter_mut().zip(seg.iter().zip(&self.window)) {
                *b = Complex64::new(x * w, 0.0);
            }
            buf[cfg.window_len()..].fill(Complex64::default());
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            row.iter_mut().zip(&buf[..k]).for_each(|(r, b)| *r = *b);
        }
        Ok(ComplexSpectrogram { bins, config: *cfg })
    }

    /// Inverse transform, window and overlap-add. Output spans
    /// `config.span(frames)` samples starting at the first frame.
    pub fn synthesize(&self, spec: &ComplexSpectrogram) -> Vec<f64> {
        let cfg = &self.config;
        let n = cfg.dft_len();
        let k = cfg.num_bins();
        let mut out = vec![0.0; cfg.span(spec.num_frames())];
        let mut buf = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); self.inverse.get_inplace_scratch_len()];
        let norm = 1.0 / n as f64;
        for (l, row) in spec.bins.outer_iter().enumerate() {
            buf[..k].iter_mut().zip(row.iter()).for_each(|(b, r)| *b = *r);
            // Hermitian mirror so the inverse is real.
            for j in k..n {
                buf[j] = buf[n - j].conj();
            }
            // DC and Nyquist bins must be real for a real signal.
            buf[0].im = 0.0;
            buf[k - 1].im = 0.0;
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            let start = l * cfg.hop();
            for (i, (b, w)) in buf.iter().zip(&self.window).enumerate() {
                out[start + i] += b.re * norm * w;
            }
        }
        out
    }
}

/// Analyzes a single-channel buffer at the configured rate.
pub fn analyze(buf: &AudioBuffer, cfg: StftConfig) -> Result<ComplexSpectrogram> {
    if buf.num_channels() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "STFT analysis needs one channel, got {}",
            buf.num_channels()
        )));
    }
    if buf.sample_rate() != cfg.sample_rate() {
        return Err(Error::ShapeMismatch(format!(
            "buffer is at {} Hz but the analysis grid expects {} Hz",
            buf.sample_rate(),
            cfg.sample_rate()
        )));
    }
    Stft::new(cfg).analyze(buf.channel(0).unwrap())
}

pub fn power(spec: &ComplexSpectrogram) -> PowerSpectrogram {
    PowerSpectrogram { power: spec.bins.mapv(|z| z.norm_sqr()), config: spec.config }
}

pub fn synthesize(spec: &ComplexSpectrogram) -> AudioBuffer {
    let samples = Stft::new(spec.config).synthesize(spec);
    AudioBuffer::mono(samples, spec.config.sample_rate()).expect("config rate is positive")
}
