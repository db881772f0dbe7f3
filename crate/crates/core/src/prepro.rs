//! Perceptual pre-processing for the sub-band measure.
//!
//! Power values are converted to A-weighted decibels, limited from below at
//! `thr = P_dBA - 20` and shifted so the threshold maps to zero:
//! `X+ = max(X_dBA, thr) - thr`. `P_dBA` is the level of the mean linear
//! A-weighted power of the processed signal; the same `thr` is applied to
//! both signals. Frames in which the processed signal is entirely at or below
//! threshold are dropped from both signals.

use std::ops::Range;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::stft::{PowerSpectrogram, StftConfig};

/// Power floor applied before taking logarithms.
pub const POWER_FLOOR: f64 = 1e-12;

/// Gain assigned to the DC bin, which has no audible frequency.
pub const DC_GAIN_DB: f64 = -100.0;

/// Distance of the limiting threshold below the overall level, in dB.
pub const THRESHOLD_OFFSET_DB: f64 = 20.0;

/// A-weighting gain in dB at `freq_hz` (IEC 61672 analytic curve).
pub fn a_weighting_db(freq_hz: f64) -> f64 {
    const F1: f64 = 20.598_997;
    const F2: f64 = 107.652_65;
    const F3: f64 = 737.862_23;
    const F4: f64 = 12_194.217;
    let f2 = freq_hz * freq_hz;
    let ra = (F4 * F4 * f2 * f2)
        / ((f2 + F1 * F1) * ((f2 + F2 * F2) * (f2 + F3 * F3)).sqrt() * (f2 + F4 * F4));
    20.0 * ra.log10() + 2.0
}

/// Per-bin A-weighting gains for one analysis grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AWeightTable(pub Vec<f64>);

impl AWeightTable {
    pub fn new(cfg: &StftConfig) -> Self {
        Self(
            (0..cfg.num_bins())
                .map(|k| if k == 0 { DC_GAIN_DB } else { a_weighting_db(cfg.bin_hz(k)) })
                .collect(),
        )
    }
}

/// Level and limiting threshold of a dBA spectrogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub p_dba: f64,
    pub thr: f64,
}

/// `X_dBA(k,l) = 10 log10(max(X, floor)) + A(f_k)`.
pub fn to_dba(pow: &PowerSpectrogram, table: &AWeightTable) -> Array2<f64> {
    let mut out = pow.power.mapv(|x| 10.0 * x.max(POWER_FLOOR).log10());
    for mut row in out.outer_iter_mut() {
        row.iter_mut().zip(&table.0).for_each(|(v, a)| *v += a);
    }
    out
}

/// Energy-mean level of all values and the threshold 20 dB below it.
pub fn compute_threshold(dba: &Array2<f64>) -> Threshold {
    let n = dba.len().max(1) as f64;
    // factor out the maximum so the linear sum cannot overflow
    let peak = dba.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = dba.iter().map(|v| 10f64.powf((v - peak) / 10.0)).sum();
    let p_dba = peak + 10.0 * (sum / n).log10();
    Threshold { p_dba, thr: p_dba - THRESHOLD_OFFSET_DB }
}

pub fn limit_shift(dba: &Array2<f64>, thr: f64) -> Array2<f64> {
    dba.mapv(|v| v.max(thr) - thr)
}

/// Non-negative limited dBA values of one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedSpectrogram {
    /// `frames x bins`, all `>= 0`.
    pub values: Array2<f64>,
    /// Frame indices into the original spectrogram, strictly increasing.
    pub kept_frames: Vec<usize>,
    pub thr: f64,
    pub p_dba: f64,
}

impl PreprocessedSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.values.nrows()
    }
}

/// Drops frames where `nout_plus` is zero in every bin, from both signals.
///
/// Returns `(nout_plus, nin_plus)` restricted to the surviving frames.
pub fn discard_silent_frames(
    nout_plus: PreprocessedSpectrogram,
    nin_plus: PreprocessedSpectrogram,
) -> Result<(PreprocessedSpectrogram, PreprocessedSpectrogram)> {
    if nout_plus.values.dim() != nin_plus.values.dim() {
        return Err(Error::ShapeMismatch(format!(
            "pre-processed spectrograms differ: {:?} vs {:?}",
            nout_plus.values.dim(),
            nin_plus.values.dim()
        )));
    }
    let keep: Vec<usize> = nout_plus
        .values
        .outer_iter()
        .enumerate()
        .filter(|(_, row)| row.iter().any(|&v| v > 0.0))
        .map(|(l, _)| l)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyAfterPreprocessing);
    }
    let restrict = |p: PreprocessedSpectrogram| PreprocessedSpectrogram {
        values: p.values.select(Axis(0), &keep),
        kept_frames: keep.iter().map(|&l| p.kept_frames[l]).collect(),
        thr: p.thr,
        p_dba: p.p_dba,
    };
    Ok((restrict(nout_plus), restrict(nin_plus)))
}

/// Full chain for a signal pair: dBA, threshold from `nout`, limit/shift,
/// frame discard. Returns `(nin_plus, nout_plus)`.
pub fn preprocess_pair(
    nin: &PowerSpectrogram,
    nout: &PowerSpectrogram,
) -> Result<(PreprocessedSpectrogram, PreprocessedSpectrogram)> {
    if nin.power.dim() != nout.power.dim() {
        return Err(Error::ShapeMismatch(format!(
            "power spectrograms differ: {:?} vs {:?}",
            nin.power.dim(),
            nout.power.dim()
        )));
    }
    let table = AWeightTable::new(&nout.config);
    let out_dba = to_dba(nout, &table);
    let in_dba = to_dba(nin, &table);
    let Threshold { p_dba, thr } = compute_threshold(&out_dba);
    let all: Vec<usize> = (0..nout.num_frames()).collect();
    let wrap = |dba: &Array2<f64>| PreprocessedSpectrogram {
        values: limit_shift(dba, thr),
        kept_frames: all.clone(),
        thr,
        p_dba,
    };
    let (out_plus, in_plus) = discard_silent_frames(wrap(&out_dba), wrap(&in_dba))?;
    Ok((in_plus, out_plus))
}

/// Half-open-below frequency interval `(low_hz, high_hz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl Band {
    pub fn contains(&self, f: f64) -> bool {
        self.low_hz < f && f <= self.high_hz
    }
}

/// Ordered, non-overlapping analysis bands.
#[derive(Debug, Clone, PartialEq)]
pub struct SubBandLayout {
    bands: Vec<Band>,
}

impl Default for SubBandLayout {
    /// `(50, 750]`, `(750, 6000]` and `(6000, 16000]` Hz.
    fn default() -> Self {
        Self::from_edges(&[50.0, 750.0, 6_000.0, 16_000.0]).expect("default edges are valid")
    }
}

impl SubBandLayout {
    pub fn new(bands: Vec<Band>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidConfig("band layout is empty".into()));
        }
        for b in &bands {
            if !(b.low_hz >= 0.0 && b.low_hz < b.high_hz && b.high_hz.is_finite()) {
                return Err(Error::InvalidConfig(format!("bad band ({}, {}]", b.low_hz, b.high_hz)));
            }
        }
        if bands.windows(2).any(|w| w[1].low_hz < w[0].high_hz) {
            return Err(Error::InvalidConfig("bands must be ascending and non-overlapping".into()));
        }
        Ok(Self { bands })
    }

    /// Contiguous bands between consecutive edges.
    pub fn from_edges(edges: &[f64]) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidConfig("need at least two band edges".into()));
        }
        Self::new(edges.windows(2).map(|w| Band { low_hz: w[0], high_hz: w[1] }).collect())
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    /// Bin index range of every band on `cfg`'s grid.
    pub fn band_bins(&self, cfg: &StftConfig) -> Result<Vec<Range<usize>>> {
        self.bands
            .iter()
            .map(|b| {
                let bins: Vec<usize> = (0..cfg.num_bins()).filter(|&k| b.contains(cfg.bin_hz(k))).collect();
                if bins.len() < 2 {
                    return Err(Error::DegenerateBand { low_hz: b.low_hz, high_hz: b.high_hz, bins: bins.len() });
                }
                Ok(bins[0]..bins[bins.len() - 1] + 1)
            })
            .collect()
    }
}
