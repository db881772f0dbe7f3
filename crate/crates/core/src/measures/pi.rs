//! Sub-band, energy-weighted absolute log-kurtosis ratio.
//!
//! After pre-processing, each band `B` yields per frame an absolute log ratio
//! `|ln(kurt_out^B / kurt_in^B)|`, limited to [`BAND_DELTA_LIMIT`], and an
//! energy weight `10 log10(mean_k 10^(X+_out/10))`. The band with the largest
//! weighted sum of ratios is selected and its weighted mean ratio is the
//! measure. Frames where either in-band kurtosis is undefined drop out of both
//! the weighted sum and the weight total.

use std::ops::Range;

use ndarray::{Array2, ArrayView1};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::kurtosis::instantaneous_kurtosis;
use crate::prepro::{preprocess_pair, PreprocessedSpectrogram, SubBandLayout};
use crate::stft::PowerSpectrogram;

use super::{measure_audio, MeasureId, MeasureResult, MeasureSettings};

/// Per-frame limit on the band log-kurtosis ratio; also the largest possible
/// value of the measure.
pub const BAND_DELTA_LIMIT: f64 = 0.5;

/// Energy weight of one frame of a band of non-negative limited dBA values.
pub fn band_energy_weight(nout_band: &[f64]) -> f64 {
    if nout_band.is_empty() {
        return 0.0;
    }
    let mean = nout_band.iter().map(|v| 10f64.powf(v / 10.0)).sum::<f64>() / nout_band.len() as f64;
    10.0 * mean.log10()
}

/// `|ln(kurt(nout) / kurt(nin))|` limited to [`BAND_DELTA_LIMIT`]; `None`
/// when either kurtosis is undefined.
pub fn band_delta_kurt(nin_band: &[f64], nout_band: &[f64]) -> Option<f64> {
    let kin = instantaneous_kurtosis(nin_band)?;
    let kout = instantaneous_kurtosis(nout_band)?;
    Some((kout / kin).ln().abs().min(BAND_DELTA_LIMIT))
}

/// Frame-wise analysis of one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandAnalysis {
    pub band: usize,
    pub bins: Range<usize>,
    /// Limited ratio per analyzed frame.
    pub dk_frames: Vec<Option<f64>>,
    /// Energy weight per analyzed frame.
    pub weights: Vec<f64>,
    /// Sum of `weight * ratio` over frames with a defined ratio.
    pub selection_score: f64,
    /// Sum of weights over the same frames.
    pub weight_total: f64,
    pub valid_frames: usize,
}

impl BandAnalysis {
    /// Whether at least one frame has a defined ratio.
    pub fn is_usable(&self) -> bool {
        self.valid_frames > 0
    }

    /// Weighted mean ratio, the value of the measure if this band is chosen.
    pub fn weighted_mean(&self) -> Option<f64> {
        (self.weight_total > 0.0).then(|| (self.selection_score / self.weight_total).min(BAND_DELTA_LIMIT))
    }
}

fn row_slice(values: &Array2<f64>, l: usize, bins: &Range<usize>) -> Vec<f64> {
    let row: ArrayView1<'_, f64> = values.row(l);
    row.slice(ndarray::s![bins.start..bins.end]).to_vec()
}

pub fn analyze_band(
    nin_plus: &PreprocessedSpectrogram,
    nout_plus: &PreprocessedSpectrogram,
    band: usize,
    bins: Range<usize>,
) -> BandAnalysis {
    let frames = nout_plus.num_frames();
    let mut dk_frames = Vec::with_capacity(frames);
    let mut weights = Vec::with_capacity(frames);
    let (mut score, mut total, mut valid) = (0.0, 0.0, 0);
    for l in 0..frames {
        let out = row_slice(&nout_plus.values, l, &bins);
        let inp = row_slice(&nin_plus.values, l, &bins);
        let w = band_energy_weight(&out);
        let dk = band_delta_kurt(&inp, &out);
        if let Some(d) = dk {
            score += w * d;
            total += w;
            valid += 1;
        }
        dk_frames.push(dk);
        weights.push(w);
    }
    BandAnalysis { band, bins, dk_frames, weights, selection_score: score, weight_total: total, valid_frames: valid }
}

/// Index of the usable band with the largest selection score; ties go to
/// the lower band.
pub fn select_band(analyses: &[BandAnalysis]) -> Result<usize> {
    let mut best: Option<&BandAnalysis> = None;
    for a in analyses.iter().filter(|a| a.is_usable() && a.weight_total > 0.0) {
        if best.is_none_or(|b| a.selection_score > b.selection_score) {
            best = Some(a);
        }
    }
    best.map(|a| a.band)
        .ok_or_else(|| Error::NotComputable("no band has a frame with defined kurtosis in both signals".into()))
}

/// Everything computed on the way to the sub-band measure.
#[derive(Debug, Clone)]
pub struct PiAnalysis {
    pub nin_plus: PreprocessedSpectrogram,
    pub nout_plus: PreprocessedSpectrogram,
    pub bands: Vec<BandAnalysis>,
    pub result: MeasureResult,
}

/// The sub-band measure on a pair of aligned power spectrograms.
pub fn delta_kurt_pi_power(
    nin: &PowerSpectrogram,
    nout: &PowerSpectrogram,
    layout: &SubBandLayout,
) -> Result<PiAnalysis> {
    let band_bins = layout.band_bins(&nout.config)?;
    let (nin_plus, nout_plus) = preprocess_pair(nin, nout)?;
    let bands: Vec<BandAnalysis> = band_bins
        .into_iter()
        .enumerate()
        .map(|(b, bins)| analyze_band(&nin_plus, &nout_plus, b, bins))
        .collect();
    let chosen = select_band(&bands)?;
    let band = &bands[chosen];
    let raw = band
        .weighted_mean()
        .ok_or_else(|| Error::NotComputable("selected band has zero total weight".into()))?;
    let result = MeasureResult {
        measure: MeasureId::DeltaKurtPi,
        raw,
        scaled: MeasureId::DeltaKurtPi.scale(raw),
        selected_band: Some(chosen),
        n_frames: band.valid_frames,
        frame_trace: Some(band.dk_frames.clone()),
        channel: 0,
    };
    Ok(PiAnalysis { nin_plus, nout_plus, bands, result })
}

/// The sub-band measure on an audio pair; multichannel input reports the
/// worst channel.
pub fn delta_kurt_pi(nin: &AudioBuffer, nout: &AudioBuffer, settings: &MeasureSettings) -> Result<MeasureResult> {
    let mut results = measure_audio(&[MeasureId::DeltaKurtPi], nin, nout, settings)?;
    results.pop().expect("one measure requested").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stft::StftConfig;
    use ndarray::Array2;

    fn pre(values: Array2<f64>) -> PreprocessedSpectrogram {
        let n = values.nrows();
        PreprocessedSpectrogram { values, kept_frames: (0..n).collect(), thr: 0.0, p_dba: 20.0 }
    }

    fn band(score: f64, valid: usize) -> BandAnalysis {
        BandAnalysis {
            band: 0,
            bins: 0..2,
            dk_frames: vec![],
            weights: vec![],
            selection_score: score,
            weight_total: if valid > 0 { 1.0 } else { 0.0 },
            valid_frames: valid,
        }
    }

    #[test]
    fn energy_weight_cases() {
        assert_eq!(band_energy_weight(&[0.0, 0.0, 0.0]), 0.0);
        assert!((band_energy_weight(&[20.0]) - 20.0).abs() < 1e-12);
        assert!((band_energy_weight(&[0.0, 20.0]) - 10.0 * 50.5f64.log10()).abs() < 1e-12);
        assert!((band_energy_weight(&[0.0, 20.0]) - 17.03).abs() < 0.01);
    }

    #[test]
    fn band_ratio_cases() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(band_delta_kurt(&a, &a), Some(0.0));
        assert_eq!(band_delta_kurt(&a, &[2.0; 4]), None);
        // [0,0,0,12] vs [1,2,3,4]: |ln(2.3333/1.64)| = 0.3526
        let d = band_delta_kurt(&[0.0, 0.0, 0.0, 12.0], &a).unwrap();
        assert!((d - (1.64f64 / (7.0 / 3.0)).ln().abs()).abs() < 1e-12);
        // a large ratio is limited
        let sparse: Vec<f64> = (0..64).map(|i| if i == 0 { 50.0 } else { 0.0 }).collect();
        let dense: Vec<f64> = (0..64).map(|i| (i % 2) as f64).collect();
        assert_eq!(band_delta_kurt(&dense, &sparse), Some(BAND_DELTA_LIMIT));
    }

    #[test]
    fn band_selection_rules() {
        let mut bands = vec![band(0.0, 3), band(0.0, 3), band(0.0, 3)];
        for (i, b) in bands.iter_mut().enumerate() {
            b.band = i;
        }
        assert_eq!(select_band(&bands).unwrap(), 0);
        bands[2].selection_score = 4.0;
        bands[1].selection_score = 4.0;
        assert_eq!(select_band(&bands).unwrap(), 1);
        bands[0].valid_frames = 0;
        bands[1].valid_frames = 0;
        assert_eq!(select_band(&bands).unwrap(), 2);
        bands[2].valid_frames = 0;
        assert!(matches!(select_band(&bands), Err(Error::NotComputable(_))));
    }

    #[test]
    fn constant_ratio_gives_that_ratio() {
        // every frame identical: same weight, same ratio
        let nout = Array2::from_shape_fn((6, 8), |(_, k)| if k == 3 { 30.0 } else { (k % 2) as f64 });
        let nin = Array2::from_shape_fn((6, 8), |(_, k)| (k % 3) as f64 * 4.0);
        let a = analyze_band(&pre(nin.clone()), &pre(nout.clone()), 0, 0..8);
        let d = band_delta_kurt(&nin.row(0).to_vec(), &nout.row(0).to_vec()).unwrap();
        assert!((a.weighted_mean().unwrap() - d).abs() < 1e-12);
        assert_eq!(a.valid_frames, 6);
    }

    #[test]
    fn invalid_frames_leave_both_sums() {
        let nout = Array2::from_shape_vec((2, 4), vec![0.0, 0.0, 0.0, 12.0, 5.0, 5.0, 5.0, 5.0]).unwrap();
        let nin = Array2::from_shape_vec((2, 4), vec![1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let a = analyze_band(&pre(nin), &pre(nout), 0, 0..4);
        assert_eq!(a.valid_frames, 1);
        assert_eq!(a.dk_frames[1], None);
        let w0 = band_energy_weight(&[0.0, 0.0, 0.0, 12.0]);
        assert!((a.weight_total - w0).abs() < 1e-12);
        assert!(a.weights[1] > 0.0);
    }

    #[test]
    fn identical_spectrograms_score_zero_in_first_band() {
        let cfg = StftConfig::default();
        let power = Array2::from_shape_fn((4, cfg.num_bins()), |(l, k)| 1.0 + ((k * 7 + l * 3) % 11) as f64);
        let x = PowerSpectrogram { power, config: cfg };
        let a = delta_kurt_pi_power(&x, &x, &SubBandLayout::default()).unwrap();
        assert_eq!(a.result.raw, 0.0);
        assert_eq!(a.result.scaled, 0.0);
        assert_eq!(a.result.selected_band, Some(0));
    }
}
