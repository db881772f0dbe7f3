//! Sample spectral kurtosis.
//!
//! The instantaneous kurtosis of a frame is `m4 / m2^2`, where `m2` and `m4`
//! are the central sample moments taken across its bins with divisor `K`
//! (no bias correction). A frame whose values are all equal has no defined
//! kurtosis; it is reported as `None` and skipped by the measures.

use ndarray::{ArrayView1, Axis};

use crate::stft::PowerSpectrogram;

/// Whether `m2` is indistinguishable from the rounding noise of a constant
/// frame whose largest magnitude is `scale`.
fn is_degenerate(m2: f64, scale: f64) -> bool {
    let noise = 4.0 * f64::EPSILON * scale;
    m2 <= noise * noise
}

/// Moments over an iterator that can be replayed. Two passes: mean, then
/// central sums.
fn kurtosis_of<I>(values: impl Fn() -> I) -> Option<f64>
where
    I: Iterator<Item = f64>,
{
    let (n, sum, scale) = values().fold((0usize, 0.0, 0.0_f64), |(n, s, m), v| (n + 1, s + v, m.max(v.abs())));
    if n < 2 {
        return None;
    }
    let mean = sum / n as f64;
    let (s2, s4) = values().fold((0.0, 0.0), |(s2, s4), v| {
        let d = (v - mean) * (v - mean);
        (s2 + d, s4 + d * d)
    });
    let m2 = s2 / n as f64;
    let m4 = s4 / n as f64;
    if !m2.is_finite() || is_degenerate(m2, scale) {
        return None;
    }
    Some(m4 / (m2 * m2))
}

/// Kurtosis across the bins of one frame; `None` for fewer than two bins or
/// zero variance.
pub fn instantaneous_kurtosis(frame: &[f64]) -> Option<f64> {
    kurtosis_of(|| frame.iter().copied())
}

/// Per-bin reciprocal temporal mean of a power spectrogram.
///
/// A bin whose mean is zero gets weight 0 and is left out of weighted
/// kurtosis computations.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaWeights(pub Vec<f64>);

impl AlphaWeights {
    pub fn uniform(bins: usize) -> Self {
        Self(vec![1.0; bins])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn alpha_weights(x: &PowerSpectrogram) -> AlphaWeights {
    let means = x.power.mean_axis(Axis(0)).unwrap_or_else(|| ndarray::Array1::zeros(x.num_bins()));
    AlphaWeights(
        means
            .iter()
            .map(|&m| if m > 0.0 && m.is_finite() { 1.0 / m } else { 0.0 })
            .collect(),
    )
}

/// Kurtosis of `alpha(k) * frame(k)` over the bins with non-zero weight.
pub fn weighted_instantaneous_kurtosis(frame: &[f64], alpha: &AlphaWeights) -> Option<f64> {
    debug_assert_eq!(frame.len(), alpha.0.len());
    kurtosis_of(|| {
        frame
            .iter()
            .zip(&alpha.0)
            .filter(|(_, &a)| a != 0.0)
            .map(|(x, a)| a * x)
    })
}

/// Per-frame kurtosis of a spectrogram; `None` marks frames without a
/// defined value.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameKurtosisSeries(pub Vec<Option<f64>>);

impl FrameKurtosisSeries {
    pub fn of(x: &PowerSpectrogram) -> Self {
        Self(x.power.outer_iter().map(|row| view_kurtosis(row, None)).collect())
    }

    pub fn weighted(x: &PowerSpectrogram, alpha: &AlphaWeights) -> Self {
        Self(x.power.outer_iter().map(|row| view_kurtosis(row, Some(alpha))).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.0.iter().flatten().count()
    }

    pub fn valid_mask(&self) -> Vec<bool> {
        self.0.iter().map(Option::is_some).collect()
    }

    /// Mean over valid frames, `None` when there are none.
    pub fn mean_valid(&self) -> Option<f64> {
        let n = self.valid_count();
        (n > 0).then(|| self.0.iter().flatten().sum::<f64>() / n as f64)
    }
}

fn view_kurtosis(row: ArrayView1<'_, f64>, alpha: Option<&AlphaWeights>) -> Option<f64> {
    match (row.as_slice(), alpha) {
        (Some(s), None) => instantaneous_kurtosis(s),
        (Some(s), Some(a)) => weighted_instantaneous_kurtosis(s, a),
        (None, None) => instantaneous_kurtosis(&row.to_vec()),
        (None, Some(a)) => weighted_instantaneous_kurtosis(&row.to_vec(), a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stft::StftConfig;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs())
    }

    /// Textbook evaluation: explicit mean, explicit powers.
    fn oracle(x: &[f64]) -> Option<f64> {
        let k = x.len() as f64;
        let mean = x.iter().sum::<f64>() / k;
        let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
        let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / k;
        (m2 > 0.0).then(|| m4 / m2.powi(2))
    }

    #[test]
    fn hand_evaluated_frames() {
        assert!(rel_eq(instantaneous_kurtosis(&[0.0, 0.0, 0.0, 12.0]).unwrap(), 1701.0 / 729.0, 1e-12));
        assert!(rel_eq(instantaneous_kurtosis(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 1.64, 1e-12));
    }

    #[test]
    fn degenerate_frames_are_invalid() {
        assert_eq!(instantaneous_kurtosis(&[5.0, 5.0, 5.0, 5.0]), None);
        assert_eq!(instantaneous_kurtosis(&[0.1; 7]), None);
        assert_eq!(instantaneous_kurtosis(&[3.0]), None);
        assert_eq!(instantaneous_kurtosis(&[]), None);
    }

    #[test]
    fn alpha_is_reciprocal_temporal_mean() {
        let power = Array2::from_shape_vec((2, 3), vec![4.0, 1.0, 0.0, 4.0, 3.0, 0.0]).unwrap();
        let a = alpha_weights(&PowerSpectrogram { power, config: StftConfig::default() });
        assert_eq!(a.0, vec![0.25, 0.5, 0.0]);
    }

    #[test]
    fn weighting_can_flatten_a_frame() {
        let a = AlphaWeights(vec![0.5, 0.25]);
        assert_eq!(weighted_instantaneous_kurtosis(&[2.0, 4.0], &a), None);
    }

    #[test]
    fn zero_alpha_excludes_bin() {
        let a = AlphaWeights(vec![1.0, 1.0, 0.0, 1.0, 1.0]);
        let w = weighted_instantaneous_kurtosis(&[1.0, 2.0, 99.0, 3.0, 4.0], &a).unwrap();
        assert!(rel_eq(w, 1.64, 1e-12));
    }

    #[test]
    fn series_mean_skips_invalid() {
        let s = FrameKurtosisSeries(vec![Some(2.0), None, Some(4.0)]);
        assert_eq!(s.mean_valid(), Some(3.0));
        assert_eq!(s.valid_mask(), vec![true, false, true]);
        assert_eq!(FrameKurtosisSeries(vec![None]).mean_valid(), None);
    }

    proptest! {
        #[test]
        fn matches_oracle_and_lower_bound(x in prop::collection::vec(0.0f64..1e3, 2..300)) {
            match (instantaneous_kurtosis(&x), oracle(&x)) {
                (Some(a), Some(b)) => {
                    prop_assert!(rel_eq(a, b, 1e-9));
                    prop_assert!(a >= 1.0 - 1e-12);
                }
                (None, _) => prop_assert!(x.iter().all(|&v| v == x[0])),
                (Some(_), None) => prop_assert!(false, "oracle undefined"),
            }
        }

        #[test]
        fn scale_and_shift_invariant(
            x in prop::collection::vec(0.0f64..100.0, 4..200),
            c in prop_oneof![0.01f64..100.0, -100.0f64..-0.01],
            shift in -50.0f64..50.0,
        ) {
            prop_assume!(oracle(&x).is_some_and(|_| {
                let mean = x.iter().sum::<f64>() / x.len() as f64;
                x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64 > 1e-6
            }));
            let base = instantaneous_kurtosis(&x).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
            let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
            prop_assert!(rel_eq(instantaneous_kurtosis(&scaled).unwrap(), base, 1e-9));
            prop_assert!(rel_eq(instantaneous_kurtosis(&shifted).unwrap(), base, 1e-9));
        }

        #[test]
        fn uniform_alpha_equals_unweighted(x in prop::collection::vec(0.0f64..1e3, 2..100)) {
            prop_assert_eq!(
                weighted_instantaneous_kurtosis(&x, &AlphaWeights::uniform(x.len())),
                instantaneous_kurtosis(&x)
            );
        }
    }
}
