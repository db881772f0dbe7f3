//! Controlled spectral-hole distortion.
//!
//! A fixed share of STFT bins is set to zero and the signal is resynthesized.
//!
//! # Mask generation
//!
//! Masks are reproducible from `(seed, channel)` alone:
//!
//! 1. The 64-bit seed is expanded to a 32-byte ChaCha key by four SplitMix64
//!    outputs, each written little-endian.
//! 2. A ChaCha8 stream cipher keyed this way, with stream id = channel
//!    index, yields 64-bit words (`next_u64`).
//! 3. Bounded draws in `[0, n)` use Lemire's multiply-shift with rejection:
//!    `m = x * n` as 128-bit; reject while `(m mod 2^64) < (2^64 - n) mod n`;
//!    return `m >> 64`.
//! 4. `count` positions are chosen by a partial Fisher-Yates shuffle of
//!    `0..total`: for `i` in `0..count`, swap position `i` with
//!    `i + draw(total - i)`. The first `count` entries are the mask.
//!
//! Because the shuffle is a prefix of one permutation, a larger percentage
//! with the same seed zeroes a superset of the bins of a smaller one.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::stft::{ComplexSpectrogram, Stft, StftConfig};

/// Largest share of bins the response experiment zeroes by default.
pub const MAX_EXPERIMENT_PERCENT: f64 = 99.8;

/// Which bins compete for the mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskScope {
    /// One draw over every `(frame, bin)` cell.
    #[default]
    Global,
    /// The same count drawn independently within every frame.
    PerFrame,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSpec {
    percent: f64,
    pub seed: u64,
    pub scope: MaskScope,
}

impl DistortionSpec {
    /// `percent` must lie in `[0, 100]`.
    pub fn new(percent: f64, seed: u64, scope: MaskScope) -> Result<Self> {
        if !(0.0..=100.0).contains(&percent) {
            return Err(Error::InvalidConfig(format!("zeroing percentage {percent} outside [0, 100]")));
        }
        Ok(Self { percent, seed, scope })
    }

    pub fn percent(&self) -> f64 {
        self.percent
    }

    /// Exact number of cells zeroed out of `total`.
    pub fn count_of(&self, total: usize) -> usize {
        ((self.percent / 100.0 * total as f64).round() as usize).min(total)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes several words into one seed, e.g. a run seed with an item index.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut state = 0;
    let mut out = 0;
    for &p in parts {
        state ^= p;
        out = splitmix64(&mut state);
        state = out;
    }
    out
}

/// The mask generator for `(seed, stream)`.
pub fn mask_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

fn bounded(rng: &mut impl RngCore, n: u64) -> u64 {
    let threshold = n.wrapping_neg() % n;
    loop {
        let m = u128::from(rng.next_u64()) * u128::from(n);
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}

/// `count` distinct indices from `0..total`, in draw order.
pub fn choose_indices(rng: &mut impl RngCore, total: usize, count: usize) -> Vec<usize> {
    let count = count.min(total);
    let mut perm: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = i + bounded(rng, (total - i) as u64) as usize;
        perm.swap(i, j);
    }
    perm.truncate(count);
    perm
}

/// Zeroes bins of `spec` using stream 0 of the spec's seed.
pub fn zero_bins(spec: &ComplexSpectrogram, d: &DistortionSpec) -> ComplexSpectrogram {
    zero_bins_stream(spec, d, 0)
}

/// Zeroes bins of `spec` using an explicit generator stream.
pub fn zero_bins_stream(spec: &ComplexSpectrogram, d: &DistortionSpec, stream: u64) -> ComplexSpectrogram {
    let mut out = spec.clone();
    let (frames, bins) = out.bins.dim();
    let mut rng = mask_rng(d.seed, stream);
    match d.scope {
        MaskScope::Global => {
            let flat = out.bins.as_slice_mut().expect("owned spectrogram is contiguous");
            for i in choose_indices(&mut rng, frames * bins, d.count_of(frames * bins)) {
                flat[i] = Complex64::default();
            }
        }
        MaskScope::PerFrame => {
            let count = d.count_of(bins);
            for mut row in out.bins.outer_iter_mut() {
                for k in choose_indices(&mut rng, bins, count) {
                    row[k] = Complex64::default();
                }
            }
        }
    }
    out
}

/// Analyze, zero bins, resynthesize; every channel gets its own stream.
///
/// The output starts at the same sample as the input and spans the analyzed
/// frames, so the tail that does not fill a frame is dropped.
pub fn distort_audio(buf: &AudioBuffer, d: &DistortionSpec, cfg: StftConfig) -> Result<AudioBuffer> {
    if buf.sample_rate() != cfg.sample_rate() {
        return Err(Error::ShapeMismatch(format!(
            "buffer is at {} Hz, analysis expects {} Hz",
            buf.sample_rate(),
            cfg.sample_rate()
        )));
    }
    let stft = Stft::new(cfg);
    let channels = buf
        .channels()
        .enumerate()
        .map(|(ch, x)| {
            let spec = stft.analyze(x)?;
            Ok(stft.synthesize(&zero_bins_stream(&spec, d, ch as u64)))
        })
        .collect::<Result<Vec<_>>>()?;
    AudioBuffer::new(channels, buf.sample_rate())
}
