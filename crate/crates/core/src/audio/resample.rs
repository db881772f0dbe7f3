//! Band-limited resampling with a Kaiser-windowed sinc kernel.
//!
//! The kernel cuts off at half the lower of the two rates and spans 64 periods
//! of that rate (64 taps per phase when upsampling). For rational ratios with
//! a small numerator the per-phase kernels are tabulated once; otherwise each
//! output sample evaluates the kernel directly.

use super::AudioBuffer;
use crate::error::{Error, Result};

/// Sample rate all measures operate at.
pub const ANALYSIS_RATE: u32 = 48_000;

const HALF_TAPS: usize = 32;
const KAISER_BETA: f64 = 10.0;
const MAX_TABLE_PHASES: u64 = 4096;

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

struct Kernel {
    /// Cutoff relative to the source rate (1.0 = source Nyquist).
    scale: f64,
    /// Half-width in source samples.
    half_width: f64,
    i0_beta: f64,
}

impl Kernel {
    fn new(source: u32, target: u32) -> Self {
        let scale = (f64::from(target) / f64::from(source)).min(1.0);
        Self { scale, half_width: HALF_TAPS as f64 / scale, i0_beta: bessel_i0(KAISER_BETA) }
    }

    fn eval(&self, t: f64) -> f64 {
        let r = t / self.half_width;
        if r.abs() >= 1.0 {
            return 0.0;
        }
        let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / self.i0_beta;
        self.scale * sinc(self.scale * t) * window
    }

    /// Taps for an output instant `frac` source samples past source index
    /// `first + reach`, normalized to unit DC gain.
    fn taps(&self, frac: f64, out: &mut Vec<f64>) {
        let reach = self.half_width.ceil() as i64;
        out.clear();
        out.extend((-reach + 1..=reach).map(|j| self.eval(j as f64 - frac)));
        let sum: f64 = out.iter().sum();
        out.iter_mut().for_each(|h| *h /= sum);
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn resample_channel(x: &[f64], source: u32, target: u32, out_len: usize) -> Vec<f64> {
    let kernel = Kernel::new(source, target);
    let reach = kernel.half_width.ceil() as i64;
    let g = gcd(u64::from(source), u64::from(target));
    let (up, down) = (u64::from(target) / g, u64::from(source) / g);

    let table: Option<Vec<Vec<f64>>> = (up <= MAX_TABLE_PHASES).then(|| {
        (0..up)
            .map(|p| {
                let mut t = Vec::new();
                kernel.taps(p as f64 / up as f64, &mut t);
                t
            })
            .collect()
    });

    let n = x.len() as i64;
    let mut scratch = Vec::new();
    (0..out_len as u64)
        .map(|m| {
            let pos = m * down;
            let base = (pos / up) as i64;
            let taps: &[f64] = match &table {
                Some(t) => &t[(pos % up) as usize],
                None => {
                    kernel.taps((pos % up) as f64 / up as f64, &mut scratch);
                    &scratch
                }
            };
            let first = base - reach + 1;
            taps.iter()
                .enumerate()
                .filter_map(|(j, h)| {
                    let i = first + j as i64;
                    (0..n).contains(&i).then(|| h * x[i as usize])
                })
                .sum()
        })
        .collect()
}

/// Converts `buf` to `target_rate`.
///
/// Output length is `round(len * target / source)`. Equal rates return an
/// identical copy.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    if target_rate == 0 {
        return Err(Error::InvalidConfig("target sample rate must be positive".into()));
    }
    let source = buf.sample_rate();
    if source == target_rate {
        return Ok(buf.clone());
    }
    let out_len = (buf.len() as f64 * f64::from(target_rate) / f64::from(source)).round() as usize;
    let channels = buf
        .channels()
        .map(|c| resample_channel(c, source, target_rate, out_len))
        .collect();
    AudioBuffer::new(channels, target_rate)
}
