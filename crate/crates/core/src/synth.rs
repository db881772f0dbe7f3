//! Deterministic synthetic test material.
//!
//! Stand-ins for recorded items: a plucked arpeggio (sparse, tonal), a
//! speech-like voice (voiced syllables with formants plus fricatives) and a
//! handful of stereo backgrounds. [`test_set`] mixes voice over backgrounds,
//! voice panned to the centre, the way speech-over-background test items are
//! usually built.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::audio::AudioBuffer;
use crate::eval::ExperimentItem;

fn samples(duration_s: f64, rate: u32) -> usize {
    (duration_s * f64::from(rate)).round() as usize
}

fn normalize_peak(x: &mut [f64], peak: f64) {
    let m = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v *= peak / m);
    }
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt()
}

fn midi_hz(note: f64) -> f64 {
    440.0 * 2f64.powf((note - 69.0) / 12.0)
}

/// Plucked-string arpeggio: notes every 300 ms rising and falling over three
/// octaves, each a decaying series of 24 slightly stretched harmonics with
/// 1/h amplitudes. Peak-normalized to 0.5.
pub fn harp_arpeggio(duration_s: f64, rate: u32, seed: u64) -> Vec<f64> {
    let n = samples(duration_s, rate);
    let fs = f64::from(rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chord = [0.0, 4.0, 7.0, 12.0, 16.0, 19.0, 24.0, 28.0, 31.0, 36.0];
    let up_down: Vec<f64> = chord.iter().chain(chord.iter().rev().skip(1).take(chord.len() - 2)).copied().collect();
    let base = 48.0 + f64::from(rng.random_range(0..5u8));
    let step = (0.3 * fs) as usize;
    let ring = (2.5 * fs) as usize;

    let mut out = vec![0.0; n];
    let mut onset = 0;
    let mut idx = 0;
    while onset < n {
        let f0 = midi_hz(base + up_down[idx % up_down.len()]);
        let vel = rng.random_range(0.6..1.0);
        let end = (onset + ring).min(n);
        for h in 1..=24 {
            let hf = h as f64;
            // mild stiffness
            let f = f0 * hf * (1.0 + 0.0004 * hf * hf).sqrt();
            if f > 0.45 * fs {
                break;
            }
            let amp = vel / hf;
            let tau = 1.2 / (1.0 + 0.35 * hf);
            let phase = rng.random_range(0.0..2.0 * PI);
            for (i, o) in out[onset..end].iter_mut().enumerate() {
                let t = i as f64 / fs;
                let attack = (t / 0.004).min(1.0);
                *o += amp * attack * (-t / tau).exp() * (2.0 * PI * f * t + phase).sin();
            }
        }
        onset += step;
        idx += 1;
    }
    normalize_peak(&mut out, 0.5);
    out
}

/// Vowel formant centres and bandwidths in Hz.
const VOWELS: [[(f64, f64); 3]; 5] = [
    [(730.0, 90.0), (1090.0, 110.0), (2440.0, 170.0)],
    [(270.0, 60.0), (2290.0, 100.0), (3010.0, 120.0)],
    [(530.0, 60.0), (1840.0, 90.0), (2480.0, 150.0)],
    [(570.0, 70.0), (840.0, 80.0), (2410.0, 170.0)],
    [(300.0, 60.0), (870.0, 90.0), (2240.0, 150.0)],
];

fn formant_gain(f: f64, vowel: &[(f64, f64); 3]) -> f64 {
    vowel
        .iter()
        .enumerate()
        .map(|(i, &(fc, bw))| {
            let x = (f - fc) / (bw / 2.0);
            (1.0 / (1.0 + x * x)) / (1.0 + i as f64 * 0.6)
        })
        .sum::<f64>()
        + 0.01
}

/// Voiced syllables with a drifting pitch and formant-shaped harmonics,
/// separated by pauses and occasional fricative bursts. RMS-normalized to
/// 0.1 over the whole signal.
pub fn speech_like(duration_s: f64, rate: u32, seed: u64) -> Vec<f64> {
    let n = samples(duration_s, rate);
    let fs = f64::from(rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EEC);
    let mut out = vec![0.0; n];
    let register = if rng.random_bool(0.5) { 110.0 } else { 200.0 };
    let mut t0 = (rng.random_range(0.05..0.3) * fs) as usize;
    while t0 < n {
        let len = (rng.random_range(0.12..0.32) * fs) as usize;
        let end = (t0 + len).min(n);
        let vowel = &VOWELS[rng.random_range(0..VOWELS.len())];
        let f_start = register * rng.random_range(0.85..1.2);
        let f_end = f_start * rng.random_range(0.8..1.15);
        let seg = end - t0;
        let mut phase = 0.0;
        for i in 0..seg {
            let u = i as f64 / seg.max(1) as f64;
            let f0 = f_start + (f_end - f_start) * u;
            phase += 2.0 * PI * f0 / fs;
            let env = (PI * u).sin().powf(0.6);
            let mut v = 0.0;
            let mut h = 1.0;
            while h * f0 < 5000.0 {
                v += formant_gain(h * f0, vowel) / h.sqrt() * (h * phase).sin();
                h += 1.0;
            }
            out[t0 + i] += env * v;
        }
        // fricative onset or coda
        if rng.random_bool(0.4) {
            let flen = (rng.random_range(0.05..0.12) * fs) as usize;
            let start = if rng.random_bool(0.5) { t0.saturating_sub(flen) } else { end };
            let mut prev = 0.0;
            let level = rng.random_range(0.05..0.15);
            for i in 0..flen.min(n.saturating_sub(start)) {
                let w: f64 = rng.sample(StandardNormal);
                let env = (PI * i as f64 / flen as f64).sin();
                // first difference tilts the noise towards high frequencies
                out[start + i] += level * env * (w - prev);
                prev = w;
            }
        }
        t0 = end + (rng.random_range(0.04..0.35) * fs) as usize;
    }
    let r = rms(&out);
    if r > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.1 / r);
    }
    out
}

/// Background character for [`background`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Background {
    /// 1/f noise.
    Pink,
    /// Low-passed noise with slow level swells.
    Wind,
    /// Sustained harmonic chord with tremolo.
    Pad,
    /// The plucked arpeggio.
    Harp,
    /// White noise with sparse clicks.
    Rain,
    /// Overlapping distant voices.
    Babble,
}

impl Background {
    pub const ALL: [Background; 6] =
        [Background::Pink, Background::Wind, Background::Pad, Background::Harp, Background::Rain, Background::Babble];

    pub fn name(self) -> &'static str {
        match self {
            Background::Pink => "pink",
            Background::Wind => "wind",
            Background::Pad => "pad",
            Background::Harp => "harp",
            Background::Rain => "rain",
            Background::Babble => "babble",
        }
    }
}

/// Paul Kellett's economy pink filter over white Gaussian noise.
fn pink(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    (0..n)
        .map(|_| {
            let w: f64 = rng.sample(StandardNormal);
            b0 = 0.99765 * b0 + w * 0.0990460;
            b1 = 0.96300 * b1 + w * 0.2965164;
            b2 = 0.57000 * b2 + w * 1.0526913;
            b0 + b1 + b2 + w * 0.1848
        })
        .collect()
}

fn background_channel(kind: Background, n: usize, rate: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let fs = f64::from(rate);
    match kind {
        Background::Pink => pink(n, rng),
        Background::Wind => {
            let mut lp = 0.0;
            let rate_hz = rng.random_range(0.1..0.3);
            let ph = rng.random_range(0.0..2.0 * PI);
            (0..n)
                .map(|i| {
                    let w: f64 = rng.sample(StandardNormal);
                    lp += 0.02 * (w - lp);
                    lp * (1.2 + (2.0 * PI * rate_hz * i as f64 / fs + ph).sin())
                })
                .collect()
        }
        Background::Pad => {
            let root = midi_hz(f64::from(rng.random_range(45..52u8)));
            let notes = [1.0, 1.25, 1.5, 2.0];
            let detune = rng.random_range(0.998..1.002);
            let trem = rng.random_range(3.0..6.0);
            let phases: Vec<f64> = (0..notes.len() * 6).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    let mut v = 0.0;
                    for (j, r) in notes.iter().enumerate() {
                        for h in 1..=6 {
                            let f = root * r * detune * h as f64;
                            v += (2.0 * PI * f * t + phases[j * 6 + h - 1]).sin() / h as f64;
                        }
                    }
                    v * (1.0 + 0.3 * (2.0 * PI * trem * t).sin())
                })
                .collect()
        }
        Background::Harp => harp_arpeggio(n as f64 / fs, rate, rng.random()),
        Background::Rain => {
            let mut x: Vec<f64> = (0..n).map(|_| 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
            let clicks = (n as f64 / fs * 40.0) as usize;
            for _ in 0..clicks {
                let at = rng.random_range(0..n);
                let amp = rng.random_range(1.0..4.0);
                for (k, v) in x[at..(at + 64).min(n)].iter_mut().enumerate() {
                    *v += amp * (-(k as f64) / 8.0).exp() * if k % 2 == 0 { 1.0 } else { -1.0 };
                }
            }
            x
        }
        Background::Babble => {
            let mut x = vec![0.0; n];
            for _ in 0..4 {
                let voice = speech_like(n as f64 / fs, rate, rng.random());
                x.iter_mut().zip(voice).for_each(|(a, b)| *a += b);
            }
            x
        }
    }
}

/// Stereo background whose channels are independent realizations.
pub fn background(kind: Background, duration_s: f64, rate: u32, seed: u64) -> [Vec<f64>; 2] {
    let n = samples(duration_s, rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xB6);
    let l = background_channel(kind, n, rate, &mut rng);
    let r = background_channel(kind, n, rate, &mut rng);
    [l, r]
}

/// Speech-like voice over a stereo background at `snr_db` (voice RMS over
/// background RMS), voice centred. The mix is peak-normalized to 0.7.
pub fn speech_over_background(
    kind: Background,
    snr_db: f64,
    duration_s: f64,
    rate: u32,
    seed: u64,
) -> AudioBuffer {
    let voice = speech_like(duration_s, rate, seed);
    let [mut l, mut r] = background(kind, duration_s, rate, seed.wrapping_add(1));
    let bg_rms = (rms(&l).powi(2) + rms(&r).powi(2)).sqrt() / 2f64.sqrt();
    let gain = if bg_rms > 0.0 { rms(&voice) / bg_rms / 10f64.powf(snr_db / 20.0) } else { 0.0 };
    for ((a, b), v) in l.iter_mut().zip(r.iter_mut()).zip(&voice) {
        *a = *a * gain + v;
        *b = *b * gain + v;
    }
    let peak = l.iter().chain(&r).fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let g = 0.7 / peak;
        l.iter_mut().chain(r.iter_mut()).for_each(|v| *v *= g);
    }
    AudioBuffer::new(vec![l, r], rate).expect("channels have equal length")
}

/// `n` stereo items cycling through the backgrounds at SNRs between 0 and
/// 10 dB.
pub fn test_set(n: usize, duration_s: f64, rate: u32, seed: u64) -> Vec<ExperimentItem> {
    const SNRS: [f64; 4] = [0.0, 5.0, 10.0, 3.0];
    (0..n)
        .map(|i| {
            let kind = Background::ALL[i % Background::ALL.len()];
            let snr = SNRS[i % SNRS.len()];
            ExperimentItem {
                name: format!("item{:02}_{}", i + 1, kind.name()),
                audio: speech_over_background(kind, snr, duration_s, rate, seed.wrapping_add(i as u64 * 7919)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_and_bounded() {
        let a = harp_arpeggio(1.0, 48_000, 3);
        assert_eq!(a, harp_arpeggio(1.0, 48_000, 3));
        assert_eq!(a.len(), 48_000);
        assert!(a.iter().all(|v| v.abs() <= 0.5 + 1e-12));
        let s = speech_like(1.0, 48_000, 3);
        assert!((rms(&s) - 0.1).abs() < 1e-9);
    }

    #[test]
    fn test_set_items_are_stereo_and_distinct() {
        let items = test_set(3, 0.5, 48_000, 1);
        assert_eq!(items.len(), 3);
        for it in &items {
            assert_eq!(it.audio.num_channels(), 2);
            assert_eq!(it.audio.len(), 24_000);
            assert_ne!(it.audio.channel(0), it.audio.channel(1));
        }
        assert_ne!(items[0].audio, items[1].audio);
    }
}
