//! Minimal RIFF/WAVE codec.
//!
//! Reads PCM integer (8/16/24/32-bit) and IEEE float (32/64-bit) data,
//! including `WAVE_FORMAT_EXTENSIBLE` headers. Integer samples are scaled by
//! `2^(bits-1)`, so the most negative code maps to exactly `-1.0`.

use std::fs;
use std::path::Path;

use super::AudioBuffer;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Sample encoding used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleFormat {
    Pcm16,
    Pcm24,
    Pcm32,
    #[default]
    Float32,
    Float64,
}

impl SampleFormat {
    fn bits(self) -> u16 {
        match self {
            SampleFormat::Pcm16 => 16,
            SampleFormat::Pcm24 => 24,
            SampleFormat::Pcm32 | SampleFormat::Float32 => 32,
            SampleFormat::Float64 => 64,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, SampleFormat::Float32 | SampleFormat::Float64)
    }
}

pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    decode_wav(&fs::read(path)?)
}

pub fn save_wav(path: impl AsRef<Path>, buf: &AudioBuffer, format: SampleFormat) -> Result<()> {
    fs::write(path, encode_wav(buf, format))?;
    Ok(())
}

struct Fmt {
    channels: u16,
    sample_rate: u32,
    bits: u16,
    float: bool,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<Fmt> {
    if body.len() < 16 {
        return Err(Error::CorruptFile("fmt chunk shorter than 16 bytes".into()));
    }
    let mut tag = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let bits = u16_at(body, 14);
    if tag == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the subformat GUID,
        // whose first two bytes carry the plain format tag.
        if body.len() < 26 {
            return Err(Error::CorruptFile("truncated WAVE_FORMAT_EXTENSIBLE header".into()));
        }
        tag = u16_at(body, 24);
    }
    let float = match (tag, bits) {
        (FORMAT_PCM, 8 | 16 | 24 | 32) => false,
        (FORMAT_FLOAT, 32 | 64) => true,
        (FORMAT_PCM | FORMAT_FLOAT, b) => {
            return Err(Error::UnsupportedFormat(format!("{b}-bit samples for format tag {tag:#06x}")))
        }
        (t, _) => return Err(Error::UnsupportedFormat(format!("format tag {t:#06x}"))),
    };
    if channels == 0 || sample_rate == 0 {
        return Err(Error::CorruptFile("zero channels or zero sample rate".into()));
    }
    Ok(Fmt { channels, sample_rate, bits, float })
}

fn decode_sample(raw: &[u8], fmt: &Fmt) -> f64 {
    match (fmt.float, fmt.bits) {
        (true, 32) => f64::from(f32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]])),
        (true, _) => f64::from_le_bytes(raw[..8].try_into().unwrap()),
        (false, 8) => (f64::from(raw[0]) - 128.0) / 128.0,
        (false, 16) => f64::from(i16::from_le_bytes([raw[0], raw[1]])) / 32_768.0,
        (false, 24) => {
            // sign-extend through the top byte of an i32
            let v = i32::from_le_bytes([0, raw[0], raw[1], raw[2]]) >> 8;
            f64::from(v) / 8_388_608.0
        }
        (false, _) => f64::from(i32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]])) / 2_147_483_648.0,
    }
}

/// Decodes a complete RIFF/WAVE byte stream.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::UnsupportedFormat("not a RIFF/WAVE stream".into()));
    }
    let mut pos = 12;
    let mut fmt = None;
    let mut data = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .ok_or_else(|| Error::CorruptFile("chunk size overflow".into()))?;
        if body_end > bytes.len() {
            return Err(Error::CorruptFile(format!(
                "chunk '{}' declares {size} bytes but only {} remain",
                String::from_utf8_lossy(id),
                bytes.len() - body_start
            )));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => fmt = Some(parse_fmt(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        if fmt.is_some() && data.is_some() {
            break;
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }
    let fmt = fmt.ok_or_else(|| Error::CorruptFile("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::CorruptFile("missing data chunk".into()))?;

    let width = usize::from(fmt.bits / 8);
    let nch = usize::from(fmt.channels);
    let frame_bytes = width * nch;
    if data.len() % frame_bytes != 0 {
        return Err(Error::CorruptFile(format!(
            "data chunk of {} bytes is not a whole number of {frame_bytes}-byte frames",
            data.len()
        )));
    }
    let frames = data.len() / frame_bytes;
    let mut channels = vec![Vec::with_capacity(frames); nch];
    for frame in data.chunks_exact(frame_bytes) {
        for (ch, raw) in channels.iter_mut().zip(frame.chunks_exact(width)) {
            ch.push(decode_sample(raw, &fmt));
        }
    }
    AudioBuffer::new(channels, fmt.sample_rate)
}

fn quantize(x: f64, bits: u16) -> i64 {
    let full = (1_i64 << (bits - 1)) as f64;
    (x * full).round().clamp(-full, full - 1.0) as i64
}

/// Encodes a buffer as a canonical 44-byte-header WAV stream.
pub fn encode_wav(buf: &AudioBuffer, format: SampleFormat) -> Vec<u8> {
    let bits = format.bits();
    let width = usize::from(bits / 8);
    let nch = buf.num_channels();
    let data_len = buf.len() * nch * width;
    let block_align = (nch * width) as u16;
    let tag = if format.is_float() { FORMAT_FLOAT } else { FORMAT_PCM };

    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16_u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&(nch as u16).to_le_bytes());
    out.extend_from_slice(&buf.sample_rate().to_le_bytes());
    out.extend_from_slice(&(buf.sample_rate() * u32::from(block_align)).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());

    let chans: Vec<&[f64]> = buf.channels().collect();
    for i in 0..buf.len() {
        for ch in &chans {
            let x = ch[i];
            match format {
                SampleFormat::Float32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
                SampleFormat::Float64 => out.extend_from_slice(&x.to_le_bytes()),
                SampleFormat::Pcm16 => out.extend_from_slice(&(quantize(x, 16) as i16).to_le_bytes()),
                SampleFormat::Pcm24 => out.extend_from_slice(&(quantize(x, 24) as i32).to_le_bytes()[..3]),
                SampleFormat::Pcm32 => out.extend_from_slice(&(quantize(x, 32) as i32).to_le_bytes()),
            }
        }
    }
    out
}
