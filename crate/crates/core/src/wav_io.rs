//! RIFF/WAVE reading and writing, plus the JSON sidecar that carries the
//! extraction parameters next to every watermarked file.
//!
//! Supported encodings are PCM 16-bit and IEEE float 32/64-bit, little
//! endian, one or two channels. PCM16 uses a scale of 32768 in both
//! directions, so writing clips `+1.0` to `32767`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::watermark::Mode;

const WAVE_FORMAT_PCM: u16 = 1;
const WAVE_FORMAT_IEEE_FLOAT: u16 = 3;
const WAVE_FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// PCM16 full-scale constant, used for both decoding and encoding.
pub const PCM16_SCALE: f64 = 32768.0;

/// Version written to and required from every sidecar.
pub const SIDECAR_FORMAT_VERSION: u32 = 1;

/// Suffix appended to an audio path to locate its sidecar.
pub const SIDECAR_SUFFIX: &str = ".wmmeta.json";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WavError {
    #[error("WAV data too short for a RIFF header ({0} bytes)")]
    TooSmall(usize),
    #[error("missing RIFF tag")]
    MissingRiff,
    #[error("missing WAVE tag")]
    MissingWave,
    #[error("chunk '{id}' declares {declared} bytes but only {available} remain")]
    TruncatedChunk {
        id: String,
        declared: usize,
        available: usize,
    },
    #[error("fmt chunk is {0} bytes, need at least 16")]
    FmtTooShort(usize),
    #[error("no fmt chunk before data")]
    MissingFmt,
    #[error("no data chunk")]
    MissingData,
    #[error("unsupported encoding: format tag {format:#06x}, {bits} bits per sample")]
    UnsupportedFormat { format: u16, bits: u16 },
    #[error("unsupported channel count {0}")]
    UnsupportedChannels(u16),
    #[error("file has {channels} channels; select one explicitly")]
    ChannelSelectRequired { channels: u16 },
    #[error("channel {requested} requested but file has {channels}")]
    ChannelOutOfRange { requested: u16, channels: u16 },
    #[error("expected a 2-channel complex carrier, found {0} channel(s)")]
    NotComplex(u16),
    #[error("sample rate is zero")]
    ZeroSampleRate,
    #[error("block align {found} does not match {channels} channel(s) of {bits} bits")]
    BadBlockAlign { found: u16, channels: u16, bits: u16 },
    #[error("data chunk of {len} bytes is not a whole number of {block}-byte frames")]
    PartialFrame { len: usize, block: usize },
    #[error("data chunk holds no samples")]
    EmptyData,
    #[error("non-finite sample at frame {0}")]
    NonFiniteSample(usize),
}

/// Sample encoding of a WAV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFormat {
    Pcm16,
    Float32,
    Float64,
}

impl SampleFormat {
    fn format_tag(self) -> u16 {
        match self {
            SampleFormat::Pcm16 => WAVE_FORMAT_PCM,
            SampleFormat::Float32 | SampleFormat::Float64 => WAVE_FORMAT_IEEE_FLOAT,
        }
    }

    fn bits(self) -> u16 {
        match self {
            SampleFormat::Pcm16 => 16,
            SampleFormat::Float32 => 32,
            SampleFormat::Float64 => 64,
        }
    }

    fn bytes(self) -> usize {
        usize::from(self.bits() / 8)
    }
}

/// Encodings offered by [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Pcm16,
    Float64,
}

impl Encoding {
    fn format(self) -> SampleFormat {
        match self {
            Encoding::Pcm16 => SampleFormat::Pcm16,
            Encoding::Float64 => SampleFormat::Float64,
        }
    }
}

impl std::str::FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pcm16" => Ok(Encoding::Pcm16),
            "float64" => Ok(Encoding::Float64),
            other => Err(format!("unknown encoding '{other}' (pcm16 | float64)")),
        }
    }
}

/// A real-valued sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
    source: SampleFormat,
}

impl AudioClip {
    /// Builds an in-memory clip; the source format is recorded as float64.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::with_source(samples, sample_rate, SampleFormat::Float64)
    }

    pub fn with_source(samples: Vec<f64>, sample_rate: u32, source: SampleFormat) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if sample_rate == 0 {
            return Err(Error::InvalidClip("sample rate must be at least 1 Hz".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidClip(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
            source,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_format(&self) -> SampleFormat {
        self.source
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Complex time signal, stored on disk as a 2-channel float64 WAV
/// (channel 0 real, channel 1 imaginary).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexClip {
    re: Vec<f64>,
    im: Vec<f64>,
    sample_rate: u32,
}

impl ComplexClip {
    pub fn new(re: Vec<f64>, im: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::LengthMismatch {
                left: re.len(),
                right: im.len(),
            });
        }
        if re.is_empty() {
            return Err(Error::EmptyInput);
        }
        if sample_rate == 0 {
            return Err(Error::InvalidClip("sample rate must be at least 1 Hz".into()));
        }
        if re.iter().chain(&im).any(|v| !v.is_finite()) {
            return Err(Error::InvalidClip("complex clip holds a non-finite value".into()));
        }
        Ok(Self { re, im, sample_rate })
    }

    pub fn real_part(&self) -> &[f64] {
        &self.re
    }

    pub fn imag_part(&self) -> &[f64] {
        &self.im
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.re, self.im)
    }
}

/// Decoded contents of a WAV file, one vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct WavData {
    pub sample_rate: u32,
    pub format: SampleFormat,
    pub channels: Vec<Vec<f64>>,
}

impl WavData {
    pub fn channel_count(&self) -> u16 {
        self.channels.len() as u16
    }
}

fn u16_at(b: &[u8], off: usize) -> u16 {
    u16::from_le_bytes([b[off], b[off + 1]])
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes([b[off], b[off + 1], b[off + 2], b[off + 3]])
}

struct Fmt {
    format: SampleFormat,
    channels: u16,
    sample_rate: u32,
}

fn parse_fmt(body: &[u8]) -> std::result::Result<Fmt, WavError> {
    if body.len() < 16 {
        return Err(WavError::FmtTooShort(body.len()));
    }
    let mut tag = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let block_align = u16_at(body, 12);
    let bits = u16_at(body, 14);

    if tag == WAVE_FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the subformat GUID,
        // whose first two bytes are the real format tag.
        if body.len() < 26 {
            return Err(WavError::FmtTooShort(body.len()));
        }
        tag = u16_at(body, 24);
    }

    let format = match (tag, bits) {
        (WAVE_FORMAT_PCM, 16) => SampleFormat::Pcm16,
        (WAVE_FORMAT_IEEE_FLOAT, 32) => SampleFormat::Float32,
        (WAVE_FORMAT_IEEE_FLOAT, 64) => SampleFormat::Float64,
        (format, bits) => return Err(WavError::UnsupportedFormat { format, bits }),
    };
    if !(1..=2).contains(&channels) {
        return Err(WavError::UnsupportedChannels(channels));
    }
    if sample_rate == 0 {
        return Err(WavError::ZeroSampleRate);
    }
    let expected_align = channels as usize * format.bytes();
    if block_align as usize != expected_align {
        return Err(WavError::BadBlockAlign {
            found: block_align,
            channels,
            bits,
        });
    }
    Ok(Fmt {
        format,
        channels,
        sample_rate,
    })
}

/// Decodes a complete WAV byte stream.
///
/// Unknown chunks are skipped. Any inconsistency yields an error; the
/// decoder never returns a non-finite sample.
pub fn decode_wav(bytes: &[u8]) -> std::result::Result<WavData, WavError> {
    if bytes.len() < 12 {
        return Err(WavError::TooSmall(bytes.len()));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(WavError::MissingRiff);
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(WavError::MissingWave);
    }

    let mut fmt: Option<Fmt> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let available = bytes.len() - body_start;
        if size > available {
            return Err(WavError::TruncatedChunk {
                id: String::from_utf8_lossy(id).into_owned(),
                declared: size,
                available,
            });
        }
        let body = &bytes[body_start..body_start + size];
        match id {
            b"fmt " => fmt = Some(parse_fmt(body)?),
            b"data" => {
                let fmt = fmt.ok_or(WavError::MissingFmt)?;
                return decode_samples(body, &fmt);
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_start + size + (size & 1);
    }
    Err(WavError::MissingData)
}

fn decode_samples(data: &[u8], fmt: &Fmt) -> std::result::Result<WavData, WavError> {
    let width = fmt.format.bytes();
    let block = width * fmt.channels as usize;
    if !data.len().is_multiple_of(block) {
        return Err(WavError::PartialFrame {
            len: data.len(),
            block,
        });
    }
    let frames = data.len() / block;
    if frames == 0 {
        return Err(WavError::EmptyData);
    }
    let mut channels = vec![Vec::with_capacity(frames); fmt.channels as usize];
    for (frame, chunk) in data.chunks_exact(block).enumerate() {
        for (ch, raw) in chunk.chunks_exact(width).enumerate() {
            let v = match fmt.format {
                SampleFormat::Pcm16 => f64::from(i16::from_le_bytes([raw[0], raw[1]])) / PCM16_SCALE,
                SampleFormat::Float32 => {
                    f64::from(f32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]))
                }
                SampleFormat::Float64 => {
                    let mut b = [0u8; 8];
                    b.copy_from_slice(raw);
                    f64::from_le_bytes(b)
                }
            };
            if !v.is_finite() {
                return Err(WavError::NonFiniteSample(frame));
            }
            channels[ch].push(v);
        }
    }
    Ok(WavData {
        sample_rate: fmt.sample_rate,
        format: fmt.format,
        channels,
    })
}

/// Result of encoding: how many samples had to be clamped into [-1, 1].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteReport {
    pub clipped: usize,
}

/// Encodes equal-length channels into a WAV byte stream.
pub fn encode_wav(
    channels: &[&[f64]],
    sample_rate: u32,
    format: SampleFormat,
) -> Result<(Vec<u8>, WriteReport)> {
    let n_ch = channels.len();
    if !(1..=2).contains(&n_ch) {
        return Err(WavError::UnsupportedChannels(n_ch as u16).into());
    }
    let frames = channels[0].len();
    if let Some(c) = channels.iter().find(|c| c.len() != frames) {
        return Err(Error::LengthMismatch {
            left: frames,
            right: c.len(),
        });
    }
    let width = format.bytes();
    let block = width * n_ch;
    let data_len = frames * block;
    let is_float = format.format_tag() == WAVE_FORMAT_IEEE_FLOAT;
    // Non-PCM formats carry cbSize and a fact chunk.
    let fmt_len: usize = if is_float { 18 } else { 16 };
    let fact_len: usize = if is_float { 12 } else { 0 };
    let riff_len = 4 + (8 + fmt_len) + fact_len + 8 + data_len;
    if riff_len > u32::MAX as usize {
        return Err(Error::InvalidParams("clip too long for a RIFF container".into()));
    }

    let mut out = Vec::with_capacity(riff_len + 8);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(riff_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&(fmt_len as u32).to_le_bytes());
    out.extend_from_slice(&format.format_tag().to_le_bytes());
    out.extend_from_slice(&(n_ch as u16).to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * block as u32).to_le_bytes());
    out.extend_from_slice(&(block as u16).to_le_bytes());
    out.extend_from_slice(&format.bits().to_le_bytes());
    if is_float {
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(b"fact");
        out.extend_from_slice(&4u32.to_le_bytes());
        out.extend_from_slice(&(frames as u32).to_le_bytes());
    }
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());

    let mut report = WriteReport::default();
    for i in 0..frames {
        for ch in channels {
            let v = ch[i];
            match format {
                SampleFormat::Pcm16 => {
                    if !(-1.0..=1.0).contains(&v) {
                        report.clipped += 1;
                    }
                    let q = (v.clamp(-1.0, 1.0) * PCM16_SCALE).round().clamp(-32768.0, 32767.0);
                    out.extend_from_slice(&(q as i16).to_le_bytes());
                }
                SampleFormat::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                SampleFormat::Float64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
    }
    Ok((out, report))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads every channel of a WAV file.
pub fn read_wav_data(path: impl AsRef<Path>) -> Result<WavData> {
    let bytes = read_bytes(path.as_ref())?;
    Ok(decode_wav(&bytes)?)
}

/// Reads a mono WAV file. Stereo files are rejected; use
/// [`read_wav_channel`] to pick one channel.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let data = read_wav_data(path)?;
    if data.channels.len() != 1 {
        return Err(WavError::ChannelSelectRequired {
            channels: data.channel_count(),
        }
        .into());
    }
    clip_from(data, 0)
}

pub fn read_wav_channel(path: impl AsRef<Path>, channel: u16) -> Result<AudioClip> {
    let data = read_wav_data(path)?;
    if channel >= data.channel_count() {
        return Err(WavError::ChannelOutOfRange {
            requested: channel,
            channels: data.channel_count(),
        }
        .into());
    }
    clip_from(data, channel as usize)
}

fn clip_from(mut data: WavData, channel: usize) -> Result<AudioClip> {
    let samples = data.channels.swap_remove(channel);
    AudioClip::with_source(samples, data.sample_rate, data.format)
}

pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>, encoding: Encoding) -> Result<WriteReport> {
    let (bytes, report) = encode_wav(&[clip.samples()], clip.sample_rate(), encoding.format())?;
    write_bytes(path.as_ref(), &bytes)?;
    Ok(report)
}

pub fn write_complex(clip: &ComplexClip, path: impl AsRef<Path>) -> Result<()> {
    let (bytes, _) = encode_wav(
        &[clip.real_part(), clip.imag_part()],
        clip.sample_rate(),
        SampleFormat::Float64,
    )?;
    write_bytes(path.as_ref(), &bytes)
}

pub fn read_complex(path: impl AsRef<Path>) -> Result<ComplexClip> {
    let mut data = read_wav_data(path)?;
    if data.channels.len() != 2 {
        return Err(WavError::NotComplex(data.channel_count()).into());
    }
    let im = data.channels.pop().unwrap_or_default();
    let re = data.channels.pop().unwrap_or_default();
    ComplexClip::new(re, im, data.sample_rate)
}

/// Extraction parameters persisted next to a watermarked file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarMeta {
    pub k: usize,
    pub mode: Mode,
    pub payload_sample_rate: u32,
    pub eps: f64,
    pub format_version: u32,
    /// Host-vs-watermarked SNR recorded at embed time, shown by `inspect`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed_snr_db: Option<f64>,
}

impl SidecarMeta {
    pub fn new(k: usize, mode: Mode, payload_sample_rate: u32, eps: f64) -> Result<Self> {
        let meta = Self {
            k,
            mode,
            payload_sample_rate,
            eps,
            format_version: SIDECAR_FORMAT_VERSION,
            embed_snr_db: None,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != SIDECAR_FORMAT_VERSION {
            return Err(Error::SidecarVersion {
                found: self.format_version,
                expected: SIDECAR_FORMAT_VERSION,
            });
        }
        if self.k == 0 {
            return Err(Error::InvalidMeta("k must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidMeta(format!("eps must be positive, got {}", self.eps)));
        }
        if self.payload_sample_rate == 0 {
            return Err(Error::InvalidMeta("payload_sample_rate must be positive".into()));
        }
        Ok(())
    }
}

/// `<audio path>.wmmeta.json`
pub fn sidecar_path(audio: impl AsRef<Path>) -> PathBuf {
    let mut s = audio.as_ref().as_os_str().to_owned();
    s.push(SIDECAR_SUFFIX);
    PathBuf::from(s)
}

pub fn write_meta(meta: &SidecarMeta, path: impl AsRef<Path>) -> Result<()> {
    meta.validate()?;
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(meta).map_err(|source| Error::CorruptSidecar {
        path: path.to_owned(),
        source,
    })?;
    write_bytes(path, text.as_bytes())
}

pub fn read_meta(path: impl AsRef<Path>) -> Result<SidecarMeta> {
    let path = path.as_ref();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingSidecar {
                path: path.to_owned(),
            })
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    let meta: SidecarMeta = serde_json::from_str(&text).map_err(|source| Error::CorruptSidecar {
        path: path.to_owned(),
        source,
    })?;
    meta.validate()?;
    Ok(meta)
}
