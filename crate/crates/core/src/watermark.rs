//! Embedding and blind extraction.
//!
//! The payload `w` is mapped through `exp` and written, in order, over the
//! top `K` DFT bins of the host: bin `N - K + i` receives `exp(w[i])`.
//! Extraction transforms the carrier again, reads the real part of the same
//! bins and takes `ln`.
//!
//! Two carrier modes exist:
//!
//! * [`Mode::Verbatim`] replaces only the tail bins. The inverse transform is
//!   complex and is kept as a [`ComplexClip`].
//! * [`Mode::Symmetric`] also writes each value into the mirror bin `N - b`,
//!   so the spectrum stays Hermitian and the carrier is an ordinary real
//!   signal. DC and Nyquist are never touched.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::denoise::{wiener_denoise, WienerParams};
use crate::error::{Error, Result};
use crate::spectrum::{forward_dft, forward_dft_complex, inverse_dft, real_part, Spectrum};
use crate::wav_io::{AudioClip, ComplexClip, SidecarMeta};

/// Largest payload magnitude accepted by [`transform_payload`].
pub const PAYLOAD_GUARD: f64 = 16.0;

pub const DEFAULT_EPS: f64 = 1e-12;

/// Symmetric-mode carriers may carry at most this much imaginary residue,
/// relative to `max(1, peak)`.
pub const REALNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Verbatim,
    Symmetric,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Verbatim => "verbatim",
            Mode::Symmetric => "symmetric",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "verbatim" => Ok(Mode::Verbatim),
            "symmetric" => Ok(Mode::Symmetric),
            other => Err(format!("unknown mode '{other}' (verbatim | symmetric)")),
        }
    }
}

/// The secret signal to hide.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkPayload {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl WatermarkPayload {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if sample_rate == 0 {
            return Err(Error::InvalidClip("payload sample rate must be positive".into()));
        }
        check_guard(&samples)?;
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Extractor output. Clamped readouts map to `ln(eps)`, which may lie
    /// outside the embedding guard, so only finiteness is required.
    fn recovered(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidClip(format!("recovered sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn from_clip(clip: &AudioClip) -> Result<Self> {
        Self::new(clip.samples().to_vec(), clip.sample_rate())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Payload length `K`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_clip(&self) -> Result<AudioClip> {
        AudioClip::new(self.samples.clone(), self.sample_rate)
    }
}

fn check_guard(samples: &[f64]) -> Result<()> {
    for (index, &value) in samples.iter().enumerate() {
        if !value.is_finite() || value.abs() > PAYLOAD_GUARD {
            return Err(Error::PayloadOverflow { index, value });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedConfig {
    pub mode: Mode,
    pub eps: f64,
    /// Wiener-filter the payload before the exponential map.
    pub denoise: Option<WienerParams>,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Symmetric,
            eps: DEFAULT_EPS,
            denoise: None,
        }
    }
}

impl EmbedConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParams(format!("eps must be positive, got {}", self.eps)));
        }
        if let Some(p) = &self.denoise {
            p.validate()?;
        }
        Ok(())
    }
}

/// A watermarked signal in either carrier form.
#[derive(Debug, Clone, PartialEq)]
pub enum Carrier {
    Real(AudioClip),
    Complex(ComplexClip),
}

impl Carrier {
    pub fn len(&self) -> usize {
        match self {
            Carrier::Real(c) => c.len(),
            Carrier::Complex(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        match self {
            Carrier::Real(c) => c.sample_rate(),
            Carrier::Complex(c) => c.sample_rate(),
        }
    }

    /// The real-valued (audible) part of the carrier.
    pub fn real_samples(&self) -> &[f64] {
        match self {
            Carrier::Real(c) => c.samples(),
            Carrier::Complex(c) => c.real_part(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Carrier::Complex(_))
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        match self {
            Carrier::Real(c) => forward_dft(c.samples(), c.sample_rate()),
            Carrier::Complex(c) => {
                let buf = c
                    .real_part()
                    .iter()
                    .zip(c.imag_part())
                    .map(|(&re, &im)| Complex64::new(re, im))
                    .collect();
                forward_dft_complex(buf, c.sample_rate())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedResult {
    pub watermarked: Carrier,
    pub meta: SidecarMeta,
    /// Every bin that was overwritten, ascending.
    pub modified_bins: Vec<usize>,
    /// Largest imaginary magnitude of the inverse transform. Discarded in
    /// symmetric mode, kept in the carrier in verbatim mode.
    pub imag_residual: f64,
}

/// `exp` of every payload sample.
pub fn transform_payload(w: &[f64]) -> Result<Vec<f64>> {
    check_guard(w)?;
    Ok(w.iter().map(|v| v.exp()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseOutcome {
    pub values: Vec<f64>,
    /// Elements below `eps` that were clamped before `ln`.
    pub clamped: usize,
}

/// `ln(max(v, eps))` per element. In strict mode any value `<= 0` is an
/// error instead.
pub fn inverse_transform(v: &[f64], eps: f64, strict: bool) -> Result<InverseOutcome> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParams(format!("eps must be positive, got {eps}")));
    }
    let mut clamped = 0;
    let mut values = Vec::with_capacity(v.len());
    for (index, &value) in v.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::InvalidClip(format!("bin value {index} is not finite")));
        }
        if strict && value <= 0.0 {
            return Err(Error::StrictExtraction { index, value });
        }
        if value < eps {
            clamped += 1;
        }
        values.push(value.max(eps).ln());
    }
    Ok(InverseOutcome { values, clamped })
}

/// Largest payload length a host of `n` samples can carry.
pub fn capacity(n: usize, mode: Mode) -> usize {
    match mode {
        Mode::Verbatim => n.saturating_sub(1),
        Mode::Symmetric => n.div_ceil(2).saturating_sub(1),
    }
}

/// Tail bins `N-K .. N` that receive the payload, lowest index first.
pub fn embed_bins(n: usize, k: usize) -> std::ops::Range<usize> {
    n - k..n
}

/// Conjugate partner of bin `b` in an `n`-point spectrum.
pub fn mirror_bin(n: usize, b: usize) -> usize {
    (n - b) % n
}

pub fn embed(host: &AudioClip, payload: &WatermarkPayload, cfg: &EmbedConfig) -> Result<EmbedResult> {
    cfg.validate()?;
    let n = host.len();
    let k = payload.len();
    let k_max = capacity(n, cfg.mode);
    if k > k_max {
        return Err(Error::Capacity { k, k_max });
    }

    let t = match &cfg.denoise {
        Some(p) => {
            let cleaned = wiener_denoise(&payload.to_clip()?, p)?;
            transform_payload(cleaned.samples())?
        }
        None => transform_payload(payload.samples())?,
    };

    let mut spectrum = forward_dft(host.samples(), host.sample_rate())?;
    let mut modified_bins = Vec::with_capacity(2 * k);
    {
        let coeffs = spectrum.coeffs_mut();
        for (b, &v) in embed_bins(n, k).zip(&t) {
            coeffs[b] = Complex64::new(v, 0.0);
            modified_bins.push(b);
            if cfg.mode == Mode::Symmetric {
                let m = mirror_bin(n, b);
                coeffs[m] = Complex64::new(v, 0.0);
                modified_bins.push(m);
            }
        }
    }
    modified_bins.sort_unstable();

    let time = inverse_dft(&spectrum);
    let imag_residual = time.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let watermarked = match cfg.mode {
        Mode::Verbatim => {
            let im = time.iter().map(|c| c.im).collect();
            Carrier::Complex(ComplexClip::new(real_part(&time), im, host.sample_rate())?)
        }
        Mode::Symmetric => {
            let re = real_part(&time);
            let peak = re.iter().map(|v| v.abs()).fold(0.0, f64::max);
            if imag_residual > REALNESS_TOL * peak.max(1.0) {
                return Err(Error::Realness {
                    residual: imag_residual,
                });
            }
            Carrier::Real(AudioClip::new(re, host.sample_rate())?)
        }
    };

    let meta = SidecarMeta::new(k, cfg.mode, payload.sample_rate(), cfg.eps)?;
    Ok(EmbedResult {
        watermarked,
        meta,
        modified_bins,
        imag_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionReport {
    pub clamped_count: usize,
    /// Largest `|imag(Y[b])|` over the read bins.
    pub max_imag: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub payload: WatermarkPayload,
    pub report: ExtractionReport,
}

pub fn extract(wm: &Carrier, meta: &SidecarMeta, strict: bool) -> Result<Extraction> {
    meta.validate()?;
    let n = wm.len();
    let k_max = capacity(n, meta.mode);
    if meta.k > k_max {
        return Err(Error::Capacity { k: meta.k, k_max });
    }
    let spectrum = wm.spectrum()?;
    let bins = &spectrum.coeffs()[embed_bins(n, meta.k)];
    let readout: Vec<f64> = bins.iter().map(|c| c.re).collect();
    let max_imag = bins.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let InverseOutcome { values, clamped } = inverse_transform(&readout, meta.eps, strict)?;
    Ok(Extraction {
        payload: WatermarkPayload::recovered(values, meta.payload_sample_rate)?,
        report: ExtractionReport {
            clamped_count: clamped,
            max_imag,
        },
    })
}
