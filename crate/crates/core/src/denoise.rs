//! Frame-based spectral Wiener filter for cleaning the payload before it is
//! embedded.
//!
//! The noise power spectrum is the mean periodogram of the leading
//! `noise_frames` frames, so the input is expected to start with noise only.
//! Each frame gets the gain `max(1 - noise/power, gain_floor)` per bin.
//! Frames are Hann windowed for analysis and synthesis and recombined with a
//! least-squares overlap-add, which reconstructs the input exactly when
//! every gain is one.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metrics;
use crate::wav_io::AudioClip;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerParams {
    pub frame_len: usize,
    pub hop: usize,
    pub noise_frames: usize,
    pub gain_floor: f64,
}

impl Default for WienerParams {
    fn default() -> Self {
        Self {
            frame_len: 256,
            hop: 128,
            noise_frames: 5,
            gain_floor: 0.1,
        }
    }
}

impl WienerParams {
    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.frame_len {
            return Err(Error::InvalidParams(format!(
                "wiener hop must satisfy 0 < hop <= frame_len (hop {}, frame {})",
                self.hop, self.frame_len
            )));
        }
        if self.noise_frames == 0 {
            return Err(Error::InvalidParams("wiener noise_frames must be at least 1".into()));
        }
        if !(self.gain_floor > 0.0 && self.gain_floor <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "wiener gain_floor must lie in (0, 1], got {}",
                self.gain_floor
            )));
        }
        Ok(())
    }
}

/// Periodic Hann window.
fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
        .collect()
}

struct Framer {
    window: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Framer {
    fn new(frame_len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            window: hann(frame_len),
            fwd: planner.plan_fft_forward(frame_len),
            inv: planner.plan_fft_inverse(frame_len),
        }
    }

    fn spectrum(&self, frame: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = frame
            .iter()
            .zip(&self.window)
            .map(|(&x, &w)| Complex64::new(x * w, 0.0))
            .collect();
        self.fwd.process(&mut buf);
        buf
    }
}

pub fn wiener_denoise(x: &AudioClip, p: &WienerParams) -> Result<AudioClip> {
    p.validate()?;
    let input = x.samples();
    let len = input.len();
    let l = p.frame_len;
    if len < l {
        return Err(Error::TooShortForFrame { len, frame_len: l });
    }
    let framer = Framer::new(l);

    // Noise estimate from leading frames of the unpadded signal.
    let available = (len - l) / p.hop + 1;
    let used = p.noise_frames.min(available);
    let mut noise = vec![0.0; l];
    for f in 0..used {
        let start = f * p.hop;
        for (acc, c) in noise.iter_mut().zip(framer.spectrum(&input[start..start + l])) {
            *acc += c.norm_sqr();
        }
    }
    for v in &mut noise {
        *v /= used as f64;
    }

    // Pad so that every input sample is covered by full overlap.
    let lead = l - p.hop;
    let frames = (lead + len).div_ceil(p.hop);
    let padded_len = (frames - 1) * p.hop + l;
    let mut padded = vec![0.0; padded_len];
    padded[lead..lead + len].copy_from_slice(input);

    let mut acc = vec![0.0; padded_len];
    let mut norm = vec![0.0; padded_len];
    let scale = 1.0 / l as f64;
    for f in 0..frames {
        let start = f * p.hop;
        let mut spec = framer.spectrum(&padded[start..start + l]);
        for (c, &n) in spec.iter_mut().zip(&noise) {
            let power = c.norm_sqr();
            let gain = if power > 0.0 {
                (1.0 - n / power).max(p.gain_floor)
            } else {
                1.0
            };
            *c *= gain;
        }
        framer.inv.process(&mut spec);
        for (i, (c, &w)) in spec.iter().zip(&framer.window).enumerate() {
            acc[start + i] += c.re * scale * w;
            norm[start + i] += w * w;
        }
    }

    let out: Vec<f64> = (lead..lead + len)
        .map(|i| if norm[i] > 1e-9 { acc[i] / norm[i] } else { 0.0 })
        .collect();
    AudioClip::new(out, x.sample_rate())
}

/// SNR of `noisy` against `clean`, in dB (see [`metrics::snr_db`]).
pub fn snr_of(clean: &AudioClip, noisy: &AudioClip) -> Result<f64> {
    metrics::snr_db(clean.samples(), noisy.samples())
}
