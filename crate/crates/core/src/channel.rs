//! Deterministic attack simulation.
//!
//! Attacks compose in a fixed order: gain, then requantization, then
//! additive white Gaussian noise. AWGN is scaled from the realized noise
//! vector, so the measured SNR hits the target at any length.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wav_io::{AudioClip, ComplexClip};
use crate::watermark::Carrier;

pub const MIN_REQUANTIZE_BITS: u32 = 4;
pub const MAX_REQUANTIZE_BITS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelSpec {
    /// Target SNR; `None` or `+inf` means no noise.
    pub awgn_snr_db: Option<f64>,
    pub gain: Option<f64>,
    pub requantize_bits: Option<u32>,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn identity(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn awgn(snr_db: f64, seed: u64) -> Self {
        Self {
            awgn_snr_db: Some(snr_db),
            seed,
            ..Self::default()
        }
    }

    pub fn is_identity(&self) -> bool {
        self.gain.is_none()
            && self.requantize_bits.is_none()
            && self.awgn_snr_db.is_none_or(|s| s == f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.awgn_snr_db {
            if !(s.is_finite() || s == f64::INFINITY) {
                return Err(Error::InvalidParams(format!("awgn snr must be finite or +inf, got {s}")));
            }
        }
        if let Some(g) = self.gain {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParams(format!("gain must be positive, got {g}")));
            }
        }
        if let Some(b) = self.requantize_bits {
            if !(MIN_REQUANTIZE_BITS..=MAX_REQUANTIZE_BITS).contains(&b) {
                return Err(Error::InvalidParams(format!(
                    "requantize bits must lie in [{MIN_REQUANTIZE_BITS}, {MAX_REQUANTIZE_BITS}], got {b}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-seed for stream `index` of `seed` (channels, trials).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn apply_awgn(x: &[f64], snr_db: f64, seed: u64) -> Result<Vec<f64>> {
    if snr_db == f64::INFINITY {
        return Ok(x.to_vec());
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidParams(format!("awgn snr must be finite or +inf, got {snr_db}")));
    }
    let signal: f64 = x.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let raw: f64 = noise.iter().map(|v| v * v).sum();
    if raw == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    let target = signal / 10f64.powf(snr_db / 10.0);
    let scale = (target / raw).sqrt();
    Ok(x.iter().zip(&noise).map(|(s, n)| s + scale * n).collect())
}

pub fn apply_gain(x: &[f64], g: f64) -> Vec<f64> {
    x.iter().map(|v| g * v).collect()
}

pub fn apply_requantize(x: &[f64], bits: u32) -> Result<Vec<f64>> {
    if !(MIN_REQUANTIZE_BITS..=MAX_REQUANTIZE_BITS).contains(&bits) {
        return Err(Error::InvalidParams(format!("requantize bits {bits} out of range")));
    }
    let levels = f64::from(1u32 << (bits - 1));
    Ok(x.iter().map(|v| (v.clamp(-1.0, 1.0) * levels).round() / levels).collect())
}

fn attack_samples(x: &[f64], spec: &ChannelSpec, channel: u64) -> Result<Vec<f64>> {
    let mut y = match spec.gain {
        Some(g) => apply_gain(x, g),
        None => x.to_vec(),
    };
    if let Some(bits) = spec.requantize_bits {
        y = apply_requantize(&y, bits)?;
    }
    if let Some(snr) = spec.awgn_snr_db {
        y = apply_awgn(&y, snr, derive_seed(spec.seed, channel))?;
    }
    Ok(y)
}

pub fn apply_channel(clip: &Carrier, spec: &ChannelSpec) -> Result<Carrier> {
    spec.validate()?;
    if spec.is_identity() {
        return Ok(clip.clone());
    }
    Ok(match clip {
        Carrier::Real(c) => {
            Carrier::Real(AudioClip::new(attack_samples(c.samples(), spec, 0)?, c.sample_rate())?)
        }
        Carrier::Complex(c) => Carrier::Complex(ComplexClip::new(
            attack_samples(c.real_part(), spec, 0)?,
            attack_samples(c.imag_part(), spec, 1)?,
            c.sample_rate(),
        )?),
    })
}
