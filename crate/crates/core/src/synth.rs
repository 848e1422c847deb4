//! Deterministic synthetic signals used by the examples and test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

use crate::error::Result;
use crate::wav_io::AudioClip;
use crate::watermark::WatermarkPayload;

/// Instrument-like host: a few decaying harmonic notes over a faint noise
/// bed, peak well below full scale.
pub fn instrumental_host(n: usize, sample_rate: u32, seed: u64) -> Result<AudioClip> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = f64::from(sample_rate);
    let notes = [220.0, 277.18, 329.63, 440.0];
    let note_len = (n / notes.len()).max(1);
    let samples = (0..n)
        .map(|i| {
            let note = notes[(i / note_len).min(notes.len() - 1)];
            let t_note = (i % note_len) as f64 / fs;
            let t = i as f64 / fs;
            let env = (-3.0 * t_note).exp();
            let tone: f64 = (1..=5)
                .map(|h| (2.0 * PI * note * h as f64 * t).sin() / h as f64)
                .sum();
            let bed: f64 = StandardNormal.sample(&mut rng);
            0.2 * env * tone + 0.003 * bed
        })
        .collect();
    AudioClip::new(samples, sample_rate)
}

/// Speech-like payload: a voiced harmonic source under a syllabic envelope,
/// amplitude within [-1, 1].
pub fn speech_like_payload(k: usize, sample_rate: u32, seed: u64) -> Result<WatermarkPayload> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = f64::from(sample_rate);
    let pitch = rng.gen_range(100.0..180.0);
    let syllable = rng.gen_range(3.0..5.0);
    let samples = (0..k)
        .map(|i| {
            let t = i as f64 / fs;
            let env = (PI * syllable * t).sin().abs();
            let voiced: f64 = [(1.0, 1.0), (2.0, 0.6), (3.0, 0.4), (5.0, 0.25), (8.0, 0.1)]
                .iter()
                .map(|&(h, a)| a * (2.0 * PI * pitch * h * t).sin())
                .sum();
            let breath: f64 = StandardNormal.sample(&mut rng);
            (0.3 * env * voiced + 0.01 * breath).clamp(-1.0, 1.0)
        })
        .collect();
    WatermarkPayload::new(samples, sample_rate)
}

/// Tone-in-noise fixture for the denoiser: returns `(clean, noisy)`. The
/// first `lead_silence` samples of the clean signal are zero and the noise
/// power is set from the tone power and `snr_db`.
pub fn tone_in_noise(
    n: usize,
    sample_rate: u32,
    freq: f64,
    amplitude: f64,
    snr_db: f64,
    lead_silence: usize,
    seed: u64,
) -> Result<(AudioClip, AudioClip)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = f64::from(sample_rate);
    let clean: Vec<f64> = (0..n)
        .map(|i| {
            if i < lead_silence {
                0.0
            } else {
                amplitude * (2.0 * PI * freq * i as f64 / fs).sin()
            }
        })
        .collect();
    let noise_std = (amplitude * amplitude / 2.0 / 10f64.powf(snr_db / 10.0)).sqrt();
    let noisy = clean
        .iter()
        .map(|&c| {
            let z: f64 = StandardNormal.sample(&mut rng);
            c + noise_std * z
        })
        .collect();
    Ok((AudioClip::new(clean, sample_rate)?, AudioClip::new(noisy, sample_rate)?))
}
