//! Clean a noisy payload with the spectral Wiener filter before embedding.
//!
//! ```bash
//! cargo run -p logmark --example wiener_denoise
//! ```

use logmark::denoise::snr_of;
use logmark::{synth, wiener_denoise, AudioClip, WienerParams};

fn main() -> logmark::Result<()> {
    let p = WienerParams::default();
    // leading noise-only region covering the frames used for the noise estimate
    let lead = (p.noise_frames - 1) * p.hop + p.frame_len;
    println!("frame {} / hop {} / {} noise frames / floor {}", p.frame_len, p.hop, p.noise_frames, p.gain_floor);
    for input_snr in [0.0, 5.0, 10.0, 20.0] {
        let (clean, noisy) = synth::tone_in_noise(16_000, 8000, 1000.0, 0.5, input_snr, lead, 1)?;
        let out = wiener_denoise(&noisy, &p)?;
        let tail = |c: &AudioClip| AudioClip::new(c.samples()[lead..].to_vec(), c.sample_rate());
        let before = snr_of(&tail(&clean)?, &tail(&noisy)?)?;
        let after = snr_of(&tail(&clean)?, &tail(&out)?)?;
        println!("input {input_snr:>4.1} dB target: measured {before:6.2} dB -> {after:6.2} dB");
    }
    Ok(())
}
