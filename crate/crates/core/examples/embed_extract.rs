//! Hide a speech-like payload in an instrument-like host with both carrier
//! modes and recover it.
//!
//! ```bash
//! cargo run -p logmark --example embed_extract
//! ```

use logmark::metrics::{correlation, snr_db};
use logmark::{embed, extract, synth, EmbedConfig, Mode};

fn main() -> logmark::Result<()> {
    let host = synth::instrumental_host(1 << 16, 22050, 7)?;
    let payload = synth::speech_like_payload(8000, 8000, 3)?;
    println!("host: {} samples @ {} Hz", host.len(), host.sample_rate());
    println!("payload: K = {} samples @ {} Hz", payload.len(), payload.sample_rate());

    for mode in [Mode::Verbatim, Mode::Symmetric] {
        let res = embed(&host, &payload, &EmbedConfig::new(mode))?;
        let rec = extract(&res.watermarked, &res.meta, true)?;
        let err = rec
            .payload
            .samples()
            .iter()
            .zip(payload.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "{mode:>9}: {} bins modified, complex carrier: {}, embed SNR {:.2} dB, max err {err:.2e}, corr {:.12}",
            res.modified_bins.len(),
            res.watermarked.is_complex(),
            snr_db(host.samples(), res.watermarked.real_samples())?,
            correlation(rec.payload.samples(), payload.samples())?,
        );
    }
    Ok(())
}
