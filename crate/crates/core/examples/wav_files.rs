//! File workflow: write host and payload WAVs, embed, persist the carrier
//! and sidecar, attack the file, then extract blindly from disk.
//!
//! ```bash
//! cargo run -p logmark --example wav_files
//! ```

use logmark::wav_io::{
    read_complex, read_meta, read_wav, sidecar_path, write_complex, write_meta, write_wav,
};
use logmark::{apply_channel, embed, extract, synth, Carrier, ChannelSpec, EmbedConfig, Encoding, Mode};

fn main() -> logmark::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let host_path = dir.path().join("host.wav");
    let payload_path = dir.path().join("five.wav");
    write_wav(&synth::instrumental_host(1 << 15, 22050, 1)?, &host_path, Encoding::Pcm16)?;
    write_wav(&synth::speech_like_payload(4000, 8000, 2)?.to_clip()?, &payload_path, Encoding::Pcm16)?;

    let host = read_wav(&host_path)?;
    let payload = logmark::WatermarkPayload::from_clip(&read_wav(&payload_path)?)?;

    for mode in [Mode::Symmetric, Mode::Verbatim] {
        let out = dir.path().join(format!("wm_{mode}.wav"));
        let res = embed(&host, &payload, &EmbedConfig::new(mode))?;
        match &res.watermarked {
            Carrier::Real(c) => {
                write_wav(c, &out, Encoding::Float64)?;
            }
            Carrier::Complex(c) => write_complex(c, &out)?,
        }
        write_meta(&res.meta, sidecar_path(&out))?;

        // receiver side: only the carrier file and its sidecar
        let meta = read_meta(sidecar_path(&out))?;
        let carrier = match meta.mode {
            Mode::Symmetric => Carrier::Real(read_wav(&out)?),
            Mode::Verbatim => Carrier::Complex(read_complex(&out)?),
        };
        for spec in [ChannelSpec::identity(0), ChannelSpec::awgn(50.0, 9)] {
            let attacked = apply_channel(&carrier, &spec)?;
            let rec = extract(&attacked, &meta, false)?;
            let err = rec
                .payload
                .samples()
                .iter()
                .zip(payload.samples())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            println!(
                "{mode:>9} {:>14}: max err {err:.3e}, clamped {}",
                spec.awgn_snr_db.map_or("no attack".to_string(), |s| format!("AWGN {s} dB")),
                rec.report.clamped_count
            );
        }
    }
    Ok(())
}
