//! Blind audio watermarking in the DFT domain.
//!
//! A payload signal is mapped through `exp` and written over the top DFT
//! bins of a host clip; extraction re-transforms the carrier, reads those
//! bins back and applies `ln`. Around that core sit a WAV codec with a JSON
//! sidecar, an optional Wiener denoiser for the payload, an attack channel
//! and fidelity metrics.
//!
//! ```
//! use logmark::{embed, extract, synth, EmbedConfig, Mode};
//!
//! let host = synth::instrumental_host(4096, 22050, 1).unwrap();
//! let payload = synth::speech_like_payload(256, 8000, 2).unwrap();
//! let res = embed(&host, &payload, &EmbedConfig::new(Mode::Symmetric)).unwrap();
//! let rec = extract(&res.watermarked, &res.meta, true).unwrap();
//! let err = rec.payload.samples().iter().zip(payload.samples())
//!     .map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
//! assert!(err < 1e-9);
//! ```

pub mod channel;
pub mod cli;
pub mod denoise;
pub mod error;
pub mod metrics;
pub mod spectrum;
pub mod synth;
pub mod wav_io;
pub mod watermark;

pub use channel::{apply_channel, ChannelSpec};
pub use denoise::{wiener_denoise, WienerParams};
pub use error::{Error, Result};
pub use metrics::{evaluate_pipeline, MetricsReport, TrialReport};
pub use spectrum::{forward_dft, inverse_dft, Spectrum};
pub use wav_io::{AudioClip, ComplexClip, Encoding, SidecarMeta};
pub use watermark::{
    capacity, embed, extract, Carrier, EmbedConfig, EmbedResult, Extraction, Mode, WatermarkPayload,
};
