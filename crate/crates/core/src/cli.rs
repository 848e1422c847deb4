//! `logmark` command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 capacity, 4 file or format, 5 strict
//! extraction failure, 1 anything else. Outputs are only written once every
//! computation has succeeded, and a partially written set is removed.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::channel::{apply_channel, ChannelSpec, MAX_REQUANTIZE_BITS, MIN_REQUANTIZE_BITS};
use crate::denoise::WienerParams;
use crate::error::Error;
use crate::metrics::{evaluate_pipeline, snr_db};
use crate::wav_io::{
    read_complex, read_meta, read_wav, read_wav_channel, read_wav_data, sidecar_path, write_complex,
    write_meta, write_wav, AudioClip, Encoding, SidecarMeta,
};
use crate::watermark::{
    capacity, embed, embed_bins, extract, mirror_bin, Carrier, EmbedConfig, Mode, WatermarkPayload,
    DEFAULT_EPS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;
pub const EXIT_STRICT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "logmark", version, about = "Blind DFT-domain audio watermarking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hide a payload clip inside a host clip
    Embed(EmbedArgs),
    /// Recover the payload from a watermarked file
    Extract(ExtractArgs),
    /// Run a watermarked file through the attack channel
    Attack(AttackArgs),
    /// Embed, attack and extract over an SNR sweep, writing a JSON report
    Evaluate(EvaluateArgs),
    /// Describe a watermarked file without modifying it
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct WienerArgs {
    /// Wiener-filter the payload before embedding
    #[arg(long)]
    pub denoise: bool,
    #[arg(long, default_value_t = 256)]
    pub wiener_frame: usize,
    #[arg(long, default_value_t = 128)]
    pub wiener_hop: usize,
    #[arg(long, default_value_t = 5)]
    pub wiener_noise_frames: usize,
    #[arg(long, default_value_t = 0.1)]
    pub wiener_floor: f64,
}

impl WienerArgs {
    fn params(&self) -> Option<WienerParams> {
        self.denoise.then_some(WienerParams {
            frame_len: self.wiener_frame,
            hop: self.wiener_hop,
            noise_frames: self.wiener_noise_frames,
            gain_floor: self.wiener_floor,
        })
    }
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub host: PathBuf,
    #[arg(long)]
    pub payload: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "symmetric")]
    pub mode: Mode,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Sample encoding of a symmetric-mode output (verbatim is always float64)
    #[arg(long, default_value = "float64")]
    pub encoding: Encoding,
    /// Channel to use when the host is stereo
    #[arg(long)]
    pub host_channel: Option<u16>,
    /// Channel to use when the payload is stereo
    #[arg(long)]
    pub payload_channel: Option<u16>,
    #[command(flatten)]
    pub wiener: WienerArgs,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Payload length; overrides the sidecar
    #[arg(long)]
    pub k: Option<usize>,
    /// Carrier mode; overrides the sidecar
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Fail on non-positive bin readouts instead of clamping
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub awgn_snr_db: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(MIN_REQUANTIZE_BITS as i64..=MAX_REQUANTIZE_BITS as i64))]
    pub requantize_bits: Option<u32>,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub host: PathBuf,
    #[arg(long)]
    pub payload: PathBuf,
    #[arg(long, default_value = "symmetric")]
    pub mode: Mode,
    /// Comma-separated AWGN SNRs in dB; `inf` means no attack
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub snr_list: Vec<f64>,
    #[arg(long)]
    pub seeds: usize,
    #[arg(long)]
    pub json: PathBuf,
    /// Base seed for the trial seeds
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long)]
    pub host_channel: Option<u16>,
    #[arg(long)]
    pub payload_channel: Option<u16>,
    #[command(flatten)]
    pub wiener: WienerArgs,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Original host, to recompute the embed SNR
    #[arg(long)]
    pub host: Option<PathBuf>,
}

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Capacity { .. } => EXIT_CAPACITY,
            Error::StrictExtraction { .. } => EXIT_STRICT,
            Error::InvalidParams(_) | Error::TooShortForFrame { .. } => EXIT_USAGE,
            Error::Wav(_)
            | Error::Io { .. }
            | Error::MissingSidecar { .. }
            | Error::CorruptSidecar { .. }
            | Error::SidecarVersion { .. }
            | Error::InvalidMeta(_)
            | Error::InvalidClip(_)
            | Error::EmptyInput
            | Error::PayloadOverflow { .. }
            | Error::UndefinedSnr => EXIT_FORMAT,
            _ => EXIT_OTHER,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("logmark: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Embed(a) => cmd_embed(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Inspect(a) => cmd_inspect(a),
    }
}

fn check_eps(eps: f64) -> CliResult<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(CliError::usage(format!("--eps must be positive, got {eps}")))
    }
}

fn read_mono(path: &Path, channel: Option<u16>) -> CliResult<AudioClip> {
    Ok(match channel {
        Some(c) => read_wav_channel(path, c)?,
        None => read_wav(path)?,
    })
}

/// A file to be written once all work is done.
enum Output<'a> {
    Real(&'a AudioClip, Encoding),
    Complex(&'a crate::wav_io::ComplexClip),
    Meta(&'a SidecarMeta),
    Text(String),
}

/// Writes every output in order; on the first failure removes whatever was
/// already written.
fn commit(outputs: &[(PathBuf, Output<'_>)]) -> CliResult<()> {
    let mut written: Vec<&Path> = Vec::new();
    for (path, out) in outputs {
        let res = match out {
            Output::Real(clip, enc) => write_wav(clip, path, *enc).map(|r| {
                if r.clipped > 0 {
                    warn!("{} samples clipped while writing {}", r.clipped, path.display());
                }
            }),
            Output::Complex(clip) => write_complex(clip, path),
            Output::Meta(meta) => write_meta(meta, path),
            Output::Text(text) => std::fs::write(path, text).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            }),
        };
        if let Err(e) = res {
            for p in written {
                let _ = std::fs::remove_file(p);
            }
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(())
}

fn cmd_embed(a: EmbedArgs) -> CliResult<()> {
    check_eps(a.eps)?;
    let cfg = EmbedConfig {
        mode: a.mode,
        eps: a.eps,
        denoise: a.wiener.params(),
    };
    cfg.validate()?;

    let host = read_mono(&a.host, a.host_channel)?;
    let payload = WatermarkPayload::from_clip(&read_mono(&a.payload, a.payload_channel)?)?;
    let res = embed(&host, &payload, &cfg)?;
    let mut meta = res.meta.clone();
    meta.embed_snr_db = Some(snr_db(host.samples(), res.watermarked.real_samples())?);
    info!(
        "embedded K={} into N={} ({} mode, {} bins modified, direct {}-point transform, embed SNR {:.2} dB)",
        meta.k,
        host.len(),
        meta.mode,
        res.modified_bins.len(),
        host.len(),
        meta.embed_snr_db.unwrap_or_default()
    );

    let wav = match &res.watermarked {
        Carrier::Real(c) => Output::Real(c, a.encoding),
        Carrier::Complex(c) => {
            if a.encoding != Encoding::Float64 {
                warn!("verbatim carriers are always written as 2-channel float64");
            }
            Output::Complex(c)
        }
    };
    commit(&[(a.out.clone(), wav), (sidecar_path(&a.out), Output::Meta(&meta))])
}

/// Mode and K for extraction: the sidecar unless overridden by flags.
fn resolve_meta(input: &Path, k: Option<usize>, mode: Option<Mode>, eps: Option<f64>) -> CliResult<SidecarMeta> {
    let side = sidecar_path(input);
    let mut meta = match read_meta(&side) {
        Ok(m) => {
            if k.is_some() || mode.is_some() {
                warn!("--k/--mode override the values in {}", side.display());
            }
            m
        }
        Err(Error::MissingSidecar { .. }) => {
            let Some(k) = k else {
                return Err(CliError::usage(format!(
                    "sidecar {} not found; pass --k (and optionally --mode) to extract without it",
                    side.display()
                )));
            };
            let mode = match mode {
                Some(m) => m,
                None => {
                    let channels = read_wav_data(input)?.channel_count();
                    if channels == 2 {
                        Mode::Verbatim
                    } else {
                        Mode::Symmetric
                    }
                }
            };
            let rate = read_wav_data(input)?.sample_rate;
            warn!("no sidecar; assuming {mode} mode and the carrier's {rate} Hz for the payload");
            SidecarMeta::new(k, mode, rate, DEFAULT_EPS)?
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(k) = k {
        meta.k = k;
    }
    if let Some(m) = mode {
        meta.mode = m;
    }
    if let Some(e) = eps {
        meta.eps = e;
    }
    meta.validate()?;
    Ok(meta)
}

fn read_carrier(path: &Path, mode: Mode) -> CliResult<Carrier> {
    Ok(match mode {
        Mode::Verbatim => Carrier::Complex(read_complex(path)?),
        Mode::Symmetric => Carrier::Real(read_wav(path)?),
    })
}

fn cmd_extract(a: ExtractArgs) -> CliResult<()> {
    if let Some(e) = a.eps {
        check_eps(e)?;
    }
    if a.k == Some(0) {
        return Err(CliError::usage("--k must be at least 1"));
    }
    let meta = resolve_meta(&a.input, a.k, a.mode, a.eps)?;
    let carrier = read_carrier(&a.input, meta.mode)?;
    let ex = extract(&carrier, &meta, a.strict)?;
    if ex.report.clamped_count > 0 {
        warn!("{} bin readouts were clamped at eps={}", ex.report.clamped_count, meta.eps);
    }
    info!(
        "recovered K={} samples at {} Hz (max |imag| at payload bins {:e})",
        meta.k, meta.payload_sample_rate, ex.report.max_imag
    );
    let clip = ex.payload.to_clip()?;
    commit(&[(a.out, Output::Real(&clip, Encoding::Float64))])
}

fn cmd_attack(a: AttackArgs) -> CliResult<()> {
    let spec = ChannelSpec {
        awgn_snr_db: a.awgn_snr_db,
        gain: a.gain,
        requantize_bits: a.requantize_bits,
        seed: a.seed,
    };
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    if spec.is_identity() {
        info!("no attack requested; output equals input");
    }

    let side = sidecar_path(&a.input);
    let meta = match read_meta(&side) {
        Ok(m) => Some(m),
        Err(Error::MissingSidecar { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mode = match &meta {
        Some(m) => m.mode,
        None if read_wav_data(&a.input)?.channel_count() == 2 => Mode::Verbatim,
        None => Mode::Symmetric,
    };
    let attacked = apply_channel(&read_carrier(&a.input, mode)?, &spec)?;

    let wav = match &attacked {
        Carrier::Real(c) => Output::Real(c, Encoding::Float64),
        Carrier::Complex(c) => Output::Complex(c),
    };
    let mut outputs = vec![(a.out.clone(), wav)];
    if let Some(m) = &meta {
        outputs.push((sidecar_path(&a.out), Output::Meta(m)));
    }
    commit(&outputs)
}

fn cmd_evaluate(a: EvaluateArgs) -> CliResult<()> {
    check_eps(a.eps)?;
    if a.seeds == 0 {
        return Err(CliError::usage("--seeds must be at least 1"));
    }
    if let Some(bad) = a.snr_list.iter().find(|s| !(s.is_finite() || **s == f64::INFINITY)) {
        return Err(CliError::usage(format!("invalid SNR {bad} in --snr-list")));
    }
    let cfg = EmbedConfig {
        mode: a.mode,
        eps: a.eps,
        denoise: a.wiener.params(),
    };
    cfg.validate()?;

    let host = read_mono(&a.host, a.host_channel)?;
    let payload = WatermarkPayload::from_clip(&read_mono(&a.payload, a.payload_channel)?)?;
    let specs: Vec<ChannelSpec> = a
        .snr_list
        .iter()
        .map(|&snr| ChannelSpec::awgn(snr, a.seed))
        .collect();
    let reports = evaluate_pipeline(&host, &payload, &cfg, &specs, a.seeds)?;
    let json = serde_json::to_string_pretty(&reports)
        .map_err(|e| CliError { code: EXIT_OTHER, message: e.to_string() })?;
    commit(&[(a.json, Output::Text(json))])
}

fn cmd_inspect(a: InspectArgs) -> CliResult<()> {
    let side = sidecar_path(&a.input);
    let meta = read_meta(&side)?;
    let carrier = read_carrier(&a.input, meta.mode)?;
    let n = carrier.len();
    let k_max = capacity(n, meta.mode);
    let embed_snr = match &a.host {
        Some(h) => Some(snr_db(read_wav(h)?.samples(), carrier.real_samples())?),
        None => meta.embed_snr_db,
    };
    println!("file: {}", a.input.display());
    println!("N: {n}");
    println!("sample_rate: {}", carrier.sample_rate());
    println!("K: {}", meta.k);
    println!("capacity: {k_max}");
    println!("mode: {}", meta.mode);
    println!("carrier: {}", if carrier.is_complex() { "complex (2-channel float64)" } else { "real" });
    println!("transform: direct {n}-point DFT, no zero padding");
    println!("payload_sample_rate: {}", meta.payload_sample_rate);
    println!("eps: {:e}", meta.eps);
    if meta.k <= k_max {
        let bins = embed_bins(n, meta.k);
        println!("embed_bins: {}..={}", bins.start, bins.end - 1);
        if meta.mode == Mode::Symmetric {
            println!(
                "mirror_bins: {}..={}",
                mirror_bin(n, bins.end - 1),
                mirror_bin(n, bins.start)
            );
        }
    } else {
        println!("embed_bins: invalid (K exceeds capacity)");
    }
    match embed_snr {
        Some(s) => println!("embed_snr_db: {s:.3}"),
        None => println!("embed_snr_db: unknown"),
    }
    Ok(())
}
