use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use logmark::synth;
use logmark::wav_io::{encode_wav, read_complex, read_meta, read_wav, sidecar_path, write_wav, SampleFormat};
use logmark::{Encoding, Mode};
use serde_json::Value;

struct Fixture {
    dir: tempfile::TempDir,
    host: PathBuf,
    payload: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let host = dir.path().join("host.wav");
        let payload = dir.path().join("five.wav");
        write_wav(&synth::instrumental_host(8192, 22050, 1).unwrap(), &host, Encoding::Pcm16).unwrap();
        let p = synth::speech_like_payload(1000, 8000, 2).unwrap().to_clip().unwrap();
        write_wav(&p, &payload, Encoding::Float64).unwrap();
        Self { dir, host, payload }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn embed(&self, out: &Path, mode: &str) -> Output {
        run(&["embed", "--host", s(&self.host), "--payload", s(&self.payload), "--mode", mode, "--out", s(out)])
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logmark"))
        .env("WM_LOG", "warn")
        .args(args)
        .output()
        .unwrap()
}

fn max_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn embed_writes_carrier_and_sidecar() {
    let fx = Fixture::new();
    let wm = fx.path("wm.wav");
    assert_eq!(fx.embed(&wm, "symmetric").status.code(), Some(0));
    let meta = read_meta(sidecar_path(&wm)).unwrap();
    assert_eq!(meta.k, 1000);
    assert_eq!(meta.mode, Mode::Symmetric);
    assert_eq!(meta.payload_sample_rate, 8000);
    assert_eq!(meta.format_version, 1);
    assert!(meta.embed_snr_db.unwrap().is_finite());
    assert_eq!(read_wav(&wm).unwrap().len(), 8192);

    let vm = fx.path("vm.wav");
    assert_eq!(fx.embed(&vm, "verbatim").status.code(), Some(0));
    assert_eq!(read_complex(&vm).unwrap().len(), 8192);
}

#[test]
fn pcm16_output_extracts_approximately() {
    let fx = Fixture::new();
    let wm = fx.path("wm16.wav");
    let out = run(&[
        "embed", "--host", s(&fx.host), "--payload", s(&fx.payload), "--out", s(&wm), "--encoding", "pcm16",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rec = fx.path("rec.wav");
    assert_eq!(run(&["extract", "--in", s(&wm), "--out", s(&rec)]).status.code(), Some(0));
    let want = read_wav(&fx.payload).unwrap();
    let err = max_err(read_wav(&rec).unwrap().samples(), want.samples());
    assert!(err < 0.05, "pcm16 quantization error {err}");
}

#[test]
fn extract_without_sidecar_using_flags() {
    let fx = Fixture::new();
    let wm = fx.path("wm.wav");
    fx.embed(&wm, "verbatim");
    std::fs::remove_file(sidecar_path(&wm)).unwrap();
    let rec = fx.path("rec.wav");
    // mode inferred from the 2-channel carrier
    let out = run(&["extract", "--in", s(&wm), "--out", s(&rec), "--k", "1000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let got = read_wav(&rec).unwrap();
    assert_eq!(got.sample_rate(), 22050);
    assert!(max_err(got.samples(), read_wav(&fx.payload).unwrap().samples()) < 1e-9);
}

#[test]
fn override_flags_warn() {
    let fx = Fixture::new();
    let wm = fx.path("wm.wav");
    fx.embed(&wm, "symmetric");
    let rec = fx.path("rec.wav");
    let out = run(&["extract", "--in", s(&wm), "--out", s(&rec), "--k", "500"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("override"));
    assert_eq!(read_wav(&rec).unwrap().len(), 500);
}

#[test]
fn corrupt_sidecar_is_format_error() {
    let fx = Fixture::new();
    let wm = fx.path("wm.wav");
    fx.embed(&wm, "symmetric");
    std::fs::write(sidecar_path(&wm), "{").unwrap();
    let rec = fx.path("rec.wav");
    assert_eq!(run(&["extract", "--in", s(&wm), "--out", s(&rec)]).status.code(), Some(4));
    assert!(!rec.exists());
}

#[test]
fn stereo_host_needs_channel_flag() {
    let fx = Fixture::new();
    let stereo = fx.path("stereo.wav");
    let l = synth::instrumental_host(4096, 22050, 5).unwrap();
    let (bytes, _) = encode_wav(&[l.samples(), l.samples()], 22050, SampleFormat::Float32).unwrap();
    std::fs::write(&stereo, bytes).unwrap();
    let wm = fx.path("wm.wav");
    let base = ["embed", "--host", s(&stereo), "--payload", s(&fx.payload), "--out", s(&wm)];
    assert_eq!(run(&base).status.code(), Some(4));
    assert!(!wm.exists());
    let mut with_flag = base.to_vec();
    with_flag.extend(["--host-channel", "1"]);
    assert_eq!(run(&with_flag).status.code(), Some(0));
}

#[test]
fn invalid_flags_are_usage_errors_before_io() {
    let fx = Fixture::new();
    let out = fx.path("o.wav");
    let missing = fx.path("nope.wav");
    for args in [
        vec!["embed", "--host", s(&missing), "--payload", s(&missing), "--out", s(&out), "--eps", "-1"],
        vec!["embed", "--host", s(&missing), "--payload", s(&missing), "--out", s(&out), "--mode", "loud"],
        vec!["attack", "--in", s(&missing), "--out", s(&out), "--requantize-bits", "20", "--seed", "1"],
        vec!["attack", "--in", s(&missing), "--out", s(&out), "--gain", "-2", "--seed", "1"],
        vec!["extract", "--in", s(&missing), "--out", s(&out), "--k", "0"],
        vec!["evaluate", "--host", s(&missing), "--payload", s(&missing), "--snr-list", "10", "--seeds", "0", "--json", s(&out)],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists());
    }
}

#[test]
fn attack_copies_sidecar_and_is_deterministic() {
    let fx = Fixture::new();
    let wm = fx.path("wm.wav");
    fx.embed(&wm, "verbatim");
    let a = fx.path("a.wav");
    let b = fx.path("b.wav");
    for p in [&a, &b] {
        let o = run(&["attack", "--in", s(&wm), "--out", s(p), "--awgn-snr-db", "30", "--gain", "0.9", "--seed", "11"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read_meta(sidecar_path(&a)).unwrap(), read_meta(sidecar_path(&wm)).unwrap());
    let rec = fx.path("rec.wav");
    assert_eq!(run(&["extract", "--in", s(&a), "--out", s(&rec)]).status.code(), Some(0));
}

#[test]
fn evaluate_emits_report_schema() {
    let fx = Fixture::new();
    let json = fx.path("report.json");
    let o = run(&[
        "evaluate", "--host", s(&fx.host), "--payload", s(&fx.payload), "--mode", "symmetric",
        "--snr-list", "inf,40,-5", "--seeds", "3", "--json", s(&json),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let trials = v.as_array().unwrap();
    assert_eq!(trials.len(), 9);
    for t in trials {
        for key in [
            "embed_snr_db", "payload_max_abs_err", "payload_corr", "clamped_count", "modified_bin_count",
            "mode", "k", "awgn_snr_db", "gain", "requantize_bits", "seed",
        ] {
            assert!(t.get(key).is_some(), "{key} missing");
        }
        assert_eq!(t["k"], 1000);
        assert_eq!(t["modified_bin_count"], 2000);
    }
    // +inf is not representable in JSON and serializes as null
    assert!(trials[0]["awgn_snr_db"].is_null());
    assert!(trials[0]["payload_max_abs_err"].as_f64().unwrap() < 1e-9);
    assert_eq!(trials[3]["awgn_snr_db"], 40.0);
}

#[test]
fn inspect_reports_and_does_not_mutate() {
    let fx = Fixture::new();
    let wm = fx.path("wm.wav");
    fx.embed(&wm, "symmetric");
    let before = std::fs::read(&wm).unwrap();
    let side_before = std::fs::read(sidecar_path(&wm)).unwrap();
    let o = run(&["inspect", "--in", s(&wm)]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for needle in ["N: 8192", "K: 1000", "mode: symmetric", "embed_bins: 7192..=8191", "mirror_bins: 1..=1000", "embed_snr_db: "] {
        assert!(text.contains(needle), "{needle} not in\n{text}");
    }
    assert_eq!(std::fs::read(&wm).unwrap(), before);
    assert_eq!(std::fs::read(sidecar_path(&wm)).unwrap(), side_before);

    let with_host = run(&["inspect", "--in", s(&wm), "--host", s(&fx.host)]);
    assert_eq!(with_host.status.code(), Some(0));
}
