//! Fidelity metrics and the embed/attack/extract evaluation loop.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, derive_seed, ChannelSpec};
use crate::error::{Error, Result};
use crate::wav_io::AudioClip;
use crate::watermark::{embed, extract, EmbedConfig, Mode, WatermarkPayload};

/// Reported in place of +inf when test equals reference.
pub const SNR_CAP_DB: f64 = 200.0;

/// `10 log10(sum ref^2 / sum (ref - test)^2)`, capped at [`SNR_CAP_DB`].
pub fn snr_db(reference: &[f64], test: &[f64]) -> Result<f64> {
    if reference.len() != test.len() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: test.len(),
        });
    }
    let signal: f64 = reference.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    let err: f64 = reference.iter().zip(test).map(|(r, t)| (r - t) * (r - t)).sum();
    if err == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal / err).log10()).min(SNR_CAP_DB))
}

/// Pearson correlation coefficient.
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidParams("correlation needs at least two samples".into()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub embed_snr_db: f64,
    pub payload_max_abs_err: f64,
    pub payload_corr: f64,
    pub clamped_count: usize,
    pub modified_bin_count: usize,
}

/// One evaluation trial: the metrics plus the parameters that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub mode: Mode,
    pub k: usize,
    pub awgn_snr_db: Option<f64>,
    pub gain: Option<f64>,
    pub requantize_bits: Option<u32>,
    pub seed: u64,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

/// Embeds once, then runs every `(spec, seed index)` trial through the
/// channel and the extractor. Trial `s` of a spec uses
/// `derive_seed(spec.seed, s)`. Results are ordered by spec, then seed.
pub fn evaluate_pipeline(
    host: &AudioClip,
    payload: &WatermarkPayload,
    cfg: &EmbedConfig,
    specs: &[ChannelSpec],
    seeds: usize,
) -> Result<Vec<TrialReport>> {
    if specs.is_empty() || seeds == 0 {
        return Ok(Vec::new());
    }
    for spec in specs {
        spec.validate()?;
    }
    let embedded = embed(host, payload, cfg)?;
    let embed_snr_db = snr_db(host.samples(), embedded.watermarked.real_samples())?;
    let modified_bin_count = embedded.modified_bins.len();

    let trials: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|i| (0..seeds).map(move |s| (i, s)))
        .collect();
    trials
        .par_iter()
        .map(|&(i, s)| {
            let spec = specs[i].with_seed(derive_seed(specs[i].seed, s as u64));
            let attacked = apply_channel(&embedded.watermarked, &spec)?;
            let ex = extract(&attacked, &embedded.meta, false)?;
            let rec = ex.payload.samples();
            let payload_max_abs_err = rec
                .iter()
                .zip(payload.samples())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            // A fully flattened readout carries no linear information.
            let payload_corr = match correlation(rec, payload.samples()) {
                Ok(c) => c,
                Err(Error::UndefinedCorrelation) => 0.0,
                Err(e) => return Err(e),
            };
            Ok(TrialReport {
                mode: cfg.mode,
                k: payload.len(),
                awgn_snr_db: spec.awgn_snr_db,
                gain: spec.gain,
                requantize_bits: spec.requantize_bits,
                seed: spec.seed,
                metrics: MetricsReport {
                    embed_snr_db,
                    payload_max_abs_err,
                    payload_corr,
                    clamped_count: ex.report.clamped_count,
                    modified_bin_count,
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn snr_examples() {
        let r = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(snr_db(&r, &r).unwrap(), SNR_CAP_DB);
        let t = [1.1, 0.0, 0.0, 0.0];
        assert!((snr_db(&r, &t).unwrap() - 20.0).abs() < 1e-9);
        assert!(matches!(snr_db(&[0.0; 3], &[1.0; 3]), Err(Error::UndefinedSnr)));
        assert!(snr_db(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn snr_matches_energy_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<f64> = (0..500).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = a.iter().map(|v| v + rng.gen_range(-0.1..0.1)).collect();
        let mut es = 0.0;
        let mut en = 0.0;
        for i in 0..a.len() {
            es += a[i].powi(2);
            en += (b[i] - a[i]).powi(2);
        }
        let want = 10.0 * es.log10() - 10.0 * en.log10();
        assert!((snr_db(&a, &b).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn correlation_examples() {
        let a = [1.0, 2.0, -3.0, 0.5];
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((correlation(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((correlation(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(correlation(&[1.0, -1.0, 1.0, -1.0], &[1.0, 1.0, -1.0, -1.0]).unwrap(), 0.0);
        assert!(matches!(correlation(&[2.0; 4], &a), Err(Error::UndefinedCorrelation)));
    }

    #[test]
    fn empty_specs_give_empty_report() {
        let host = AudioClip::new(vec![0.1; 64], 22050).unwrap();
        let payload = WatermarkPayload::new(vec![0.1, 0.2], 8000).unwrap();
        let out = evaluate_pipeline(&host, &payload, &EmbedConfig::default(), &[], 10).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn report_json_field_names() {
        let r = TrialReport {
            mode: Mode::Symmetric,
            k: 4,
            awgn_snr_db: Some(20.0),
            gain: None,
            requantize_bits: None,
            seed: 1,
            metrics: MetricsReport {
                embed_snr_db: 30.0,
                payload_max_abs_err: 0.1,
                payload_corr: 0.9,
                clamped_count: 0,
                modified_bin_count: 8,
            },
        };
        let v = serde_json::to_value(r).unwrap();
        let obj = v.as_object().unwrap();
        for key in [
            "embed_snr_db",
            "payload_max_abs_err",
            "payload_corr",
            "clamped_count",
            "modified_bin_count",
            "mode",
            "k",
            "awgn_snr_db",
            "gain",
            "requantize_bits",
            "seed",
        ] {
            assert!(obj.contains_key(key), "{key}");
        }
        assert_eq!(obj.len(), 11);
        assert_eq!(obj["mode"], "symmetric");
        let back: TrialReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #[test]
        fn snr_scale_invariant(a in proptest::collection::vec(-1.0f64..1.0, 2..100),
                               noise in proptest::collection::vec(-0.1f64..0.1, 100),
                               c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0]) {
            prop_assume!(a.iter().any(|v| v.abs() > 1e-3));
            let b: Vec<f64> = a.iter().zip(&noise).map(|(x, n)| x + n).collect();
            prop_assume!(a.iter().zip(&b).any(|(x, y)| x != y));
            let sa: Vec<f64> = a.iter().map(|v| v * c).collect();
            let sb: Vec<f64> = b.iter().map(|v| v * c).collect();
            prop_assert!((snr_db(&a, &b).unwrap() - snr_db(&sa, &sb).unwrap()).abs() < 1e-6);
        }

        #[test]
        fn correlation_affine_invariant(pair in (3usize..100).prop_flat_map(|n| (
                proptest::collection::vec(-1.0f64..1.0, n),
                proptest::collection::vec(-1.0f64..1.0, n))),
            scale in 0.01f64..100.0, shift in -10.0f64..10.0) {
            let (a, b) = pair;
            let base = match correlation(&a, &b) { Ok(c) => c, Err(_) => return Ok(()) };
            let t: Vec<f64> = a.iter().map(|v| scale * v + shift).collect();
            let c = correlation(&t, &b).unwrap();
            prop_assert!((c - base).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&c));
        }
    }
}
