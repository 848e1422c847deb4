//! Robustness sweep: embed once, then AWGN at several SNRs with ten seeds
//! each. Pass `--json` to print the full trial report.
//!
//! ```bash
//! cargo run -p logmark --example attack_sweep
//! cargo run -p logmark --example attack_sweep -- --json
//! ```

use logmark::{evaluate_pipeline, synth, ChannelSpec, EmbedConfig, Mode};

fn main() -> logmark::Result<()> {
    let host = synth::instrumental_host(1 << 16, 22050, 2024)?;
    let payload = synth::speech_like_payload(1024, 8000, 5)?;
    let snrs = [f64::INFINITY, 60.0, 40.0, 30.0, 20.0, 10.0];
    let seeds = 10;
    let specs: Vec<ChannelSpec> = snrs.iter().map(|&s| ChannelSpec::awgn(s, 77)).collect();

    for mode in [Mode::Symmetric, Mode::Verbatim] {
        let reports = evaluate_pipeline(&host, &payload, &EmbedConfig::new(mode), &specs, seeds)?;
        if std::env::args().any(|a| a == "--json") {
            println!("{}", serde_json::to_string_pretty(&reports).expect("report serializes"));
            continue;
        }
        println!("{mode} mode, K = {}", payload.len());
        for (snr, chunk) in snrs.iter().zip(reports.chunks(seeds)) {
            let corr = chunk.iter().map(|r| r.metrics.payload_corr).sum::<f64>() / seeds as f64;
            let clamped = chunk.iter().map(|r| r.metrics.clamped_count).sum::<usize>() / seeds;
            println!("  AWGN {snr:>5} dB: mean corr {corr:.4}, mean clamped bins {clamped}");
        }
    }
    Ok(())
}
