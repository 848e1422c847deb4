//! Forward/inverse transform conventions on a pure tone.
//!
//! ```bash
//! cargo run -p logmark --example spectrum_probe
//! ```

use std::f64::consts::PI;

use logmark::spectrum::{forward_dft, inverse_dft};

fn main() -> logmark::Result<()> {
    let (n, fs, f0) = (1000usize, 8000u32, 440.0);
    let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * f0 * i as f64 / fs as f64).sin()).collect();
    let s = forward_dft(&x, fs)?;

    let peak = (1..n / 2)
        .max_by(|&a, &b| s.coeffs()[a].norm().total_cmp(&s.coeffs()[b].norm()))
        .unwrap_or(0);
    println!("{n}-point DFT (no padding) of a {f0} Hz tone @ {fs} Hz");
    println!("peak bin {peak} = {:.1} Hz, mirror bin {} = {:.1} Hz", s.bin_frequency(peak), n - peak, s.bin_frequency(n - peak));

    let time: f64 = x.iter().map(|v| v * v).sum();
    let freq: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
    println!("Parseval: time energy {time:.9}, spectral energy / N {freq:.9}");

    let back = inverse_dft(&s);
    let err = x.iter().zip(&back).map(|(a, b)| (a - b.re).abs().max(b.im.abs())).fold(0.0, f64::max);
    println!("round-trip max error {err:.2e}");
    Ok(())
}
