//! Where the payload goes: capacity per mode and the frequencies of the
//! embed and mirror bins.
//!
//! ```bash
//! cargo run -p logmark --example capacity_and_bins
//! ```

use logmark::spectrum::bin_frequency;
use logmark::watermark::{capacity, embed_bins, mirror_bin};
use logmark::Mode;

fn main() {
    for n in [2usize, 3, 8, 9, 1024, 1 << 16] {
        println!(
            "N = {n:>6}: verbatim K_max = {:>6}, symmetric K_max = {:>6}",
            capacity(n, Mode::Verbatim),
            capacity(n, Mode::Symmetric)
        );
    }

    let n = 8;
    let k = capacity(n, Mode::Symmetric);
    let embed: Vec<usize> = embed_bins(n, k).collect();
    let mirror: Vec<usize> = embed.iter().map(|&b| mirror_bin(n, b)).collect();
    println!("\nN = 8, K = {k}: embed bins {embed:?}, mirror bins {mirror:?}, DC 0 and Nyquist 4 untouched");

    // The top DFT indices are the negative-frequency partners of the lowest
    // positive frequencies.
    let (n, fs, k) = (1usize << 16, 22050, 8000);
    let bins = embed_bins(n, k);
    println!(
        "\nN = 2^16 @ {fs} Hz, K = {k}: embed bins {}..{} span {:.1} Hz to {:.1} Hz",
        bins.start,
        bins.end - 1,
        bin_frequency(bins.start, n, fs),
        bin_frequency(bins.end - 1, n, fs)
    );
}
