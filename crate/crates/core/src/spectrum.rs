//! Whole-clip discrete Fourier transform.
//!
//! Convention: unnormalized forward sum `X[k] = sum_n x[n] e^{-2 pi i k n / N}`,
//! inverse scaled by `1/N`. Any length is transformed directly (mixed radix
//! or Bluestein inside rustfft); nothing is zero-padded.
//!
//! Bin `k` corresponds to `k * fs / N` for `k <= N/2` and `(k - N) * fs / N`
//! above that.

pub use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Complex DFT coefficients of a clip, plus the sample rate for mapping bins
/// to frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
    sample_rate: u32,
}

impl Spectrum {
    pub fn from_coeffs(coeffs: Vec<Complex64>, sample_rate: u32) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyInput);
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidClip("spectrum holds a non-finite coefficient".into()));
        }
        Ok(Self { coeffs, sample_rate })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Signed frequency in Hz of bin `k`.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        bin_frequency(k, self.n(), self.sample_rate)
    }
}

pub fn bin_frequency(k: usize, n: usize, sample_rate: u32) -> f64 {
    let fs = f64::from(sample_rate);
    if k <= n / 2 {
        k as f64 * fs / n as f64
    } else {
        (k as f64 - n as f64) * fs / n as f64
    }
}

/// Forward transform of a real signal.
pub fn forward_dft(x: &[f64], sample_rate: u32) -> Result<Spectrum> {
    let buf = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_dft_complex(buf, sample_rate)
}

/// Forward transform of a complex signal, in place on the owned buffer.
pub fn forward_dft_complex(mut x: Vec<Complex64>, sample_rate: u32) -> Result<Spectrum> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    FftPlanner::new().plan_fft_forward(x.len()).process(&mut x);
    Spectrum::from_coeffs(x, sample_rate)
}

pub fn inverse_dft(s: &Spectrum) -> Vec<Complex64> {
    let mut buf = s.coeffs.clone();
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

pub fn real_part(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    // Independent O(N^2) reference.
    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let ang = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                    acc + v * Complex64::new(ang.cos(), ang.sin())
                })
            })
            .collect()
    }

    fn max_abs(v: &[Complex64]) -> f64 {
        v.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn delta_gives_flat_spectrum() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let s = forward_dft(&x, 8000).unwrap();
        for c in s.coeffs() {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let back = inverse_dft(&s);
        for (b, e) in back.iter().zip(&x) {
            assert!((b.re - e).abs() < 1e-15 && b.im.abs() < 1e-15);
        }
    }

    #[test]
    fn constant_is_dc_only() {
        let c = 0.3;
        let s = forward_dft(&[c; 8], 8000).unwrap();
        assert!((s.coeffs()[0].re - 8.0 * c).abs() < 1e-14);
        for v in &s.coeffs()[1..] {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn empty_input_is_error() {
        assert!(matches!(forward_dft(&[], 8000), Err(Error::EmptyInput)));
    }

    #[test]
    fn bin_convention_matches_pure_tone() {
        let n = 64;
        let fs = 6400;
        // 500 Hz lands on bin 5 and its mirror 59 (-500 Hz)
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * 500.0 * i as f64 / fs as f64).cos())
            .collect();
        let s = forward_dft(&x, fs).unwrap();
        let peak = (0..n / 2)
            .max_by(|&a, &b| s.coeffs()[a].norm().total_cmp(&s.coeffs()[b].norm()))
            .unwrap();
        assert_eq!(peak, 5);
        assert_eq!(s.bin_frequency(peak), 500.0);
        assert_eq!(s.bin_frequency(59), -500.0);
        assert_eq!(s.bin_frequency(32), 3200.0);
    }

    #[test]
    fn matches_naive_dft_for_random_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3, 7, 30, 97, 128, 200, 256] {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let got = forward_dft(&x, 1000).unwrap();
            let cx: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let want = naive_dft(&cx);
            let scale = max_abs(&want).max(1.0);
            for (g, w) in got.coeffs().iter().zip(&want) {
                assert!((g - w).norm() <= 1e-9 * scale, "n={n}");
            }
        }
    }

    #[test]
    fn hermitian_spectrum_inverts_to_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [8usize, 15, 64, 101] {
            let mut c = vec![Complex64::new(0.0, 0.0); n];
            c[0] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for k in 1..n {
                let m = n - k;
                if k < m {
                    let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    c[k] = v;
                    c[m] = v.conj();
                } else if k == m {
                    c[k] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
                }
            }
            let x = inverse_dft(&Spectrum::from_coeffs(c, 1).unwrap());
            assert!(x.iter().all(|v| v.im.abs() <= 1e-9), "n={n}");
        }
    }

    #[test]
    fn real_part_projection() {
        let v = [Complex64::new(3.0, 4.0), Complex64::new(0.0, -2.0), Complex64::new(-1.5, 0.0)];
        assert_eq!(real_part(&v), vec![3.0, 0.0, -1.5]);
    }

    fn complex_vec(max: usize) -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..max)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    }

    proptest! {
        #[test]
        fn roundtrip(x in complex_vec(600)) {
            let back = inverse_dft(&forward_dft_complex(x.clone(), 1).unwrap());
            let bound = 1e-9 * max_abs(&x).max(1.0);
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).norm() <= bound);
            }
        }

        #[test]
        fn linearity(pair in (1usize..300).prop_flat_map(|n| (
                proptest::collection::vec(-1.0f64..1.0, n),
                proptest::collection::vec(-1.0f64..1.0, n))),
            a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let (x, y) = pair;
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let fx = forward_dft(&x, 1).unwrap();
            let fy = forward_dft(&y, 1).unwrap();
            let fm = forward_dft(&mix, 1).unwrap();
            for k in 0..x.len() {
                let want = fx.coeffs()[k] * a + fy.coeffs()[k] * b;
                prop_assert!((fm.coeffs()[k] - want).norm() <= 1e-9 * want.norm().max(1.0));
            }
        }

        #[test]
        fn real_input_is_hermitian(x in proptest::collection::vec(-1.0f64..1.0, 2..500)) {
            let s = forward_dft(&x, 1).unwrap();
            let n = x.len();
            for k in 1..n {
                let d = s.coeffs()[n - k] - s.coeffs()[k].conj();
                prop_assert!(d.norm() <= 1e-9);
            }
        }
    }
}
