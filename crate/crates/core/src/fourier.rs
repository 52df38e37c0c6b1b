//! Period extraction from uniformly sampled observables.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Magnitudes of the one-sided discrete Fourier spectrum of the mean-removed
/// series; entry `k` is the amplitude of `k` cycles across the window.
pub fn cycle_spectrum(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .map(|x| Complex::new(x - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().take(n / 2 + 1).map(|z| z.norm()).collect()
}

/// Number of cycles across the window carried by the strongest nonzero bin.
/// Returns 0 for fewer than four samples or a constant series.
pub fn dominant_cycles(samples: &[f64]) -> usize {
    let spectrum = cycle_spectrum(samples);
    if spectrum.len() < 3 {
        return 0;
    }
    let (k, peak) = spectrum
        .iter()
        .enumerate()
        .skip(1)
        .fold(
            (0, 0.0),
            |best, (k, a)| if *a > best.1 { (k, *a) } else { best },
        );
    if peak <= 1e-14 * samples.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0) {
        0
    } else {
        k
    }
}

/// Dominant period of a series sampled over a window of length `span`.
pub fn dominant_period(samples: &[f64], span: f64) -> Option<f64> {
    match dominant_cycles(samples) {
        0 => None,
        k => Some(span / k as f64),
    }
}

/// Share of spectral weight (excluding the mean) carried by `k` cycles.
pub fn cycle_weight(samples: &[f64], k: usize) -> f64 {
    let spectrum = cycle_spectrum(samples);
    let total: f64 = spectrum.iter().skip(1).map(|a| a * a).sum();
    if total == 0.0 || k == 0 || k >= spectrum.len() {
        return 0.0;
    }
    spectrum[k] * spectrum[k] / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sampled(period: f64, span: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * PI * i as f64 * span / n as f64 / period).cos() + 0.3)
            .collect()
    }

    #[test]
    fn recovers_sinusoid_period_within_one_bin() {
        let span = 4.0 * 2.0 * PI / 0.4;
        for period in [15.707_963, 7.853_98, 5.0, 31.4] {
            let s = sampled(period, span, 256);
            let got = dominant_period(&s, span).unwrap();
            let bin = |p: f64| span / p;
            assert!((bin(got) - bin(period)).abs() <= 1.0, "{period} -> {got}");
        }
    }

    #[test]
    fn constant_series_has_no_period() {
        assert_eq!(dominant_cycles(&[2.0; 64]), 0);
        assert_eq!(dominant_period(&[1.0; 16], 1.0), None);
    }

    #[test]
    fn weight_of_pure_tone_is_one() {
        let s = sampled(8.0, 64.0, 64);
        assert!((cycle_weight(&s, 8) - 1.0).abs() < 1e-12);
    }
}
