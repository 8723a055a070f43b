//! Achievable rate of the satellite link. Every scheme goes through here.

use num_complex::Complex64;

use crate::channel::inner;

/// `log2(1 + gain² / σ²)` for a received amplitude `gain`.
pub fn spectral_efficiency(gain: f64, noise_sigma2: f64) -> f64 {
    (gain * gain / noise_sigma2).ln_1p() / std::f64::consts::LN_2
}

/// Rate of a phase-aligned PA output: `log2(1 + (l_ssᵀ z̄)² / σ²)`.
pub fn evaluate_rate(l_ss: &[f64], zbar: &[f64], noise_sigma2: f64) -> f64 {
    let gain: f64 = l_ss.iter().zip(zbar).map(|(l, z)| l * z).sum();
    spectral_efficiency(gain, noise_sigma2)
}

/// Rate of an arbitrary PA output `z` over a realized channel `h`:
/// `log2(1 + |hᴴ z|² / σ²)`.
pub fn link_rate(h: &[Complex64], z: &[Complex64], noise_sigma2: f64) -> f64 {
    spectral_efficiency(inner(h, z).norm(), noise_sigma2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        let sigma2 = 2.0;
        assert_eq!(evaluate_rate(&[1.0, 2.0], &[0.0, 0.0], sigma2), 0.0);
        let sigma = sigma2.sqrt();
        assert!((evaluate_rate(&[1.0], &[sigma], sigma2) - 1.0).abs() < 1e-15);
        assert!(
            (evaluate_rate(&[1.0], &[3.0 * sigma], sigma2) - std::f64::consts::LOG2_10).abs() < 1e-12
        );
    }

    #[test]
    fn rate_increasing_in_gain() {
        let r: Vec<f64> = (0..100)
            .map(|k| spectral_efficiency(k as f64 * 0.1, 1.0))
            .collect();
        assert!(r.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn link_rate_matches_aligned_rate() {
        let l = [0.5, 1.5];
        let zbar = [0.3, 0.2];
        let h: Vec<Complex64> = l.iter().map(|l| Complex64::from_polar(*l, -0.7)).collect();
        let z: Vec<Complex64> = zbar
            .iter()
            .map(|z| Complex64::from_polar(*z, 1.1))
            .collect();
        let a = link_rate(&h, &z, 0.01);
        let b = evaluate_rate(&l, &zbar, 0.01);
        assert!((a - b).abs() < 1e-12);
    }
}
