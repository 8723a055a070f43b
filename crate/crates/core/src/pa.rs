//! Saleh power-amplifier model.
//!
//! AM/AM: `A(r) = α·r / (1 + β·r²)`, AM/PM: `Φ(r) = α_φ·r² / (1 + β_φ·r²)`.
//!
//! `A` rises to its peak `α / (2√β)` at the saturation input `√(1/β)` and
//! falls afterwards. The optimizer only ever works on the rising branch, so
//! the inverse provided here is the rising-branch inverse.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamformer::BeamWeights;
use crate::error::{Error, Result};

/// Relative slack accepted above the saturated output before an amplitude is
/// rejected as infeasible. Values inside the slack are clamped.
pub const SATURATION_SLACK: f64 = 1e-12;

/// AM/AM and AM/PM coefficients of one RF chain.
///
/// `alpha_phi` may take any sign; phase compensation does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SalehParams {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_phi: f64,
    pub beta_phi: f64,
}

impl SalehParams {
    pub fn new(alpha: f64, beta: f64, alpha_phi: f64, beta_phi: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            alpha_phi,
            beta_phi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Parameter(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Parameter(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        if !self.alpha_phi.is_finite() {
            return Err(Error::Parameter("alpha_phi must be finite".into()));
        }
        if !(self.beta_phi.is_finite() && self.beta_phi >= 0.0) {
            return Err(Error::Parameter(format!(
                "beta_phi must be ≥ 0, got {}",
                self.beta_phi
            )));
        }
        Ok(())
    }

    /// Input amplitude at which the output amplitude peaks, `√(1/β)`.
    pub fn r_sat(&self) -> f64 {
        (1.0 / self.beta).sqrt()
    }

    /// Peak output amplitude, `α / (2√β)`.
    pub fn z_max(&self) -> f64 {
        self.alpha / (2.0 * self.beta.sqrt())
    }
}

/// One set of Saleh coefficients per RF chain, in antenna order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PaBank(Vec<SalehParams>);

impl PaBank {
    pub fn new(params: Vec<SalehParams>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::Parameter(
                "PA bank must hold at least one chain".into(),
            ));
        }
        for p in &params {
            p.validate()?;
        }
        Ok(Self(params))
    }

    /// `m` identical chains.
    pub fn uniform(params: SalehParams, m: usize) -> Result<Self> {
        Self::new(vec![params; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn params(&self) -> &[SalehParams] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SalehParams> {
        self.0.iter()
    }
}

impl std::ops::Index<usize> for PaBank {
    type Output = SalehParams;

    fn index(&self, i: usize) -> &SalehParams {
        &self.0[i]
    }
}

fn check_amplitude(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!(
            "input amplitude must be finite and ≥ 0, got {r}"
        )));
    }
    Ok(())
}

/// Output amplitude for input amplitude `r`.
///
/// `αr / (1 + βr²)`, evaluated as `z_max · 2s / (1 + s²)` with `s = r / r_sat`
/// so that `am_am(r_sat)` is exactly `z_max` and round-trips through
/// [`am_am_inverse`].
pub fn am_am(p: &SalehParams, r: f64) -> Result<f64> {
    check_amplitude(r)?;
    let s = r / p.r_sat();
    Ok(p.z_max() * (2.0 * s / (1.0 + s * s)))
}

/// Phase distortion in radians for input amplitude `r`.
pub fn am_pm(p: &SalehParams, r: f64) -> Result<f64> {
    check_amplitude(r)?;
    Ok(p.alpha_phi * r * r / (1.0 + p.beta_phi * r * r))
}

/// Saturation input amplitude `√(1/β)`.
pub fn saturation_input(p: &SalehParams) -> Result<f64> {
    if !(p.beta > 0.0) {
        return Err(Error::Parameter(format!(
            "beta must be > 0, got {}",
            p.beta
        )));
    }
    Ok(p.r_sat())
}

/// Rising-branch inverse of [`am_am`]: the input amplitude in `[0, r_sat]`
/// that produces output amplitude `zbar`.
///
/// Evaluates `(α − √(α² − 4β·z̄²)) / (2β·z̄)` in the rationalized form
/// `r_sat · y / (1 + √(1 − y²))` with `y = z̄ / z_max`. The two are equal
/// algebraically; the second has no 0/0 at `z̄ = 0` and no cancellation near
/// `z_max`.
pub fn am_am_inverse(p: &SalehParams, zbar: f64) -> Result<f64> {
    if !zbar.is_finite() || zbar < 0.0 {
        return Err(Error::Domain(format!(
            "output amplitude must be finite and ≥ 0, got {zbar}"
        )));
    }
    let z_max = p.z_max();
    if zbar > z_max * (1.0 + SATURATION_SLACK) {
        return Err(Error::InfeasibleAmplitude { zbar, z_max });
    }
    if zbar == 0.0 {
        return Ok(0.0);
    }
    let y = (zbar / z_max).min(1.0);
    let disc = ((1.0 - y) * (1.0 + y)).max(0.0);
    Ok(p.r_sat() * y / (1.0 + disc.sqrt()))
}

/// Passes beamformed symbol `e^{jθ0}·w` through the PA bank.
///
/// `z_i = A_i(r_i) · exp(j(θ0 + θ_i + Φ_i(r_i)))`.
pub fn amplify(bank: &PaBank, weights: &BeamWeights, theta0: f64) -> Result<Vec<Complex64>> {
    let m = bank.len();
    if weights.amplitudes.len() != m {
        return Err(Error::Dimension {
            what: "amplitudes",
            got: weights.amplitudes.len(),
            expected: m,
        });
    }
    if weights.phases.len() != m {
        return Err(Error::Dimension {
            what: "phases",
            got: weights.phases.len(),
            expected: m,
        });
    }
    bank.iter()
        .zip(weights.amplitudes.iter().zip(&weights.phases))
        .map(|(p, (&r, &theta))| {
            let mag = am_am(p, r)?;
            let phase = theta0 + theta + am_pm(p, r)?;
            Ok(Complex64::from_polar(mag, phase))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit() -> SalehParams {
        SalehParams::new(1.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn am_am_examples() {
        assert_eq!(am_am(&unit(), 0.0).unwrap(), 0.0);
        let p = SalehParams::new(0.9445, 0.5138, 4.0033, 9.1040).unwrap();
        let at_sat = am_am(&p, p.r_sat()).unwrap();
        assert!((at_sat - 0.658_832_351_320_690_4).abs() < 1e-14);
        assert!((at_sat - p.z_max()).abs() <= 1e-15 * p.z_max());
        assert!((am_am(&unit(), 2.0).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn am_pm_examples() {
        assert_eq!(am_pm(&unit(), 0.0).unwrap(), 0.0);
        let p = SalehParams::new(1.0, 1.0, 4.0033, 9.1040).unwrap();
        assert!((am_pm(&p, 1.0).unwrap() - 4.0033 / 10.1040).abs() < 1e-15);
        let p = SalehParams::new(1.0, 1.0, 4.0, 0.0).unwrap();
        assert_eq!(am_pm(&p, 2.0).unwrap(), 16.0);
    }

    #[test]
    fn rejects_bad_amplitudes() {
        assert!(matches!(am_am(&unit(), -1.0), Err(Error::Domain(_))));
        assert!(matches!(am_pm(&unit(), f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(
            am_am_inverse(&unit(), -0.1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            am_am_inverse(&unit(), 0.5001),
            Err(Error::InfeasibleAmplitude { .. })
        ));
        // inside the clamp slack
        assert_eq!(am_am_inverse(&unit(), 0.5 * (1.0 + 1e-13)).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SalehParams::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(SalehParams::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(SalehParams::new(1.0, 1.0, 0.0, -1.0).is_err());
        assert!(SalehParams::new(1.0, 1.0, -3.0, 0.0).is_ok());
        let raw = SalehParams {
            alpha: 1.0,
            beta: -1.0,
            alpha_phi: 0.0,
            beta_phi: 0.0,
        };
        assert!(matches!(saturation_input(&raw), Err(Error::Parameter(_))));
        assert!(PaBank::new(vec![]).is_err());
    }

    #[test]
    fn saturation_examples() {
        assert_eq!(saturation_input(&unit()).unwrap(), 1.0);
        let p = SalehParams::new(1.0, 0.5138, 0.0, 0.0).unwrap();
        assert!((saturation_input(&p).unwrap() - 1.395_092_326_777_534).abs() < 1e-12);
        let p = SalehParams::new(1.0, 4.0, 0.0, 0.0).unwrap();
        assert_eq!(saturation_input(&p).unwrap(), 0.5);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(am_am_inverse(&unit(), 0.0).unwrap(), 0.0);
        assert!((am_am_inverse(&unit(), 0.5).unwrap() - 1.0).abs() < 1e-15);
        // brute-force root of am_am(r) = 0.4 on the rising branch
        let target = 0.4;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if am_am(&unit(), mid).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((am_am_inverse(&unit(), target).unwrap() - lo).abs() < 1e-14);
        assert!((lo - 0.5).abs() < 1e-14);
    }

    #[test]
    fn amplify_examples() {
        let bank = PaBank::uniform(SalehParams::new(1.0, 1.0, 0.0, 1.0).unwrap(), 1).unwrap();
        let z = amplify(&bank, &BeamWeights::new(vec![0.0], vec![0.0]), 0.0).unwrap();
        assert_eq!(z[0], Complex64::new(0.0, 0.0));
        let z = amplify(&bank, &BeamWeights::new(vec![1.0], vec![0.0]), 0.0).unwrap();
        assert!((z[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);

        let bank = PaBank::uniform(SalehParams::new(1.0, 1.0, 0.3, 1.0).unwrap(), 2).unwrap();
        let z = amplify(&bank, &BeamWeights::new(vec![1.0, 1.0], vec![0.0, PI]), 0.0).unwrap();
        assert!((z[0].norm() - z[1].norm()).abs() < 1e-15);
        assert!((z[0] + z[1]).norm() < 1e-15);

        let bad = amplify(&bank, &BeamWeights::new(vec![1.0], vec![0.0]), 0.0);
        assert!(matches!(bad, Err(Error::Dimension { .. })));
    }

    #[test]
    fn monotone_regions() {
        let p = SalehParams::new(0.9445, 0.5138, 4.0033, 9.1040).unwrap();
        let r_sat = p.r_sat();
        let n = 2000;
        let rising: Vec<f64> = (0..=n)
            .map(|k| am_am(&p, r_sat * k as f64 / n as f64).unwrap())
            .collect();
        assert!(rising.windows(2).all(|w| w[1] > w[0]));
        let falling: Vec<f64> = (1..=n)
            .map(|k| am_am(&p, r_sat * (1.0 + 4.0 * k as f64 / n as f64)).unwrap())
            .collect();
        assert!(falling.windows(2).all(|w| w[1] < w[0]));
        assert!(falling[0] < p.z_max());
    }

    fn saleh() -> impl Strategy<Value = SalehParams> {
        (0.1f64..3.0, 0.05f64..5.0, -5.0f64..5.0, 0.0f64..12.0)
            .prop_map(|(a, b, ap, bp)| SalehParams::new(a, b, ap, bp).unwrap())
    }

    proptest! {
        #[test]
        fn inverse_round_trip(p in saleh(), u in 0.0f64..1.0) {
            let r = u * p.r_sat();
            let back = am_am_inverse(&p, am_am(&p, r).unwrap()).unwrap();
            prop_assert!((back - r).abs() <= 1e-10, "r={r} back={back}");
        }

        #[test]
        fn fold_preserves_output(p in saleh(), k in 1.0001f64..20.0) {
            let r = k * p.r_sat();
            let gamma = am_am(&p, r).unwrap();
            let folded = am_am_inverse(&p, gamma).unwrap();
            prop_assert!(folded <= p.r_sat());
            prop_assert!(folded < r);
            let again = am_am(&p, folded).unwrap();
            prop_assert!((again - gamma).abs() <= 1e-12 * gamma);
        }

        #[test]
        fn amplify_decomposes(p in saleh(), r in 0.0f64..4.0, theta in -PI..PI, theta0 in -PI..PI) {
            let bank = PaBank::uniform(p, 1).unwrap();
            let z = amplify(&bank, &BeamWeights::new(vec![r], vec![theta]), theta0).unwrap()[0];
            prop_assert!((z.norm() - am_am(&p, r).unwrap()).abs() <= 1e-12);
            if z.norm() > 1e-9 {
                let expected = theta0 + theta + am_pm(&p, r).unwrap();
                let diff = (z.arg() - expected).rem_euclid(2.0 * PI);
                let wrapped = diff.min(2.0 * PI - diff);
                prop_assert!(wrapped <= 1e-12, "phase diff {wrapped}");
            }
        }
    }
}
