//! Comparison beamformers. Both are designed without regard to the PA and are
//! evaluated through the true nonlinear PA by the caller.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamformer::barrier::{self, BarrierSettings, SeparablePower};
use crate::beamformer::{BeamWeights, ProblemSpec};
use crate::error::{Error, Result};
use crate::pa::am_am;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    MrtScaled,
    LinearIgnorantCapped,
}

impl BaselineKind {
    pub fn design(self, spec: &ProblemSpec, h_ss: &[Complex64]) -> Result<BeamWeights> {
        match self {
            Self::MrtScaled => mrt_scaled(spec, h_ss),
            Self::LinearIgnorantCapped => linear_ignorant_capped(spec, h_ss),
        }
    }
}

/// Relative bracket width at which the MRT scaling bisection stops.
pub const MRT_BISECTION_TOL: f64 = 1e-10;

const MRT_SCAN_STEPS: usize = 256;

fn check(spec: &ProblemSpec, h_ss: &[Complex64]) -> Result<()> {
    spec.validate()?;
    if h_ss.len() != spec.antennas() {
        return Err(Error::Dimension {
            what: "h_ss",
            got: h_ss.len(),
            expected: spec.antennas(),
        });
    }
    Ok(())
}

// Conjugate-matched phases with the symbol phase removed.
fn matched_phases(h_ss: &[Complex64], theta0: f64) -> Vec<f64> {
    h_ss.iter().map(|h| h.arg() - theta0).collect()
}

/// MRT direction `r ∝ |h|`, scaled by the largest `c` for which both the
/// input power and the true (nonlinear) interference bound hold.
///
/// The interference of `c·r` is not monotone in `c` once chains saturate,
/// so `c` is the upper end of the feasible interval that contains zero:
/// a coarse scan locates the first infeasible scale, then bisection refines.
pub fn mrt_scaled(spec: &ProblemSpec, h_ss: &[Complex64]) -> Result<BeamWeights> {
    check(spec, h_ss)?;
    let m = spec.antennas();
    let norm: f64 = h_ss.iter().map(|h| h.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(BeamWeights::zeros(m));
    }
    let dir: Vec<f64> = h_ss.iter().map(|h| h.norm() / norm).collect();

    let interference = |c: f64| -> f64 {
        let s: f64 = spec
            .pa
            .iter()
            .zip(&dir)
            .zip(&spec.l_st)
            .map(|((p, d), l)| l * am_am(p, c * d).unwrap_or(0.0))
            .sum();
        s * s
    };
    let feasible = |c: f64| interference(c) <= spec.interference_eps;

    let c_max = spec.power_limit.sqrt();
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=MRT_SCAN_STEPS {
        let c = c_max * k as f64 / MRT_SCAN_STEPS as f64;
        if feasible(c) {
            lo = c;
        } else {
            hi = Some(c);
            break;
        }
    }
    let scale = match hi {
        None => c_max,
        Some(mut hi) => {
            while hi - lo > MRT_BISECTION_TOL * hi {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };
    Ok(BeamWeights::new(
        dir.iter().map(|d| scale * d).collect(),
        matched_phases(h_ss, spec.theta0),
    ))
}

// Linear PA: output equals input, power z², box up to √P.
struct LinearPower {
    m: usize,
    cap: f64,
}

impl SeparablePower for LinearPower {
    fn dim(&self) -> usize {
        self.m
    }

    fn upper(&self, _: usize) -> f64 {
        self.cap
    }

    fn eval(&self, _: usize, z: f64) -> (f64, f64, f64) {
        (z * z, 2.0 * z, 2.0)
    }

    fn output_for_power(&self, _: usize, power: f64) -> f64 {
        power.max(0.0).sqrt().min(self.cap)
    }
}

/// Optimal design for a hypothetical linear PA (`z = r`): maximize `l_ssᵀr`
/// subject to `l_stᵀr ≤ √ε`, `Σ r² ≤ P`, `r ≥ 0`. The amplitudes go to the
/// real PA unchanged, so strong antennas can be driven past saturation, and
/// AM/PM is left uncompensated.
pub fn linear_ignorant_capped(spec: &ProblemSpec, h_ss: &[Complex64]) -> Result<BeamWeights> {
    check(spec, h_ss)?;
    let m = spec.antennas();
    let model = LinearPower {
        m,
        cap: spec.power_limit.sqrt(),
    };
    let out = barrier::solve(
        &barrier::Program {
            objective: &spec.l_ss,
            interference: &spec.l_st,
            interference_bound: spec.interference_eps.sqrt(),
            power: &model,
            power_limit: spec.power_limit,
        },
        &BarrierSettings::default(),
    );
    Ok(BeamWeights::new(out.z, matched_phases(h_ss, spec.theta0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::inner;
    use crate::pa::{amplify, PaBank, SalehParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(m: usize, eps: f64, p: f64) -> ProblemSpec {
        ProblemSpec {
            l_ss: vec![1.0; m],
            l_st: vec![0.5; m],
            pa: PaBank::uniform(SalehParams::new(1.0, 1.0, 0.3, 1.0).unwrap(), m).unwrap(),
            power_limit: p,
            interference_eps: eps,
            noise_sigma2: 1.0,
            theta0: 0.0,
        }
    }

    #[test]
    fn mrt_power_only() {
        let s = spec(2, 1e9, 1.0);
        let h = vec![Complex64::new(0.0, 1.0); 2];
        let w = mrt_scaled(&s, &h).unwrap();
        let half = std::f64::consts::FRAC_1_SQRT_2;
        assert!((w.amplitudes[0] - half).abs() < 1e-12);
        assert!((w.amplitudes[1] - half).abs() < 1e-12);
        assert!((w.phases[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn mrt_tiny_eps_shuts_off() {
        let s = spec(3, 1e-30, 1.0);
        let h = vec![Complex64::new(1.0, 0.0); 3];
        let w = mrt_scaled(&s, &h).unwrap();
        assert!(w.amplitudes.iter().all(|r| *r < 1e-12));
    }

    #[test]
    fn mrt_scale_is_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let m = 4;
            let s = ProblemSpec {
                l_ss: (0..m).map(|_| rng.gen_range(0.1..1.0)).collect(),
                l_st: (0..m).map(|_| rng.gen_range(0.0..1.0)).collect(),
                pa: PaBank::uniform(SalehParams::new(0.95, 0.52, 4.0, 9.1).unwrap(), m).unwrap(),
                power_limit: rng.gen_range(0.5..20.0),
                interference_eps: rng.gen_range(0.01..0.5),
                noise_sigma2: 1.0,
                theta0: 0.0,
            };
            let h: Vec<Complex64> = s
                .l_ss
                .iter()
                .map(|l| Complex64::from_polar(*l, rng.gen_range(-3.0..3.0)))
                .collect();
            let w = mrt_scaled(&s, &h).unwrap();
            let zbar: Vec<f64> =
                s.pa.iter()
                    .zip(&w.amplitudes)
                    .map(|(p, r)| am_am(p, *r).unwrap())
                    .collect();
            let interference = s.interference_of(&zbar);
            assert!(interference <= s.interference_eps * (1.0 + 1e-8));
            assert!(w.input_power() <= s.power_limit * (1.0 + 1e-12));
            let grown: Vec<f64> = w.amplitudes.iter().map(|r| r * (1.0 + 1e-6)).collect();
            let zg: Vec<f64> =
                s.pa.iter()
                    .zip(&grown)
                    .map(|(p, r)| am_am(p, *r).unwrap())
                    .collect();
            let power: f64 = grown.iter().map(|r| r * r).sum();
            assert!(
                s.interference_of(&zg) > s.interference_eps || power > s.power_limit,
                "scale not maximal"
            );
        }
    }

    #[test]
    fn linear_design_small_signal_matches_linear_pa() {
        let m = 4;
        let mut s = spec(m, 1e-4, 0.01);
        s.l_ss = vec![1.0, 0.6, 0.3, 0.2];
        s.l_st = vec![0.05, 0.4, 0.2, 0.9];
        s.pa =
            PaBank::uniform(SalehParams::new(0.9445, 0.5138, 4.0033, 9.104).unwrap(), m).unwrap();
        let h: Vec<Complex64> = s.l_ss.iter().map(|l| Complex64::new(*l, 0.0)).collect();
        let w = linear_ignorant_capped(&s, &h).unwrap();
        let r_sat = s.pa[0].r_sat();
        assert!(w.amplitudes.iter().all(|r| *r <= 0.1 * r_sat));
        let z = amplify(&s.pa, &w, 0.0).unwrap();
        let nonlinear = inner(&h, &z).norm();
        let linear: f64 = s
            .l_ss
            .iter()
            .zip(&w.amplitudes)
            .map(|(l, r)| l * s.pa[0].alpha * r)
            .sum();
        assert!((nonlinear - linear).abs() <= 0.02 * linear);
    }

    #[test]
    fn linear_design_is_optimal_for_linear_pa() {
        // one antenna with no interference leakage takes the whole budget
        let mut s = spec(2, 1e-6, 4.0);
        s.l_ss = vec![1.0, 1.0];
        s.l_st = vec![0.0, 1.0];
        let h = vec![Complex64::new(1.0, 0.0); 2];
        let w = linear_ignorant_capped(&s, &h).unwrap();
        // second antenna capped by interference at 1e-3, first gets the rest
        assert!((w.amplitudes[1] - 1e-3).abs() < 1e-8);
        assert!((w.amplitudes[0] - (4.0f64 - 1e-6).sqrt()).abs() < 1e-7);
    }

    #[test]
    fn dimension_checked() {
        let s = spec(2, 1.0, 1.0);
        assert!(mrt_scaled(&s, &[Complex64::new(1.0, 0.0)]).is_err());
        assert!(linear_ignorant_capped(&s, &[]).is_err());
    }
}
