//! Rate-optimal beamforming under PA nonlinearity with large-scale CSIT.
//!
//! The original problem over amplitudes `r` and phases `θ` is non-convex.
//! Two observations make it tractable:
//!
//! * phases only rotate PA outputs, so aligning every output to a common
//!   phase is optimal, which fixes `θ` once `r` is known;
//! * any amplitude past saturation can be folded back onto the rising branch
//!   with the same output and less input power, so we may restrict
//!   `r_i ≤ √(1/β_i)` and change variables to the outputs `z̄_i = A_i(r_i)`.
//!
//! In `z̄` the problem is a linear objective over a half-space, a box and a
//! separable convex power constraint, solved by [`barrier`].

pub mod barrier;
pub mod power;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pa::{am_am, am_am_inverse, am_pm, PaBank};
use crate::rate::evaluate_rate;

pub use barrier::BarrierSettings;
pub use power::{power_constraint_f, power_constraint_gradient, power_constraint_hessian_diag};

/// Beamforming vector in polar form, `w_i = r_i·e^{jθ_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamWeights {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

impl BeamWeights {
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>) -> Self {
        Self { amplitudes, phases }
    }

    pub fn zeros(m: usize) -> Self {
        Self::new(vec![0.0; m], vec![0.0; m])
    }

    /// `Σ r_i²`.
    pub fn input_power(&self) -> f64 {
        self.amplitudes.iter().map(|r| r * r).sum()
    }
}

/// Vector of PA output amplitudes, the convex problem's variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubstitutedPoint {
    pub zbar: Vec<f64>,
}

/// One instance of the beamforming problem. All quantities linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    /// Large-scale gains toward the satellite terminal.
    pub l_ss: Vec<f64>,
    /// Large-scale gains toward the terrestrial terminal.
    pub l_st: Vec<f64>,
    pub pa: PaBank,
    /// Sum input power budget `Σ r_i² ≤ P`, watts.
    pub power_limit: f64,
    /// Interference threshold at the terrestrial terminal, watts.
    pub interference_eps: f64,
    pub noise_sigma2: f64,
    /// Phase of the transmitted symbol.
    pub theta0: f64,
}

impl ProblemSpec {
    pub fn antennas(&self) -> usize {
        self.pa.len()
    }

    /// Every violated invariant, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let m = self.pa.len();
        let mut out = Vec::new();
        if m == 0 {
            out.push("antenna count must be ≥ 1".to_string());
        }
        for (name, v) in [("l_ss", &self.l_ss), ("l_st", &self.l_st)] {
            if v.len() != m {
                out.push(format!("{name} has length {}, expected {m}", v.len()));
            }
            if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                out.push(format!("{name} entries must be finite and ≥ 0"));
            }
        }
        for (name, v) in [
            ("power_limit", self.power_limit),
            ("interference_eps", self.interference_eps),
            ("noise_sigma2", self.noise_sigma2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if !self.theta0.is_finite() {
            out.push("theta0 must be finite".to_string());
        }
        for (i, p) in self.pa.iter().enumerate() {
            if let Err(e) = p.validate() {
                out.push(format!("pa[{i}]: {e}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InfeasibleInput(v.join("; ")))
        }
    }

    /// `(l_stᵀ z̄)²`, the worst-case interference at the terrestrial terminal.
    pub fn interference_of(&self, zbar: &[f64]) -> f64 {
        let s: f64 = self.l_st.iter().zip(zbar).map(|(l, z)| l * z).sum();
        s * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
}

/// Result of [`solve_substituted`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutedSolution {
    pub point: SubstitutedPoint,
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub weights: BeamWeights,
    pub zbar_star: SubstitutedPoint,
    /// `l_ssᵀ z̄*`.
    pub objective: f64,
    pub rate_bps_hz: f64,
    /// `(l_stᵀ z̄*)²`.
    pub interference_w: f64,
    /// `Σ r_i²`.
    pub input_power_w: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

// Saleh chains seen as a separable power model in output amplitude.
struct SalehPower<'a>(&'a PaBank);

impl barrier::SeparablePower for SalehPower<'_> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn upper(&self, i: usize) -> f64 {
        self.0[i].z_max()
    }

    fn eval(&self, i: usize, z: f64) -> (f64, f64, f64) {
        let p = &self.0[i];
        let nu = am_am_inverse(p, z.clamp(0.0, p.z_max())).unwrap_or(p.r_sat());
        (nu * nu, power::power_d1(p, nu), power::power_d2(p, nu))
    }

    fn output_for_power(&self, i: usize, power: f64) -> f64 {
        let p = &self.0[i];
        let r = power.max(0.0).sqrt().min(p.r_sat());
        p.alpha * r / (1.0 + p.beta * r * r)
    }
}

/// Solves the substituted convex problem with default settings.
pub fn solve_substituted(spec: &ProblemSpec) -> Result<SubstitutedSolution> {
    solve_substituted_with(spec, &BarrierSettings::default())
}

pub fn solve_substituted_with(
    spec: &ProblemSpec,
    settings: &BarrierSettings,
) -> Result<SubstitutedSolution> {
    spec.validate()?;
    let model = SalehPower(&spec.pa);
    let out = barrier::solve(
        &barrier::Program {
            objective: &spec.l_ss,
            interference: &spec.l_st,
            interference_bound: spec.interference_eps.sqrt(),
            power: &model,
            power_limit: spec.power_limit,
        },
        settings,
    );
    let objective = spec.l_ss.iter().zip(&out.z).map(|(l, z)| l * z).sum();
    Ok(SubstitutedSolution {
        point: SubstitutedPoint { zbar: out.z },
        objective,
        iterations: out.iterations,
        kkt_residual: out.kkt_residual,
        status: if out.converged {
            SolveStatus::Optimal
        } else {
            SolveStatus::MaxIterations
        },
    })
}

/// Input amplitudes realizing `zbar` on the rising branch of every chain.
pub fn recover_amplitudes(pa: &PaBank, zbar: &SubstitutedPoint) -> Result<Vec<f64>> {
    if zbar.zbar.len() != pa.len() {
        return Err(Error::Dimension {
            what: "zbar",
            got: zbar.zbar.len(),
            expected: pa.len(),
        });
    }
    pa.iter()
        .zip(&zbar.zbar)
        .map(|(p, &z)| am_am_inverse(p, z))
        .collect()
}

/// Phases that cancel the symbol phase and each chain's AM/PM rotation, so
/// every PA output lands at phase zero.
pub fn recover_phases(pa: &PaBank, r: &[f64], theta0: f64) -> Result<Vec<f64>> {
    if r.len() != pa.len() {
        return Err(Error::Dimension {
            what: "amplitudes",
            got: r.len(),
            expected: pa.len(),
        });
    }
    pa.iter()
        .zip(r)
        .map(|(p, &r)| Ok(-theta0 - am_pm(p, r)?))
        .collect()
}

/// Replaces every amplitude beyond saturation with the rising-branch
/// amplitude producing the same output.
pub fn fold_to_monotone_region(pa: &PaBank, r: &[f64]) -> Result<Vec<f64>> {
    if r.len() != pa.len() {
        return Err(Error::Dimension {
            what: "amplitudes",
            got: r.len(),
            expected: pa.len(),
        });
    }
    pa.iter()
        .zip(r)
        .map(|(p, &r)| {
            if r <= p.r_sat() {
                am_am(p, r)?;
                Ok(r)
            } else {
                am_am_inverse(p, am_am(p, r)?)
            }
        })
        .collect()
}

/// Full pipeline: convex solve, amplitude and phase recovery, rate.
pub fn solve(spec: &ProblemSpec) -> Result<SolveReport> {
    solve_with(spec, &BarrierSettings::default())
}

pub fn solve_with(spec: &ProblemSpec, settings: &BarrierSettings) -> Result<SolveReport> {
    let sol = solve_substituted_with(spec, settings)?;
    let amplitudes = recover_amplitudes(&spec.pa, &sol.point)?;
    let phases = recover_phases(&spec.pa, &amplitudes, spec.theta0)?;
    let weights = BeamWeights::new(amplitudes, phases);
    Ok(SolveReport {
        rate_bps_hz: evaluate_rate(&spec.l_ss, &sol.point.zbar, spec.noise_sigma2),
        interference_w: spec.interference_of(&sol.point.zbar),
        input_power_w: weights.input_power(),
        weights,
        zbar_star: sol.point,
        objective: sol.objective,
        kkt_residual: sol.kkt_residual,
        iterations: sol.iterations,
        status: sol.status,
    })
}
