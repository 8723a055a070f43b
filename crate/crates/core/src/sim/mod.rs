//! Monte Carlo sweeps comparing the optimal beamformer with the baselines.
//!
//! Every trial draws one channel pair, one PA bank and the small-scale
//! phases from its own generator stream (`seed`, stream = trial index). The
//! same draws are reused for every sweep value and every scheme, so
//! differences between schemes and between sweep points are not sampling
//! noise.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::BaselineKind;
use crate::beamformer::{self, BeamWeights, ProblemSpec, SolveStatus};
use crate::channel::{self, collapse, realize, ChannelConfig, LargeScaleChannel, SmallScalePhase};
use crate::error::{Error, Result};
use crate::pa::{am_am, am_pm, amplify, PaBank, SalehParams};
use crate::rate::link_rate;
use crate::units::{dbm_to_watts, dbw_to_watts};

pub use crate::rate::evaluate_rate;

/// Uniform jitter around base Saleh coefficients: `base + jitter·U[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SalehDistribution {
    pub alpha_base: f64,
    pub alpha_jitter: f64,
    pub beta_base: f64,
    pub beta_jitter: f64,
    pub alpha_phi_base: f64,
    pub alpha_phi_jitter: f64,
    pub beta_phi_base: f64,
    pub beta_phi_jitter: f64,
}

impl Default for SalehDistribution {
    fn default() -> Self {
        Self {
            alpha_base: 0.9445,
            alpha_jitter: 0.1,
            beta_base: 0.5138,
            beta_jitter: 0.1,
            alpha_phi_base: 4.0033,
            alpha_phi_jitter: 1.0,
            beta_phi_base: 9.1040,
            beta_phi_jitter: 1.0,
        }
    }
}

impl SalehDistribution {
    pub fn base(&self) -> SalehParams {
        SalehParams {
            alpha: self.alpha_base,
            beta: self.beta_base,
            alpha_phi: self.alpha_phi_base,
            beta_phi: self.beta_phi_base,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.alpha_base > 0.0) {
            out.push("saleh.alpha_base must be > 0".to_string());
        }
        if !(self.beta_base > 0.0) {
            out.push("saleh.beta_base must be > 0".to_string());
        }
        if !self.alpha_phi_base.is_finite() {
            out.push("saleh.alpha_phi_base must be finite".to_string());
        }
        if !(self.beta_phi_base >= 0.0) {
            out.push("saleh.beta_phi_base must be ≥ 0".to_string());
        }
        for (name, j) in [
            ("alpha_jitter", self.alpha_jitter),
            ("beta_jitter", self.beta_jitter),
            ("alpha_phi_jitter", self.alpha_phi_jitter),
            ("beta_phi_jitter", self.beta_phi_jitter),
        ] {
            if !(j.is_finite() && j >= 0.0) {
                out.push(format!("saleh.{name} must be finite and ≥ 0"));
            }
        }
        out
    }
}

/// Draws one PA bank with independent uniform jitter on every coefficient.
pub fn draw_saleh_bank<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    dist: &SalehDistribution,
) -> Result<PaBank> {
    if let Some(v) = dist.violations().first() {
        return Err(Error::Config(v.clone()));
    }
    let params = (0..m)
        .map(|_| {
            let mut draw = |base: f64, jitter: f64| base + jitter * rng.gen::<f64>();
            SalehParams::new(
                draw(dist.alpha_base, dist.alpha_jitter),
                draw(dist.beta_base, dist.beta_jitter),
                draw(dist.alpha_phi_base, dist.alpha_phi_jitter),
                draw(dist.beta_phi_base, dist.beta_phi_jitter),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    PaBank::new(params)
}

/// Monte Carlo estimate of `E_φ |h(φ)ᴴ z|²` at the terrestrial terminal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceEstimate {
    pub mean: f64,
    pub std_err: f64,
}

pub fn estimate_interference<R: Rng + ?Sized>(
    l_st: &LargeScaleChannel,
    weights: &BeamWeights,
    pa: &PaBank,
    theta0: f64,
    n_phase_samples: usize,
    rng: &mut R,
) -> Result<InterferenceEstimate> {
    if n_phase_samples == 0 {
        return Err(Error::Config("phase sample count must be ≥ 1".into()));
    }
    let z = amplify(pa, weights, theta0)?;
    let samples: Vec<f64> = (0..n_phase_samples)
        .map(|_| {
            let h = realize(l_st, SmallScalePhase::draw(rng));
            channel::inner(&h, &z).norm_sqr()
        })
        .collect();
    let (mean, std_err) = mean_and_stderr(&samples);
    Ok(InterferenceEstimate { mean, std_err })
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    EpsDbm,
    PowerDbw,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::EpsDbm => "eps_dbm",
            Self::PowerDbw => "power_dbw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Proposed,
    MrtScaled,
    LinearIgnorantCapped,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [
        Scheme::Proposed,
        Scheme::MrtScaled,
        Scheme::LinearIgnorantCapped,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Proposed => "proposed",
            Self::MrtScaled => "mrt_scaled",
            Self::LinearIgnorantCapped => "linear_ignorant_capped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub antennas: usize,
    pub trials: usize,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    /// Power budget when it is not the swept variable.
    pub power_limit_dbw: Option<f64>,
    /// Interference threshold when it is not the swept variable.
    pub eps_dbm: Option<f64>,
    pub noise_dbm: f64,
    pub saleh: SalehDistribution,
    pub channel: ChannelConfig,
    pub seed: u64,
    /// Feed-phase draws per interference estimate.
    pub phase_samples: usize,
    /// Keep per-trial records in the result.
    pub keep_trials: bool,
}

impl ExperimentConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.antennas < 1 {
            out.push("antennas must be ≥ 1".to_string());
        }
        if self.trials < 1 {
            out.push("trials must be ≥ 1".to_string());
        }
        if self.phase_samples < 1 {
            out.push("phase_samples must be ≥ 1".to_string());
        }
        if self.sweep_values.is_empty() {
            out.push("sweep values must not be empty".to_string());
        }
        if self.sweep_values.iter().any(|v| !v.is_finite()) {
            out.push("sweep values must be finite".to_string());
        }
        if self.sweep_values.windows(2).any(|w| !(w[1] > w[0])) {
            out.push("sweep values must be sorted strictly ascending".to_string());
        }
        match self.sweep_variable {
            SweepVariable::EpsDbm if !self.power_limit_dbw.is_some_and(f64::is_finite) => {
                out.push("power_limit_dbw must be set when sweeping eps_dbm".to_string())
            }
            SweepVariable::PowerDbw if !self.eps_dbm.is_some_and(f64::is_finite) => {
                out.push("eps_dbm must be set when sweeping power_dbw".to_string())
            }
            _ => {}
        }
        if !self.noise_dbm.is_finite() {
            out.push("noise_dbm must be finite".to_string());
        }
        out.extend(self.saleh.violations());
        out.extend(self.channel.violations());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }

    /// `(P, ε)` in watts at one sweep value.
    pub fn operating_point(&self, value: f64) -> (f64, f64) {
        match self.sweep_variable {
            SweepVariable::EpsDbm => (
                dbw_to_watts(self.power_limit_dbw.unwrap_or(f64::NAN)),
                dbm_to_watts(value),
            ),
            SweepVariable::PowerDbw => (
                dbw_to_watts(value),
                dbm_to_watts(self.eps_dbm.unwrap_or(f64::NAN)),
            ),
        }
    }
}

/// Random draws shared by all schemes and sweep points of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw {
    pub ss: LargeScaleChannel,
    pub st: LargeScaleChannel,
    pub pa: PaBank,
    pub phi_s: SmallScalePhase,
    pub theta0: f64,
}

/// Generator for trial `trial` of an experiment seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn draw_trial<R: Rng + ?Sized>(rng: &mut R, cfg: &ExperimentConfig) -> Result<TrialDraw> {
    let (ss, st) = channel::sample_scenario(rng, cfg.antennas, &cfg.channel)?;
    let pa = draw_saleh_bank(rng, cfg.antennas, &cfg.saleh)?;
    let phi_s = SmallScalePhase::draw(rng);
    let theta0 = rng.gen_range(0.0..std::f64::consts::TAU);
    Ok(TrialDraw {
        ss,
        st,
        pa,
        phi_s,
        theta0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub rate_bps_hz: f64,
    /// Monte Carlo interference estimate.
    pub interference_w: f64,
    /// `(l_stᵀ|z|)²`, the deterministic bound the constraint is written on.
    pub interference_bound_w: f64,
    pub input_power_w: f64,
}

/// One output row: a scheme's statistics at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_variable: SweepVariable,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub mean_rate: f64,
    pub stderr_rate: f64,
    pub mean_interference_w: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub sweep_variable: SweepVariable,
    pub interference_eps_w: Vec<f64>,
    /// Ordered by sweep value, then by scheme.
    pub rows: Vec<SweepRow>,
    /// Ordered by trial, sweep value, scheme; empty unless requested.
    pub records: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn row(&self, sweep_value: f64, scheme: Scheme) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.scheme == scheme)
    }

    /// Mean rates of one scheme in sweep order.
    pub fn mean_rates(&self, scheme: Scheme) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| r.mean_rate)
            .collect()
    }
}

/// Evaluates a beamformer through the PA over the realized satellite link.
fn score(
    draw: &TrialDraw,
    spec: &ProblemSpec,
    weights: &BeamWeights,
    h_ss: &[Complex64],
    phase_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, f64)> {
    let z = amplify(&draw.pa, weights, draw.theta0)?;
    let rate = link_rate(h_ss, &z, spec.noise_sigma2);
    let est = estimate_interference(&draw.st, weights, &draw.pa, draw.theta0, phase_samples, rng)?;
    let bound: f64 = spec
        .l_st
        .iter()
        .zip(&z)
        .map(|(l, z)| l * z.norm())
        .sum::<f64>()
        .powi(2);
    Ok((rate, est.mean, bound))
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<TrialRecord>> {
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let draw = draw_trial(&mut rng, cfg)?;
    let h_ss = realize(&draw.ss, draw.phi_s);
    let l_ss = collapse(&draw.ss);
    let l_st = collapse(&draw.st);
    let noise = dbm_to_watts(cfg.noise_dbm);
    let mut out = Vec::with_capacity(cfg.sweep_values.len() * Scheme::ALL.len());
    for &value in &cfg.sweep_values {
        let (power_limit, eps) = cfg.operating_point(value);
        let spec = ProblemSpec {
            l_ss: l_ss.clone(),
            l_st: l_st.clone(),
            pa: draw.pa.clone(),
            power_limit,
            interference_eps: eps,
            noise_sigma2: noise,
            theta0: draw.theta0,
        };
        for scheme in Scheme::ALL {
            let weights = match scheme {
                Scheme::Proposed => {
                    let report = beamformer::solve(&spec)?;
                    if report.status != SolveStatus::Optimal {
                        return Err(Error::NotConverged(format!(
                            "trial {trial} at {} = {value}",
                            cfg.sweep_variable.as_str()
                        )));
                    }
                    report.weights
                }
                Scheme::MrtScaled => BaselineKind::MrtScaled.design(&spec, &h_ss)?,
                Scheme::LinearIgnorantCapped => {
                    BaselineKind::LinearIgnorantCapped.design(&spec, &h_ss)?
                }
            };
            let (rate, interference, bound) =
                score(&draw, &spec, &weights, &h_ss, cfg.phase_samples, &mut rng)?;
            out.push(TrialRecord {
                trial,
                sweep_value: value,
                scheme,
                rate_bps_hz: rate,
                interference_w: interference,
                interference_bound_w: bound,
                input_power_w: weights.input_power(),
            });
        }
    }
    Ok(out)
}

/// Runs every trial at every sweep value for every scheme.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let per_trial: Vec<Vec<TrialRecord>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (k, &value) in cfg.sweep_values.iter().enumerate() {
        for (s, scheme) in Scheme::ALL.into_iter().enumerate() {
            let idx = k * Scheme::ALL.len() + s;
            let rates: Vec<f64> = per_trial.iter().map(|t| t[idx].rate_bps_hz).collect();
            let interference: Vec<f64> = per_trial.iter().map(|t| t[idx].interference_w).collect();
            let (mean_rate, stderr_rate) = mean_and_stderr(&rates);
            let (mean_interference_w, _) = mean_and_stderr(&interference);
            rows.push(SweepRow {
                sweep_variable: cfg.sweep_variable,
                sweep_value: value,
                scheme,
                mean_rate,
                stderr_rate,
                mean_interference_w,
                trials: cfg.trials,
            });
        }
    }
    let records = if cfg.keep_trials {
        per_trial.into_iter().flatten().collect()
    } else {
        Vec::new()
    };
    Ok(SweepResult {
        sweep_variable: cfg.sweep_variable,
        interference_eps_w: cfg
            .sweep_values
            .iter()
            .map(|&v| cfg.operating_point(v).1)
            .collect(),
        rows,
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaCurvePoint {
    pub r: f64,
    pub am_am: f64,
    pub am_pm: f64,
}

/// Samples the AM/AM and AM/PM curves at `r_min + k·step` up to `r_max`.
pub fn pa_curve(p: &SalehParams, r_min: f64, r_max: f64, step: f64) -> Result<Vec<PaCurvePoint>> {
    p.validate()?;
    if !(r_min.is_finite() && r_max.is_finite() && step.is_finite()) {
        return Err(Error::Config("curve range must be finite".into()));
    }
    if r_min < 0.0 || step <= 0.0 || r_max <= r_min {
        return Err(Error::Config(
            "curve range needs 0 ≤ r_min < r_max and step > 0".into(),
        ));
    }
    let n = ((r_max - r_min) / step + 1e-9).floor() as usize;
    if n < 1 {
        return Err(Error::Config(
            "curve range must hold at least two points".into(),
        ));
    }
    (0..=n)
        .map(|k| {
            let r = r_min + k as f64 * step;
            Ok(PaCurvePoint {
                r,
                am_am: am_am(p, r)?,
                am_pm: am_pm(p, r)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            antennas: 4,
            trials: 6,
            sweep_variable: SweepVariable::EpsDbm,
            sweep_values: vec![-115.0, -105.0],
            power_limit_dbw: Some(12.0),
            eps_dbm: None,
            noise_dbm: -107.0,
            saleh: SalehDistribution::default(),
            channel: ChannelConfig::default(),
            seed: 3,
            phase_samples: 4,
            keep_trials: true,
        }
    }

    #[test]
    fn saleh_draw_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fixed = SalehDistribution {
            alpha_jitter: 0.0,
            beta_jitter: 0.0,
            alpha_phi_jitter: 0.0,
            beta_phi_jitter: 0.0,
            ..SalehDistribution::default()
        };
        let bank = draw_saleh_bank(&mut rng, 5, &fixed).unwrap();
        assert!(bank.iter().all(|p| *p == fixed.base()));

        let d = SalehDistribution::default();
        let bank = draw_saleh_bank(&mut rng, 200, &d).unwrap();
        for p in bank.iter() {
            assert!((0.9445..=1.0445).contains(&p.alpha));
            assert!((0.5138..=0.6138).contains(&p.beta));
            assert!((4.0033..=5.0033).contains(&p.alpha_phi));
            assert!((9.1040..=10.1040).contains(&p.beta_phi));
        }
        let a = draw_saleh_bank(&mut ChaCha8Rng::seed_from_u64(5), 16, &d).unwrap();
        let b = draw_saleh_bank(&mut ChaCha8Rng::seed_from_u64(5), 16, &d).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn interference_estimate_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let st = LargeScaleChannel::new(1.0, 1.0, vec![0.25, 1.0]).unwrap();
        let pa = PaBank::uniform(SalehParams::new(1.0, 1.0, 2.0, 3.0).unwrap(), 2).unwrap();
        let zero =
            estimate_interference(&st, &BeamWeights::zeros(2), &pa, 0.0, 8, &mut rng).unwrap();
        assert_eq!(zero.mean, 0.0);

        let r = vec![0.4, 0.9];
        let phases = beamformer::recover_phases(&pa, &r, 0.7).unwrap();
        let w = BeamWeights::new(r.clone(), phases);
        let est = estimate_interference(&st, &w, &pa, 0.7, 32, &mut rng).unwrap();
        let zbar: Vec<f64> = r.iter().map(|r| am_am(&pa[0], *r).unwrap()).collect();
        let bound = (0.5 * zbar[0] + zbar[1]).powi(2);
        assert!((est.mean - bound).abs() <= 1e-12 * bound);
        assert!(est.std_err <= 1e-12 * bound);

        let w = BeamWeights::new(r, vec![0.0, 2.5]);
        let est = estimate_interference(&st, &w, &pa, 0.0, 32, &mut rng).unwrap();
        assert!(est.mean <= bound);
        assert!(estimate_interference(&st, &w, &pa, 0.0, 0, &mut rng).is_err());
    }

    #[test]
    fn sweep_shapes_and_determinism() {
        let cfg = small_config();
        let a = run_sweep(&cfg).unwrap();
        assert_eq!(a.rows.len(), 2 * 3);
        assert_eq!(a.records.len(), cfg.trials * 2 * 3);
        assert!(a.rows.iter().all(|r| r.mean_rate >= 0.0 && r.trials == 6));
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        let proposed = a.mean_rates(Scheme::Proposed);
        assert!(proposed[1] >= proposed[0] - 1e-9);
    }

    #[test]
    fn proposed_dominates_mrt_per_trial() {
        let cfg = small_config();
        let res = run_sweep(&cfg).unwrap();
        for chunk in res.records.chunks(3) {
            assert_eq!(chunk[0].scheme, Scheme::Proposed);
            assert_eq!(chunk[1].scheme, Scheme::MrtScaled);
            assert!(chunk[0].rate_bps_hz >= chunk[1].rate_bps_hz - 1e-6);
        }
    }

    #[test]
    fn single_point_sweep() {
        let cfg = ExperimentConfig {
            trials: 1,
            sweep_values: vec![-107.0],
            keep_trials: false,
            ..small_config()
        };
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.rows.len(), 3);
        assert!(res.records.is_empty());
        assert_eq!(res, run_sweep(&cfg).unwrap());
    }

    #[test]
    fn config_violations_listed() {
        let mut cfg = small_config();
        cfg.trials = 0;
        cfg.sweep_values = vec![1.0, 0.0];
        cfg.power_limit_dbw = None;
        let v = cfg.violations();
        assert!(v.contains(&"trials must be ≥ 1".to_string()));
        assert!(v.iter().any(|m| m.contains("ascending")));
        assert!(v.iter().any(|m| m.contains("power_limit_dbw")));
        assert!(run_sweep(&cfg).is_err());
        cfg.sweep_values.clear();
        assert!(cfg.violations().iter().any(|m| m.contains("empty")));
    }

    #[test]
    fn pa_curve_examples() {
        let d = SalehDistribution::default().base();
        let curve = pa_curve(&d, 0.0, 3.0, 0.01).unwrap();
        assert_eq!(curve.len(), 301);
        assert!(curve.windows(2).all(|w| w[1].r > w[0].r));
        let argmax = curve
            .iter()
            .max_by(|a, b| a.am_am.total_cmp(&b.am_am))
            .unwrap();
        assert!((argmax.r - d.r_sat()).abs() <= 0.01);

        let unit = SalehParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let curve = pa_curve(&unit, 0.0, 2.0, 0.5).unwrap();
        assert_eq!(curve[2].r, 1.0);
        assert_eq!(curve[2].am_am, 0.5);
        assert!(pa_curve(&unit, 1.0, 1.0, 0.1).is_err());
        assert!(pa_curve(&unit, 0.0, 1.0, 0.0).is_err());
        assert!(pa_curve(&unit, 0.0, 0.05, 0.1).is_err());
    }
}
