//! TOML configuration document. Every physical quantity carries its unit in
//! the key name and is converted to linear watts here.

use std::path::Path;

use serde::{Deserialize, Serialize};

use satbeam_core::channel::{collapse, AngleRange};
use satbeam_core::sim::{self, ExperimentConfig, SweepVariable};
use satbeam_core::units::{dbm_to_watts, dbw_to_watts};
use satbeam_core::{ChannelConfig, PaBank, ProblemSpec, SalehDistribution, SalehParams};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// Integer rather than unsigned so that negative values reach validation.
    pub antennas: i64,
    pub noise_dbm: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            antennas: 16,
            noise_dbm: -107.0,
        }
    }
}

/// Per-chain Saleh parameters are `base + jitter·U[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SalehSection {
    pub alpha_base: f64,
    pub alpha_jitter: f64,
    pub beta_base: f64,
    pub beta_jitter: f64,
    pub alpha_phi_base: f64,
    pub alpha_phi_jitter: f64,
    pub beta_phi_base: f64,
    pub beta_phi_jitter: f64,
}

impl Default for SalehSection {
    fn default() -> Self {
        let d = SalehDistribution::default();
        Self {
            alpha_base: d.alpha_base,
            alpha_jitter: d.alpha_jitter,
            beta_base: d.beta_base,
            beta_jitter: d.beta_jitter,
            alpha_phi_base: d.alpha_phi_base,
            alpha_phi_jitter: d.alpha_phi_jitter,
            beta_phi_base: d.beta_phi_base,
            beta_phi_jitter: d.beta_phi_jitter,
        }
    }
}

impl SalehSection {
    pub fn distribution(&self) -> SalehDistribution {
        SalehDistribution {
            alpha_base: self.alpha_base,
            alpha_jitter: self.alpha_jitter,
            beta_base: self.beta_base,
            beta_jitter: self.beta_jitter,
            alpha_phi_base: self.alpha_phi_base,
            alpha_phi_jitter: self.alpha_phi_jitter,
            beta_phi_base: self.beta_phi_base,
            beta_phi_jitter: self.beta_phi_jitter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub path_loss_ss_db: f64,
    pub path_loss_st_db: f64,
    pub rain_fade_mean_db: f64,
    pub rain_fade_std_db: f64,
    pub peak_gain_dbi: f64,
    pub beamwidth_3db_deg: f64,
    /// `[min, max]` off-axis angle of the satellite terminal.
    pub ss_off_axis_deg: [f64; 2],
    /// `[min, max]` off-axis angle of the terrestrial terminal.
    pub st_off_axis_deg: [f64; 2],
}

impl Default for ChannelSection {
    fn default() -> Self {
        let c = ChannelConfig::default();
        Self {
            path_loss_ss_db: c.path_loss_ss_db,
            path_loss_st_db: c.path_loss_st_db,
            rain_fade_mean_db: c.rain_fade_mean_db,
            rain_fade_std_db: c.rain_fade_std_db,
            peak_gain_dbi: c.peak_gain_dbi,
            beamwidth_3db_deg: c.beamwidth_3db_deg,
            ss_off_axis_deg: [c.ss_off_axis.min_deg, c.ss_off_axis.max_deg],
            st_off_axis_deg: [c.st_off_axis.min_deg, c.st_off_axis.max_deg],
        }
    }
}

impl ChannelSection {
    pub fn channel_config(&self) -> ChannelConfig {
        ChannelConfig {
            path_loss_ss_db: self.path_loss_ss_db,
            path_loss_st_db: self.path_loss_st_db,
            rain_fade_mean_db: self.rain_fade_mean_db,
            rain_fade_std_db: self.rain_fade_std_db,
            peak_gain_dbi: self.peak_gain_dbi,
            beamwidth_3db_deg: self.beamwidth_3db_deg,
            ss_off_axis: AngleRange {
                min_deg: self.ss_off_axis_deg[0],
                max_deg: self.ss_off_axis_deg[1],
            },
            st_off_axis: AngleRange {
                min_deg: self.st_off_axis_deg[0],
                max_deg: self.st_off_axis_deg[1],
            },
        }
    }
}

/// Explicit per-chain PA parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaArrays {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha_phi: Vec<f64>,
    pub beta_phi: Vec<f64>,
}

/// A single solve. With `l_ss`/`l_st` absent, an instance is drawn from the
/// `[channel]` and `[saleh]` distributions using `seed`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub power_limit_dbw: Option<f64>,
    pub power_limit_w: Option<f64>,
    pub eps_dbm: Option<f64>,
    pub eps_w: Option<f64>,
    pub theta0_rad: Option<f64>,
    pub seed: Option<u64>,
    pub l_ss: Option<Vec<f64>>,
    pub l_st: Option<Vec<f64>>,
    pub pa: Option<PaArrays>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub trials: i64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_phase_samples")]
    pub phase_samples: i64,
    pub sweep_variable: SweepVariable,
    /// In the unit named by `sweep_variable`.
    pub sweep_values: Vec<f64>,
    pub power_limit_dbw: Option<f64>,
    pub eps_dbm: Option<f64>,
}

fn default_seed() -> u64 {
    1
}

fn default_phase_samples() -> i64 {
    16
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub saleh: SalehSection,
    #[serde(default)]
    pub channel: ChannelSection,
    pub problem: Option<ProblemSection>,
    pub experiment: Option<ExperimentSection>,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    fn antennas(&self) -> usize {
        self.system.antennas.max(0) as usize
    }

    /// Every invariant violation in the document, without running anything.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.system.antennas < 1 {
            out.push(format!(
                "system.antennas must be ≥ 1, got {}",
                self.system.antennas
            ));
        }
        if !self.system.noise_dbm.is_finite() {
            out.push("system.noise_dbm must be finite".into());
        }
        out.extend(self.saleh.distribution().violations());
        out.extend(self.channel.channel_config().violations());
        if let Some(p) = &self.problem {
            out.extend(self.problem_violations(p));
        }
        if let Some(e) = &self.experiment {
            out.extend(self.experiment_violations(e));
        }
        out
    }

    fn problem_violations(&self, p: &ProblemSection) -> Vec<String> {
        let mut out = Vec::new();
        let m = self.antennas();
        match (p.power_limit_dbw, p.power_limit_w) {
            (Some(_), Some(_)) => {
                out.push("problem: set only one of power_limit_dbw, power_limit_w".into())
            }
            (None, None) => {
                out.push("problem: power_limit_dbw or power_limit_w is required".into())
            }
            (Some(v), None) if !v.is_finite() => {
                out.push("problem.power_limit_dbw must be finite".into())
            }
            (None, Some(v)) if !(v.is_finite() && v > 0.0) => {
                out.push(format!("problem.power_limit_w must be > 0, got {v}"))
            }
            _ => {}
        }
        match (p.eps_dbm, p.eps_w) {
            (Some(_), Some(_)) => out.push("problem: set only one of eps_dbm, eps_w".into()),
            (None, None) => out.push("problem: eps_dbm or eps_w is required".into()),
            (Some(v), None) if !v.is_finite() => out.push("problem.eps_dbm must be finite".into()),
            (None, Some(v)) if !(v.is_finite() && v > 0.0) => {
                out.push(format!("problem.eps_w must be > 0, got {v}"))
            }
            _ => {}
        }
        if p.theta0_rad.is_some_and(|t| !t.is_finite()) {
            out.push("problem.theta0_rad must be finite".into());
        }
        if p.l_ss.is_some() != p.l_st.is_some() {
            out.push("problem: l_ss and l_st must be given together".into());
        }
        let mut check_len = |name: &str, len: usize| {
            if len != m {
                out.push(format!(
                    "problem.{name} has length {len}, but system.antennas = {m}"
                ));
            }
        };
        for (name, v) in [("l_ss", &p.l_ss), ("l_st", &p.l_st)] {
            if let Some(v) = v {
                check_len(name, v.len());
            }
        }
        if let Some(pa) = &p.pa {
            for (name, v) in [
                ("pa.alpha", &pa.alpha),
                ("pa.beta", &pa.beta),
                ("pa.alpha_phi", &pa.alpha_phi),
                ("pa.beta_phi", &pa.beta_phi),
            ] {
                check_len(name, v.len());
            }
        }
        for (name, v) in [("l_ss", &p.l_ss), ("l_st", &p.l_st)] {
            if v.as_ref()
                .is_some_and(|v| v.iter().any(|x| !(x.is_finite() && *x >= 0.0)))
            {
                out.push(format!("problem.{name} entries must be finite and ≥ 0"));
            }
        }
        if let Some(pa) = &p.pa {
            for i in 0..pa.alpha.len() {
                let (Some(a), Some(b), Some(ap), Some(bp)) = (
                    pa.alpha.get(i),
                    pa.beta.get(i),
                    pa.alpha_phi.get(i),
                    pa.beta_phi.get(i),
                ) else {
                    continue;
                };
                if let Err(e) = SalehParams::new(*a, *b, *ap, *bp) {
                    out.push(format!("problem.pa[{i}]: {e}"));
                }
            }
        }
        out
    }

    fn experiment_violations(&self, e: &ExperimentSection) -> Vec<String> {
        let mut out = Vec::new();
        if e.trials < 1 {
            out.push(format!("trials must be ≥ 1, got {}", e.trials));
        }
        if e.phase_samples < 1 {
            out.push(format!(
                "phase_samples must be ≥ 1, got {}",
                e.phase_samples
            ));
        }
        // remaining checks are shared with the engine
        let cfg = self.experiment_from(e, e.seed);
        out.extend(
            cfg.violations()
                .into_iter()
                .filter(|v| !v.starts_with("trials") && !v.starts_with("phase_samples"))
                .filter(|v| !v.starts_with("antennas") && !v.starts_with("saleh."))
                .filter(|v| !v.starts_with("channel.") && !v.starts_with("noise_dbm"))
                .map(|v| format!("experiment: {v}")),
        );
        out
    }

    fn experiment_from(&self, e: &ExperimentSection, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            antennas: self.antennas(),
            trials: e.trials.max(0) as usize,
            sweep_variable: e.sweep_variable,
            sweep_values: e.sweep_values.clone(),
            power_limit_dbw: e.power_limit_dbw,
            eps_dbm: e.eps_dbm,
            noise_dbm: self.system.noise_dbm,
            saleh: self.saleh.distribution(),
            channel: self.channel.channel_config(),
            seed,
            phase_samples: e.phase_samples.max(0) as usize,
            keep_trials: false,
        }
    }

    fn check(&self) -> Result<(), CliError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(v))
        }
    }

    /// The `[experiment]` section as an engine configuration.
    pub fn experiment(&self, seed_override: Option<u64>) -> Result<ExperimentConfig, CliError> {
        let e = self
            .experiment
            .as_ref()
            .ok_or_else(|| CliError::Invalid(vec!["missing [experiment] section".into()]))?;
        self.check()?;
        Ok(self.experiment_from(e, seed_override.unwrap_or(e.seed)))
    }

    /// The `[problem]` section as a solver input, drawing the channel and PAs
    /// when they are not given explicitly.
    pub fn problem(&self, seed_override: Option<u64>) -> Result<ProblemSpec, CliError> {
        let p = self
            .problem
            .as_ref()
            .ok_or_else(|| CliError::Invalid(vec!["missing [problem] section".into()]))?;
        self.check()?;
        let m = self.antennas();
        let power_limit = p
            .power_limit_w
            .unwrap_or_else(|| dbw_to_watts(p.power_limit_dbw.unwrap_or(f64::NAN)));
        let interference_eps = p
            .eps_w
            .unwrap_or_else(|| dbm_to_watts(p.eps_dbm.unwrap_or(f64::NAN)));
        let noise_sigma2 = dbm_to_watts(self.system.noise_dbm);

        let seed = seed_override.or(p.seed).unwrap_or(0);
        let draw = {
            let cfg = ExperimentConfig {
                antennas: m,
                trials: 1,
                sweep_variable: SweepVariable::EpsDbm,
                sweep_values: vec![0.0],
                power_limit_dbw: Some(0.0),
                eps_dbm: None,
                noise_dbm: self.system.noise_dbm,
                saleh: self.saleh.distribution(),
                channel: self.channel.channel_config(),
                seed,
                phase_samples: 1,
                keep_trials: false,
            };
            sim::draw_trial(&mut sim::trial_rng(seed, 0), &cfg)?
        };
        let (l_ss, l_st) = match (&p.l_ss, &p.l_st) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            _ => (collapse(&draw.ss), collapse(&draw.st)),
        };
        let pa = match &p.pa {
            Some(arr) => PaBank::new(
                (0..m)
                    .map(|i| {
                        SalehParams::new(
                            arr.alpha[i],
                            arr.beta[i],
                            arr.alpha_phi[i],
                            arr.beta_phi[i],
                        )
                    })
                    .collect::<Result<_, _>>()?,
            )?,
            None => draw.pa,
        };
        Ok(ProblemSpec {
            l_ss,
            l_st,
            pa,
            power_limit,
            interference_eps,
            noise_sigma2,
            theta0: p.theta0_rad.unwrap_or(draw.theta0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
[experiment]
trials = 4
sweep_variable = "eps_dbm"
sweep_values = [-110.0, -100.0]
power_limit_dbw = 12.0
"#;

    #[test]
    fn defaults_fill_missing_sections() {
        let doc = ConfigDoc::parse(SWEEP).unwrap();
        assert_eq!(doc.system.antennas, 16);
        assert_eq!(doc.saleh.alpha_base, 0.9445);
        assert!(doc.violations().is_empty());
        let cfg = doc.experiment(Some(9)).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.trials, 4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ConfigDoc::parse("[system]\nantenas = 3\nnoise_dbm = -100.0\n").unwrap_err();
        assert!(err.to_string().contains("antenas"), "{err}");
    }

    #[test]
    fn unit_conversion_at_parse_time() {
        let doc = ConfigDoc::parse(
            "[system]\nantennas = 1\nnoise_dbm = -100.0\n[problem]\npower_limit_dbw = 10.0\neps_dbm = -90.0\nl_ss = [1.0]\nl_st = [0.5]\n",
        )
        .unwrap();
        let spec = doc.problem(None).unwrap();
        assert!((spec.power_limit - 10.0).abs() < 1e-12);
        assert!((spec.interference_eps - 1e-12).abs() < 1e-24);
        assert!((spec.noise_sigma2 - 1e-13).abs() < 1e-25);
    }

    #[test]
    fn every_violation_is_listed() {
        let doc = ConfigDoc::parse(
            r#"
[system]
antennas = 3
noise_dbm = -107.0
[problem]
power_limit_w = -1.0
eps_dbm = -107.0
l_ss = [1.0, 2.0]
l_st = [1.0, 2.0, 3.0]
[experiment]
trials = -5
sweep_variable = "power_dbw"
sweep_values = []
"#,
        )
        .unwrap();
        let v = doc.violations();
        assert!(v.iter().any(|s| s.contains("trials must be ≥ 1")), "{v:?}");
        assert!(
            v.iter().any(|s| s.contains("problem.l_ss has length 2")),
            "{v:?}"
        );
        assert!(
            v.iter().any(|s| s.contains("problem.power_limit_w")),
            "{v:?}"
        );
        assert!(
            v.iter()
                .any(|s| s.contains("sweep values must not be empty")),
            "{v:?}"
        );
        assert!(v.iter().any(|s| s.contains("eps_dbm must be set")), "{v:?}");
    }

    #[test]
    fn sampled_problem_is_reproducible() {
        let text = "[problem]\npower_limit_dbw = 12.0\neps_dbm = -107.0\n";
        let doc = ConfigDoc::parse(text).unwrap();
        let a = doc.problem(Some(3)).unwrap();
        let b = doc.problem(Some(3)).unwrap();
        let c = doc.problem(Some(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.l_ss, c.l_ss);
        assert_eq!(a.antennas(), 16);
    }
}
