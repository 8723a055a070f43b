//! Composite multi-beam satellite channel.
//!
//! A link is `h = √g · ξ^{1/2} · e^{-jφ} · b^{1/2}`: free-space loss `g`,
//! rain attenuation `ξ`, per-beam power gains `b`, and one common feed phase
//! `φ`. The transmitter only knows the large-scale part
//! `l = √g · ξ^{1/2} · b^{1/2}`.

pub mod bessel;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, linear_to_db};

/// Argument scale placing the pattern's half-power point at `u = 2.07123`.
pub const PATTERN_U_3DB: f64 = 2.07123;

/// Large-scale parameters of one link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "LinkRecord", try_from = "LinkRecord")]
pub struct LargeScaleChannel {
    /// Linear free-space power gain.
    pub path_loss_g: f64,
    /// Linear rain power attenuation.
    pub rain_fade_xi: f64,
    /// Linear per-beam power gains.
    pub beam_gains: Vec<f64>,
}

// On-disk form: path loss in dB, everything else linear.
#[derive(Serialize, Deserialize)]
struct LinkRecord {
    g_db: f64,
    xi: f64,
    beam_gains: Vec<f64>,
}

impl From<LargeScaleChannel> for LinkRecord {
    fn from(c: LargeScaleChannel) -> Self {
        Self {
            g_db: linear_to_db(c.path_loss_g),
            xi: c.rain_fade_xi,
            beam_gains: c.beam_gains,
        }
    }
}

impl TryFrom<LinkRecord> for LargeScaleChannel {
    type Error = Error;

    fn try_from(r: LinkRecord) -> Result<Self> {
        Self::new(db_to_linear(r.g_db), r.xi, r.beam_gains)
    }
}

impl LargeScaleChannel {
    pub fn new(path_loss_g: f64, rain_fade_xi: f64, beam_gains: Vec<f64>) -> Result<Self> {
        if !(path_loss_g.is_finite() && path_loss_g > 0.0) {
            return Err(Error::Parameter(format!(
                "path loss must be > 0, got {path_loss_g}"
            )));
        }
        if !(rain_fade_xi.is_finite() && rain_fade_xi > 0.0) {
            return Err(Error::Parameter(format!(
                "rain fade must be > 0, got {rain_fade_xi}"
            )));
        }
        if let Some(b) = beam_gains.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::Parameter(format!("beam gains must be ≥ 0, got {b}")));
        }
        Ok(Self {
            path_loss_g,
            rain_fade_xi,
            beam_gains,
        })
    }

    pub fn antennas(&self) -> usize {
        self.beam_gains.len()
    }
}

/// Common feed phase of one link, in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallScalePhase(pub f64);

impl SmallScalePhase {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self(rng.gen_range(0.0..std::f64::consts::TAU))
    }
}

/// Where a user terminal sits relative to each beam's boresight.
#[derive(Debug, Clone, PartialEq)]
pub struct UtGeometry {
    /// Off-axis angle to the terminal for every beam, radians.
    pub off_axis_angles: Vec<f64>,
    /// One-sided half-power beamwidth, radians.
    pub angle_3db: f64,
    /// Linear boresight gain.
    pub peak_gain: f64,
}

/// Tapered-aperture multi-beam pattern
/// `G·(J₁(u)/(2u) + 36·J₃(u)/u³)²`, `u = 2.07123·sin φ / sin φ_3dB`.
///
/// The bracket tends to `1/4 + 36/48 = 1` as `u → 0`, so boresight gain is
/// exactly `peak_gain`.
pub fn beam_gain(angle: f64, angle_3db: f64, peak_gain: f64) -> f64 {
    let u = PATTERN_U_3DB * angle.sin() / angle_3db.sin();
    let bracket = 0.5 * bessel::j_scaled(1, u) + 36.0 * bessel::j_scaled(3, u);
    peak_gain * bracket * bracket
}

/// Per-beam power gains toward one terminal.
pub fn beam_gain_pattern(geom: &UtGeometry) -> Vec<f64> {
    geom.off_axis_angles
        .iter()
        .map(|&a| beam_gain(a, geom.angle_3db, geom.peak_gain))
        .collect()
}

/// Large-scale gain vector `l_i = √(g·ξ·b_i)`.
pub fn collapse(ch: &LargeScaleChannel) -> Vec<f64> {
    let scale = ch.path_loss_g * ch.rain_fade_xi;
    ch.beam_gains.iter().map(|b| (scale * b).sqrt()).collect()
}

/// Full channel vector for a given feed phase, `h = l·e^{-jφ}`.
pub fn realize(ch: &LargeScaleChannel, phi: SmallScalePhase) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, -phi.0);
    collapse(ch).into_iter().map(|l| rot * l).collect()
}

/// `hᴴ z`.
pub fn inner(h: &[Complex64], z: &[Complex64]) -> Complex64 {
    h.iter().zip(z).map(|(h, z)| h.conj() * z).sum()
}

/// Inclusive range of off-axis angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub min_deg: f64,
    pub max_deg: f64,
}

/// Distribution of the large-scale parameters of both links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub path_loss_ss_db: f64,
    pub path_loss_st_db: f64,
    /// Mean rain attenuation in dB (positive is loss).
    pub rain_fade_mean_db: f64,
    /// Standard deviation of the rain attenuation in dB; zero fixes `ξ`.
    pub rain_fade_std_db: f64,
    pub peak_gain_dbi: f64,
    pub beamwidth_3db_deg: f64,
    /// Satellite terminal's off-axis angle to each beam.
    pub ss_off_axis: AngleRange,
    /// Terrestrial terminal's off-axis angle to each beam.
    pub st_off_axis: AngleRange,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            path_loss_ss_db: -210.0,
            path_loss_st_db: -210.0,
            rain_fade_mean_db: 0.0,
            rain_fade_std_db: 0.0,
            peak_gain_dbi: 52.0,
            beamwidth_3db_deg: 0.4,
            ss_off_axis: AngleRange {
                min_deg: 0.0,
                max_deg: 1.0,
            },
            st_off_axis: AngleRange {
                min_deg: 0.0,
                max_deg: 1.0,
            },
        }
    }
}

impl ChannelConfig {
    /// Every violated range, as human-readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("path_loss_ss_db", self.path_loss_ss_db),
            ("path_loss_st_db", self.path_loss_st_db),
            ("rain_fade_mean_db", self.rain_fade_mean_db),
            ("peak_gain_dbi", self.peak_gain_dbi),
        ] {
            if !v.is_finite() {
                out.push(format!("channel.{name} must be finite"));
            }
        }
        if !(self.rain_fade_std_db.is_finite() && self.rain_fade_std_db >= 0.0) {
            out.push("channel.rain_fade_std_db must be ≥ 0".into());
        }
        if !(self.beamwidth_3db_deg > 0.0 && self.beamwidth_3db_deg < 90.0) {
            out.push("channel.beamwidth_3db_deg must be in (0, 90)".into());
        }
        for (name, r) in [
            ("ss_off_axis", self.ss_off_axis),
            ("st_off_axis", self.st_off_axis),
        ] {
            if !(r.min_deg >= 0.0 && r.max_deg >= r.min_deg && r.max_deg <= 90.0) {
                out.push(format!(
                    "channel.{name} must satisfy 0 ≤ min_deg ≤ max_deg ≤ 90"
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().first() {
            None => Ok(()),
            Some(v) => Err(Error::Config(v.clone())),
        }
    }
}

fn draw_link<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    path_loss_db: f64,
    angles: AngleRange,
    cfg: &ChannelConfig,
) -> Result<LargeScaleChannel> {
    let geom = UtGeometry {
        off_axis_angles: (0..m)
            .map(|_| {
                let deg = if angles.max_deg > angles.min_deg {
                    rng.gen_range(angles.min_deg..=angles.max_deg)
                } else {
                    angles.min_deg
                };
                deg.to_radians()
            })
            .collect(),
        angle_3db: cfg.beamwidth_3db_deg.to_radians(),
        peak_gain: db_to_linear(cfg.peak_gain_dbi),
    };
    let fade_db = if cfg.rain_fade_std_db > 0.0 {
        Normal::new(cfg.rain_fade_mean_db, cfg.rain_fade_std_db)
            .map_err(|e| Error::Config(e.to_string()))?
            .sample(rng)
    } else {
        cfg.rain_fade_mean_db
    };
    LargeScaleChannel::new(
        db_to_linear(path_loss_db),
        db_to_linear(-fade_db),
        beam_gain_pattern(&geom),
    )
}

/// Draws the satellite-terminal and terrestrial-terminal links.
pub fn sample_scenario<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    cfg: &ChannelConfig,
) -> Result<(LargeScaleChannel, LargeScaleChannel)> {
    if m == 0 {
        return Err(Error::Config("antenna count must be ≥ 1".into()));
    }
    cfg.validate()?;
    let ss = draw_link(rng, m, cfg.path_loss_ss_db, cfg.ss_off_axis, cfg)?;
    let st = draw_link(rng, m, cfg.path_loss_st_db, cfg.st_off_axis, cfg)?;
    Ok((ss, st))
}

/// A generated pair of links together with the seed that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelScenario {
    pub seed: u64,
    pub ss: LargeScaleChannel,
    pub st: LargeScaleChannel,
}

impl ChannelScenario {
    pub fn generate(seed: u64, m: usize, cfg: &ChannelConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ss, st) = sample_scenario(&mut rng, m, cfg)?;
        Ok(Self { seed, ss, st })
    }
}
