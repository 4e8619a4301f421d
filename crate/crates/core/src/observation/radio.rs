//! Outage-rate rewards and penalties for spectrum access, and the square-cell topology
//! that derives per-channel SNRs from a two-ray path-loss law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ExponentialSensingModel;
use crate::error::{Error, Result};
use crate::model::ResourceSpec;

const BOLTZMANN: f64 = 1.380649e-23;

/// Average link SNRs (linear) and outage targets of one channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadioLinkParams {
    pub gamma_p: f64,
    pub gamma_s: f64,
    pub xi: f64,
    pub zeta: f64,
    pub pout_p: f64,
    pub pout_s: f64,
    pub w0: f64,
}

impl RadioLinkParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma_p", self.gamma_p), ("gamma_s", self.gamma_s), ("xi", self.xi), ("zeta", self.zeta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be a finite SNR >= 0, got {v}")));
            }
        }
        for (name, v) in [("pout_p", self.pout_p), ("pout_s", self.pout_s)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(self.w0 > 0.0 && self.w0.is_finite()) {
            return Err(Error::domain(format!("w0 must be positive, got {}", self.w0)));
        }
        Ok(())
    }
}

/// Rate `W0·log2(1 − γ ln(1−p))` sustained with outage probability `p`.
fn outage_capacity(gamma: f64, pout: f64, w0: f64) -> f64 {
    w0 * (-gamma * (-pout).ln_1p()).ln_1p() / std::f64::consts::LN_2
}

/// Reward per remaining slot: the secondary link's outage rate.
pub fn radio_reward(p: &RadioLinkParams) -> Result<f64> {
    p.validate()?;
    Ok((1.0 - p.pout_s) * outage_capacity(p.gamma_s, p.pout_s, p.w0))
}

/// Outage probability of the primary link once secondary interference of mean SNR `xi`
/// adds to the noise.
pub fn interference_outage(pout: f64, xi: f64) -> f64 {
    let t = -xi * (-pout).ln_1p();
    (pout + t) / (1.0 + t)
}

/// Penalty per remaining slot: the primary link's loss in outage rate.
pub fn radio_penalty(p: &RadioLinkParams) -> Result<f64> {
    p.validate()?;
    let outage = interference_outage(p.pout_p, p.xi);
    Ok((outage - p.pout_p) * outage_capacity(p.gamma_p, p.pout_p, p.w0))
}

fn default_side() -> f64 {
    500.0
}
fn default_primary_power() -> f64 {
    10.0
}
fn default_primary_height() -> f64 {
    10.0
}
fn default_secondary_power() -> f64 {
    5.0
}
fn default_secondary_height() -> f64 {
    3.0
}
fn default_receiver_height() -> f64 {
    1.0
}
fn default_gain() -> f64 {
    2e-4
}
fn default_bandwidth() -> f64 {
    5e6
}
fn default_temperature() -> f64 {
    290.0
}
fn default_pout() -> f64 {
    0.1
}
fn default_w0() -> f64 {
    20.0
}
fn default_prior() -> f64 {
    0.5
}
fn default_min_distance() -> f64 {
    50.0
}
fn default_channels() -> usize {
    20
}

/// Geometry and radio parameters of the four-primary square cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    #[serde(default = "default_side")]
    pub side_m: f64,
    #[serde(default = "default_primary_power")]
    pub primary_power_dbm: f64,
    #[serde(default = "default_primary_height")]
    pub primary_height_m: f64,
    #[serde(default = "default_secondary_power")]
    pub secondary_power_dbm: f64,
    #[serde(default = "default_secondary_height")]
    pub secondary_height_m: f64,
    #[serde(default = "default_receiver_height")]
    pub receiver_height_m: f64,
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default = "default_channels")]
    pub num_channels: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "default_temperature")]
    pub noise_temperature_k: f64,
    #[serde(default)]
    pub noise_figure_db: f64,
    #[serde(default = "default_pout")]
    pub pout_primary: f64,
    #[serde(default = "default_pout")]
    pub pout_secondary: f64,
    /// Rate normalization: utility units per bit/s/Hz.
    #[serde(default = "default_w0")]
    pub w0: f64,
    #[serde(default = "default_prior")]
    pub prior: f64,
    /// Floor on every link distance; the two-ray law diverges at short range.
    #[serde(default = "default_min_distance")]
    pub min_distance_m: f64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            side_m: default_side(),
            primary_power_dbm: default_primary_power(),
            primary_height_m: default_primary_height(),
            secondary_power_dbm: default_secondary_power(),
            secondary_height_m: default_secondary_height(),
            receiver_height_m: default_receiver_height(),
            gain: default_gain(),
            num_channels: default_channels(),
            seed: 0,
            bandwidth_hz: default_bandwidth(),
            noise_temperature_k: default_temperature(),
            noise_figure_db: 0.0,
            pout_primary: default_pout(),
            pout_secondary: default_pout(),
            w0: default_w0(),
            prior: default_prior(),
            min_distance_m: default_min_distance(),
        }
    }
}

/// One generated channel: its resource description and the link budget behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub resource: ResourceSpec,
    pub link: RadioLinkParams,
    pub primary: usize,
    pub receiver_xy: [f64; 2],
}

impl TopologyConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("side_m", self.side_m),
            ("primary_height_m", self.primary_height_m),
            ("secondary_height_m", self.secondary_height_m),
            ("receiver_height_m", self.receiver_height_m),
            ("gain", self.gain),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_temperature_k", self.noise_temperature_k),
            ("w0", self.w0),
            ("min_distance_m", self.min_distance_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(format!("topology {name} must be positive, got {v}")));
            }
        }
        if self.num_channels < 1 {
            return Err(Error::validation("topology needs at least one channel"));
        }
        if !(0.0..=1.0).contains(&self.prior) {
            return Err(Error::validation(format!("topology prior {} outside [0, 1]", self.prior)));
        }
        for (name, v) in [("pout_primary", self.pout_primary), ("pout_secondary", self.pout_secondary)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::validation(format!("topology {name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    fn noise_w(&self) -> f64 {
        BOLTZMANN * self.noise_temperature_k * self.bandwidth_hz * db_to_linear(self.noise_figure_db)
    }

    /// Two-ray received power over noise.
    fn snr(&self, power_dbm: f64, h_t: f64, h_r: f64, distance: f64) -> f64 {
        let d = distance.max(self.min_distance_m);
        let p_t = db_to_linear(power_dbm) * 1e-3;
        p_t * self.gain * h_t * h_t * h_r * h_r / d.powi(4) / self.noise_w()
    }

    fn primaries(&self) -> [[f64; 2]; 4] {
        let s = self.side_m;
        [[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]]
    }

    /// Nearest point of primary `p`'s coverage quadrant to the secondary transmitter,
    /// pushed out to the minimum link distance.
    fn worst_primary_receiver(&self, p: usize) -> [f64; 2] {
        let half = self.side_m / 2.0;
        let corner = self.primaries()[p];
        let center = [half, half];
        let quadrant_lo = [corner[0].min(half), corner[1].min(half)];
        let quadrant_hi = [corner[0].max(half), corner[1].max(half)];
        let nearest = [
            center[0].clamp(quadrant_lo[0], quadrant_hi[0]),
            center[1].clamp(quadrant_lo[1], quadrant_hi[1]),
        ];
        let gap = dist(nearest, center);
        if gap >= self.min_distance_m {
            return nearest;
        }
        let towards = dist(corner, center);
        let t = self.min_distance_m / towards;
        [center[0] + t * (corner[0] - center[0]), center[1] + t * (corner[1] - center[1])]
    }
}

/// Places the primaries at the corners and the secondary transmitter at the center,
/// draws one receiver per channel uniformly in the square and assigns channels to
/// primaries round-robin.
pub fn generate_topology(cfg: &TopologyConfig) -> Result<Vec<Channel>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = cfg.side_m / 2.0;
    let secondary = [half, half];
    let primaries = cfg.primaries();
    let mut channels = Vec::with_capacity(cfg.num_channels);
    for i in 0..cfg.num_channels {
        let rx = [rng.random_range(0.0..cfg.side_m), rng.random_range(0.0..cfg.side_m)];
        let p = i % primaries.len();
        let pr = cfg.worst_primary_receiver(p);
        let link = RadioLinkParams {
            zeta: cfg.snr(cfg.primary_power_dbm, cfg.primary_height_m, cfg.secondary_height_m, dist(primaries[p], secondary)),
            gamma_s: cfg.snr(cfg.secondary_power_dbm, cfg.secondary_height_m, cfg.receiver_height_m, dist(secondary, rx)),
            gamma_p: cfg.snr(cfg.primary_power_dbm, cfg.primary_height_m, cfg.receiver_height_m, dist(primaries[p], pr)),
            xi: cfg.snr(cfg.secondary_power_dbm, cfg.secondary_height_m, cfg.receiver_height_m, dist(secondary, pr)),
            pout_p: cfg.pout_primary,
            pout_s: cfg.pout_secondary,
            w0: cfg.w0,
        };
        let model = ExponentialSensingModel::new(1.0, link.zeta)?;
        let resource = ResourceSpec::new(i + 1, cfg.prior, radio_reward(&link)?, radio_penalty(&link)?, model.into())?;
        channels.push(Channel { resource, link, primary: p, receiver_xy: rx });
    }
    Ok(channels)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
