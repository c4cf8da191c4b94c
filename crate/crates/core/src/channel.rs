//! Air-to-ground propagation and rate model.
//!
//! The LoS probability is the elevation-angle sigmoid of the Al-Hourani urban
//! model, the average channel gain mixes LoS and NLoS excess attenuation on
//! top of free-space loss, and the achievable rate is the Shannon rate over
//! the bandwidth allocated to the link. All quantities are linear and SI
//! internally; [`units`] holds the dB conversions used at the interfaces.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default per-link channel width (one 20 MHz 802.11ac channel), Hz.
pub const DEFAULT_CHANNEL_WIDTH_HZ: f64 = 20e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid channel parameter: {0}")]
    InvalidParams(String),
    #[error("UAV altitude {uav_z} m is not above UE altitude {ue_z} m")]
    BelowHorizon { ue_z: f64, uav_z: f64 },
    #[error("UE and UAV are coincident")]
    ZeroDistance,
    #[error("bandwidth must be positive and finite, got {0} Hz")]
    InvalidBandwidth(f64),
    #[error("demand must be positive and finite, got {0} bit/s")]
    InvalidDemand(f64),
    #[error("spectral efficiency {0} bit/s/Hz overflows the rate inversion")]
    ExponentOverflow(f64),
}

pub mod units {
    pub fn db_to_linear(db: f64) -> f64 {
        10f64.powf(db / 10.0)
    }

    pub fn linear_to_db(linear: f64) -> f64 {
        10.0 * linear.log10()
    }

    pub fn dbm_to_watts(dbm: f64) -> f64 {
        10f64.powf((dbm - 30.0) / 10.0)
    }

    pub fn watts_to_dbm(watts: f64) -> f64 {
        10.0 * watts.log10() + 30.0
    }
}

/// A position in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Self) -> Self {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Self) -> Self {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, k: f64) -> Self {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Radio and environment constants, all linear.
///
/// Noise is carried as a spectral density. The default is a -85 dBm noise
/// floor measured over a 20 MHz channel, i.e. `10^-11.5 W / 2e7 Hz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Carrier frequency, Hz.
    pub carrier_frequency: f64,
    /// Transmit power, W.
    pub tx_power: f64,
    pub tx_antenna_gain: f64,
    pub rx_antenna_gain: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_spectral_density: f64,
    pub c1: f64,
    pub c2: f64,
    /// Excess attenuation under LoS (linear, >= 1).
    pub mu_los: f64,
    /// Excess attenuation under NLoS (linear, >= `mu_los`).
    pub mu_nlos: f64,
    /// Design LoS probability used for the service radius and the elevation mask.
    pub los_threshold: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_frequency: 5.25e9,
            tx_power: units::dbm_to_watts(20.0),
            tx_antenna_gain: 1.0,
            rx_antenna_gain: 1.0,
            noise_spectral_density: units::dbm_to_watts(-85.0) / DEFAULT_CHANNEL_WIDTH_HZ,
            c1: 9.6,
            c2: 0.28,
            mu_los: units::db_to_linear(1.0),
            mu_nlos: units::db_to_linear(20.0),
            los_threshold: 0.9,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |what: &str| Err(ChannelError::InvalidParams(what.to_string()));
        let finite = [
            self.carrier_frequency,
            self.tx_power,
            self.tx_antenna_gain,
            self.rx_antenna_gain,
            self.noise_spectral_density,
            self.c1,
            self.c2,
            self.mu_los,
            self.mu_nlos,
            self.los_threshold,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all channel parameters must be finite");
        }
        if self.carrier_frequency <= 0.0 {
            return bad("carrier_frequency must be > 0");
        }
        if self.tx_power <= 0.0 {
            return bad("tx_power must be > 0");
        }
        if self.tx_antenna_gain <= 0.0 || self.rx_antenna_gain <= 0.0 {
            return bad("antenna gains must be > 0 (linear)");
        }
        if self.noise_spectral_density <= 0.0 {
            return bad("noise_spectral_density must be > 0");
        }
        if self.c1 <= 0.0 || self.c2 <= 0.0 {
            return bad("c1 and c2 must be > 0");
        }
        if self.mu_los < 1.0 {
            return bad("mu_los must be >= 1");
        }
        if self.mu_nlos < self.mu_los {
            return bad("mu_nlos must be >= mu_los");
        }
        if !(self.los_threshold > 0.0 && self.los_threshold < 1.0) {
            return bad("los_threshold must lie in (0, 1)");
        }
        Ok(())
    }

    /// Free-space constant `(4 pi f / c)^2`.
    pub fn k0(&self) -> f64 {
        (4.0 * PI * self.carrier_frequency / SPEED_OF_LIGHT).powi(2)
    }

    /// Received SNR numerator without bandwidth: `P_T G_t G_r / N_0`, in Hz.
    fn power_over_noise(&self) -> f64 {
        self.tx_power * self.tx_antenna_gain * self.rx_antenna_gain / self.noise_spectral_density
    }

    /// Mixed excess attenuation `eps mu_los + (1 - eps) mu_nlos`.
    pub fn excess_attenuation(&self, p_los: f64) -> f64 {
        p_los * self.mu_los + (1.0 - p_los) * self.mu_nlos
    }

    /// LoS probability as a function of elevation angle in degrees.
    pub fn los_probability_at(&self, elevation_deg: f64) -> f64 {
        1.0 / (1.0 + self.c1 * (-self.c2 * (elevation_deg - self.c1)).exp())
    }

    /// Elevation angle at which the LoS probability equals `los_threshold`.
    ///
    /// Can be negative for low thresholds, in which case every above-horizon
    /// position already meets the threshold.
    pub fn threshold_elevation_deg(&self) -> f64 {
        let t = self.los_threshold;
        self.c1 - ((1.0 / t - 1.0) / self.c1).ln() / self.c2
    }

    /// Average gain at distance `d` with LoS probability `p_los`.
    pub fn gain_at(&self, distance: f64, p_los: f64) -> f64 {
        1.0 / (self.k0() * distance * distance * self.excess_attenuation(p_los))
    }

    /// Shannon rate for a given gain and bandwidth.
    pub fn rate_for_gain(&self, gain: f64, bandwidth: f64) -> f64 {
        let snr = self.power_over_noise() * gain / bandwidth;
        bandwidth * snr.ln_1p() / std::f64::consts::LN_2
    }

    /// Rate at distance `d` with a fixed LoS probability.
    pub fn rate_at(&self, distance: f64, p_los: f64, bandwidth: f64) -> f64 {
        self.rate_for_gain(self.gain_at(distance, p_los), bandwidth)
    }
}

/// Full evaluation of one UE-UAV link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub distance: f64,
    pub elevation_deg: f64,
    pub p_los: f64,
    pub p_nlos: f64,
    pub gain: f64,
    pub rate: f64,
    pub bandwidth: f64,
}

pub fn path_distance(a: Point3, b: Point3) -> f64 {
    (b - a).norm()
}

fn geometry(ue: Point3, uav: Point3) -> Result<(f64, f64), ChannelError> {
    let d = path_distance(ue, uav);
    if d == 0.0 {
        return Err(ChannelError::ZeroDistance);
    }
    if uav.z <= ue.z {
        return Err(ChannelError::BelowHorizon { ue_z: ue.z, uav_z: uav.z });
    }
    let ratio = ((uav.z - ue.z) / d).min(1.0);
    Ok((d, ratio.asin().to_degrees()))
}

pub fn elevation_deg(ue: Point3, uav: Point3) -> Result<f64, ChannelError> {
    geometry(ue, uav).map(|(_, theta)| theta)
}

pub fn los_probability(ue: Point3, uav: Point3, params: &ChannelParams) -> Result<f64, ChannelError> {
    let (_, theta) = geometry(ue, uav)?;
    Ok(params.los_probability_at(theta))
}

pub fn channel_gain(ue: Point3, uav: Point3, params: &ChannelParams) -> Result<f64, ChannelError> {
    let (d, theta) = geometry(ue, uav)?;
    Ok(params.gain_at(d, params.los_probability_at(theta)))
}

fn check_bandwidth(bandwidth: f64) -> Result<(), ChannelError> {
    if bandwidth > 0.0 && bandwidth.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::InvalidBandwidth(bandwidth))
    }
}

pub fn link_rate(ue: Point3, uav: Point3, bandwidth: f64, params: &ChannelParams) -> Result<f64, ChannelError> {
    check_bandwidth(bandwidth)?;
    let gain = channel_gain(ue, uav, params)?;
    Ok(params.rate_for_gain(gain, bandwidth))
}

pub fn link_budget(
    ue: Point3,
    uav: Point3,
    bandwidth: f64,
    params: &ChannelParams,
) -> Result<LinkBudget, ChannelError> {
    check_bandwidth(bandwidth)?;
    let (distance, elevation_deg) = geometry(ue, uav)?;
    let p_los = params.los_probability_at(elevation_deg);
    let gain = params.gain_at(distance, p_los);
    Ok(LinkBudget {
        distance,
        elevation_deg,
        p_los,
        p_nlos: 1.0 - p_los,
        gain,
        rate: params.rate_for_gain(gain, bandwidth),
        bandwidth,
    })
}

/// Largest UE-UAV distance at which `demand` is still met over `bandwidth`,
/// with the LoS probability held at the design threshold.
pub fn max_service_distance(demand: f64, bandwidth: f64, params: &ChannelParams) -> Result<f64, ChannelError> {
    if !(demand > 0.0 && demand.is_finite()) {
        return Err(ChannelError::InvalidDemand(demand));
    }
    check_bandwidth(bandwidth)?;
    let efficiency = demand / bandwidth;
    let snr_required = efficiency.exp2() - 1.0;
    if !snr_required.is_finite() {
        return Err(ChannelError::ExponentOverflow(efficiency));
    }
    let a = 1.0 / (params.k0() * params.excess_attenuation(params.los_threshold));
    Ok((a * params.power_over_noise() / (bandwidth * snr_required)).sqrt())
}
