//! Uplink radio chain between a vehicle and its edge server.
//!
//! Per slot a vehicle's snapshot is built from its speed, its distance to the
//! server and two random draws (the shadow-fading correlation base and a
//! noise multiplier):
//!
//! ```text
//! doppler     f_d = (v / B) * dist / sqrt(h^2 + dist^2),   B = c / f
//! path loss   L   = 20 lg(f + f_d) + 10 N lg(dist) - 28     (f, f_d in MHz)
//! shadow      a   = eps^(v / dist)
//! rate        r   = delta^2 * a
//! power       P   = (r / alpha)^2
//! quality     Ccom = (10 lg P - L) * noise
//! energy      E   = C_n * sqrt(P) / alpha
//! ```

use crate::error::ModelError;

/// How the per-vehicle communication quality feeds the priority weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommQualityMode {
    /// The raw signed value.
    Literal,
    /// Raw values min-max rescaled to `[0, 1]` across the slot's vehicles.
    #[default]
    Normalized,
}

impl CommQualityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommQualityMode::Literal => "literal",
            CommQualityMode::Normalized => "normalized",
        }
    }
}

impl std::str::FromStr for CommQualityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Self::Literal),
            "normalized" => Ok(Self::Normalized),
            other => Err(format!("expected `literal` or `normalized`, got `{other}`")),
        }
    }
}

/// Channel-model constants.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioEnvironment {
    pub carrier_freq_mhz: f64,
    pub path_loss_exp: f64,
    pub server_height: f64,
    pub connection_factor: f64,
    /// Variance of the estimated signal strength, dB².
    pub signal_variance: f64,
    pub light_speed: f64,
    /// Interval the per-slot noise multiplier is drawn from.
    pub noise_range: (f64, f64),
    /// Interval the shadow-fading correlation base is drawn from.
    pub shadow_base_range: (f64, f64),
    pub comm_quality_mode: CommQualityMode,
    /// Stand-in for `10 lg 0` when the transmit power is exactly zero.
    pub power_db_floor: f64,
    /// Multiplier on transmission energy; 1 keeps the formula literal.
    pub energy_scale: f64,
}

impl Default for RadioEnvironment {
    fn default() -> Self {
        Self {
            carrier_freq_mhz: 2500.0,
            path_loss_exp: 3.0,
            server_height: 50.0,
            connection_factor: 5.6e6,
            signal_variance: 7.5,
            light_speed: 3.0e8,
            noise_range: (0.0, 1.0),
            shadow_base_range: (0.3, 0.9),
            comm_quality_mode: CommQualityMode::Normalized,
            power_db_floor: -300.0,
            energy_scale: 1.0,
        }
    }
}

/// Wavelength in meters.
pub fn wavelength(env: &RadioEnvironment) -> f64 {
    env.light_speed / (env.carrier_freq_mhz * 1e6)
}

/// Doppler shift in Hz for a vehicle at horizontal distance `dist`.
pub fn doppler(env: &RadioEnvironment, speed: f64, dist: f64) -> f64 {
    let propagation = env.server_height.hypot(dist);
    let cos_theta = dist / propagation;
    speed / wavelength(env) * cos_theta
}

/// ITU-R path loss in dB. The Doppler shift is converted to MHz before it is
/// added to the carrier.
pub fn path_loss(env: &RadioEnvironment, doppler_hz: f64, dist: f64) -> f64 {
    20.0 * (env.carrier_freq_mhz + doppler_hz / 1e6).log10()
        + 10.0 * env.path_loss_exp * dist.log10()
        - 28.0
}

/// Shadow-fading correlation coefficient `eps^(v/dist)`.
pub fn shadow_correlation(eps: f64, speed: f64, dist: f64) -> Result<f64, ModelError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(ModelError::BadCorrelationBase(eps));
    }
    Ok(eps.powf(speed / dist))
}

pub fn tx_rate(env: &RadioEnvironment, shadow_corr: f64) -> f64 {
    env.signal_variance * shadow_corr
}

/// Transmit power, linear.
pub fn tx_power(env: &RadioEnvironment, rate: f64) -> f64 {
    let x = rate / env.connection_factor;
    x * x
}

/// Linear power to dB, with zero mapped to the configured floor.
pub fn power_db(env: &RadioEnvironment, power_linear: f64) -> f64 {
    if power_linear > 0.0 {
        (10.0 * power_linear.log10()).max(env.power_db_floor)
    } else {
        env.power_db_floor
    }
}

/// Raw (literal) communication quality. Normalized mode rescales these values
/// across a slot with [`normalize_comm_quality`].
pub fn comm_quality(
    env: &RadioEnvironment,
    power_linear: f64,
    path_loss_db: f64,
    noise: f64,
) -> f64 {
    (power_db(env, power_linear) - path_loss_db) * noise
}

/// Min-max rescales `values` into `[0, 1]` in place. When every value is
/// equal they all map to 1.
pub fn normalize_comm_quality(values: &mut [f64]) {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    for v in values.iter_mut() {
        *v = if span > 0.0 { (*v - lo) / span } else { 1.0 };
    }
}

/// Energy spent uploading `data_mb` at linear power `power_linear`.
pub fn tx_energy(env: &RadioEnvironment, data_mb: f64, power_linear: f64) -> f64 {
    env.energy_scale * data_mb * power_linear.sqrt() / env.connection_factor
}

pub fn update_energy(prev_energy: f64, tx_energy: f64) -> f64 {
    (prev_energy - tx_energy).max(0.0)
}

/// One vehicle's radio quantities for one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSnapshot {
    pub doppler_hz: f64,
    pub path_loss_db: f64,
    pub shadow_corr: f64,
    pub tx_rate: f64,
    pub tx_power_linear: f64,
    /// Literal value; the simulator may overwrite it with the normalized one.
    pub comm_quality: f64,
    /// Energy an upload of one batch would cost this slot.
    pub tx_energy: f64,
}

impl ChannelSnapshot {
    pub fn compute(
        env: &RadioEnvironment,
        speed: f64,
        dist: f64,
        shadow_base: f64,
        noise: f64,
        batch_mb: f64,
    ) -> Result<Self, ModelError> {
        let doppler_hz = doppler(env, speed, dist);
        let path_loss_db = path_loss(env, doppler_hz, dist);
        let shadow_corr = shadow_correlation(shadow_base, speed, dist)?;
        let rate = tx_rate(env, shadow_corr);
        let power = tx_power(env, rate);
        Ok(Self {
            doppler_hz,
            path_loss_db,
            shadow_corr,
            tx_rate: rate,
            tx_power_linear: power,
            comm_quality: comm_quality(env, power, path_loss_db, noise),
            tx_energy: tx_energy(env, batch_mb, power),
        })
    }
}
