//! Simulation configuration and its flat `key = value` text format.
//!
//! ```text
//! # comments run to end of line
//! n_vehicles = 100
//! scheme = proposed
//! ```
//!
//! Omitted keys keep their defaults; unknown keys are rejected. The same
//! format is written back out as the run manifest.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::channel::{CommQualityMode, RadioEnvironment};
use crate::error::{ConfigError, ModelError};
use crate::learning::{LearningCurve, UtilityBasis};
use crate::lyapunov::{DepartureModel, DepartureRule, DriftPenaltyConfig};
use crate::mobility::{CoverageGeometry, SpeedDistribution};
use crate::selection::{SchemeKind, DEFAULT_STATIC_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepartureKind {
    Bernoulli,
    ChannelGated,
}

impl DepartureKind {
    fn as_str(&self) -> &'static str {
        match self {
            DepartureKind::Bernoulli => "bernoulli",
            DepartureKind::ChannelGated => "channel_gated",
        }
    }
}

impl FromStr for DepartureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bernoulli" => Ok(Self::Bernoulli),
            "channel_gated" => Ok(Self::ChannelGated),
            other => Err(format!(
                "expected `bernoulli` or `channel_gated`, got `{other}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_vehicles: usize,
    pub span_d: f64,
    pub radius_r: f64,
    pub height_h: f64,
    pub min_distance: f64,
    pub q_max_mb: f64,
    pub tradeoff_v: f64,
    pub batch_mb: f64,
    pub slot_seconds: f64,
    pub data_items_per_vehicle: u64,
    pub item_mb: f64,
    pub energy_init_min: f64,
    pub energy_init_max: f64,
    pub speed_mean: f64,
    pub speed_variance: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub carrier_freq_mhz: f64,
    pub path_loss_exp: f64,
    pub connection_factor: f64,
    pub signal_variance: f64,
    pub light_speed: f64,
    pub noise_min: f64,
    pub noise_max: f64,
    pub shadow_base_min: f64,
    pub shadow_base_max: f64,
    pub comm_quality_mode: CommQualityMode,
    pub power_db_floor: f64,
    pub energy_scale: f64,
    pub learning_rate: f64,
    pub decay_rate: f64,
    pub utility_basis: UtilityBasis,
    pub scheme: SchemeKind,
    /// Vehicles per slot under the static scheme.
    pub static_k: usize,
    pub departure_model: DepartureKind,
    pub departure_prob: f64,
    pub departure_threshold: f64,
    /// `None` lets every resident batch compete for departure each slot.
    pub service_window: Option<usize>,
    pub n_servers: usize,
    pub max_slots: u64,
    pub master_seed: u64,
    pub respawn: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_vehicles: 100,
            span_d: 1000.0,
            radius_r: 500.0,
            height_h: 50.0,
            min_distance: 1.0,
            q_max_mb: 2000.0,
            tradeoff_v: 1e10,
            batch_mb: 10.0,
            slot_seconds: 0.05,
            data_items_per_vehicle: 1000,
            item_mb: 1.0,
            energy_init_min: 50.0,
            energy_init_max: 100.0,
            speed_mean: 15.0,
            speed_variance: 0.7,
            speed_min: 13.6,
            speed_max: 16.4,
            carrier_freq_mhz: 2500.0,
            path_loss_exp: 3.0,
            connection_factor: 5.6e6,
            signal_variance: 7.5,
            light_speed: 3.0e8,
            noise_min: 0.0,
            noise_max: 1.0,
            shadow_base_min: 0.3,
            shadow_base_max: 0.9,
            comm_quality_mode: CommQualityMode::Normalized,
            power_db_floor: -300.0,
            energy_scale: 1.0,
            learning_rate: 1.0,
            decay_rate: -0.3,
            utility_basis: UtilityBasis::Slot,
            scheme: SchemeKind::Proposed,
            static_k: DEFAULT_STATIC_K,
            departure_model: DepartureKind::Bernoulli,
            departure_prob: 0.5,
            departure_threshold: 0.6,
            service_window: Some(DEFAULT_SERVICE_WINDOW),
            n_servers: 9,
            max_slots: 1500,
            master_seed: 1,
            respawn: false,
        }
    }
}

/// Oldest batches the server can work on per slot.
pub const DEFAULT_SERVICE_WINDOW: usize = 11;

fn parse_value<T>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T: FromStr,
    T::Err: Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

impl SimConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value;
        match key {
            "n_vehicles" => self.n_vehicles = parse_value(key, v)?,
            "span_d" => self.span_d = parse_value(key, v)?,
            "radius_r" => self.radius_r = parse_value(key, v)?,
            "height_h" => self.height_h = parse_value(key, v)?,
            "min_distance" => self.min_distance = parse_value(key, v)?,
            "q_max_mb" => self.q_max_mb = parse_value(key, v)?,
            "tradeoff_v" => self.tradeoff_v = parse_value(key, v)?,
            "batch_mb" => self.batch_mb = parse_value(key, v)?,
            "slot_seconds" => self.slot_seconds = parse_value(key, v)?,
            "data_items_per_vehicle" => self.data_items_per_vehicle = parse_value(key, v)?,
            "item_mb" => self.item_mb = parse_value(key, v)?,
            "energy_init_min" => self.energy_init_min = parse_value(key, v)?,
            "energy_init_max" => self.energy_init_max = parse_value(key, v)?,
            "speed_mean" => self.speed_mean = parse_value(key, v)?,
            "speed_variance" => self.speed_variance = parse_value(key, v)?,
            "speed_min" => self.speed_min = parse_value(key, v)?,
            "speed_max" => self.speed_max = parse_value(key, v)?,
            "carrier_freq_mhz" => self.carrier_freq_mhz = parse_value(key, v)?,
            "path_loss_exp" => self.path_loss_exp = parse_value(key, v)?,
            "connection_factor" => self.connection_factor = parse_value(key, v)?,
            "signal_variance" => self.signal_variance = parse_value(key, v)?,
            "light_speed" => self.light_speed = parse_value(key, v)?,
            "noise_min" => self.noise_min = parse_value(key, v)?,
            "noise_max" => self.noise_max = parse_value(key, v)?,
            "shadow_base_min" => self.shadow_base_min = parse_value(key, v)?,
            "shadow_base_max" => self.shadow_base_max = parse_value(key, v)?,
            "comm_quality_mode" => self.comm_quality_mode = parse_value(key, v)?,
            "power_db_floor" => self.power_db_floor = parse_value(key, v)?,
            "energy_scale" => self.energy_scale = parse_value(key, v)?,
            "learning_rate" => self.learning_rate = parse_value(key, v)?,
            "decay_rate" => self.decay_rate = parse_value(key, v)?,
            "utility_basis" => self.utility_basis = parse_value(key, v)?,
            "scheme" => {
                self.scheme =
                    SchemeKind::parse(v, self.static_k).ok_or_else(|| ConfigError::BadValue {
                        key: key.to_string(),
                        value: v.to_string(),
                        reason: "expected one of proposed, maximum, static, random".into(),
                    })?;
            }
            "static_k" => {
                self.static_k = parse_value(key, v)?;
                if let SchemeKind::Static { .. } = self.scheme {
                    self.scheme = SchemeKind::Static { k: self.static_k };
                }
            }
            "departure_model" => self.departure_model = parse_value(key, v)?,
            "departure_prob" => self.departure_prob = parse_value(key, v)?,
            "departure_threshold" => self.departure_threshold = parse_value(key, v)?,
            "service_window" => {
                self.service_window = match v {
                    "none" | "unbounded" => None,
                    _ => Some(parse_value(key, v)?),
                }
            }
            "n_servers" => self.n_servers = parse_value(key, v)?,
            "max_slots" => self.max_slots = parse_value(key, v)?,
            "master_seed" => self.master_seed = parse_value(key, v)?,
            "respawn" => self.respawn = parse_value(key, v)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }
}

impl SimConfig {
    /// Every key with its current value, in manifest order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n_vehicles", self.n_vehicles.to_string()),
            ("span_d", self.span_d.to_string()),
            ("radius_r", self.radius_r.to_string()),
            ("height_h", self.height_h.to_string()),
            ("min_distance", self.min_distance.to_string()),
            ("q_max_mb", self.q_max_mb.to_string()),
            ("tradeoff_v", self.tradeoff_v.to_string()),
            ("batch_mb", self.batch_mb.to_string()),
            ("slot_seconds", self.slot_seconds.to_string()),
            (
                "data_items_per_vehicle",
                self.data_items_per_vehicle.to_string(),
            ),
            ("item_mb", self.item_mb.to_string()),
            ("energy_init_min", self.energy_init_min.to_string()),
            ("energy_init_max", self.energy_init_max.to_string()),
            ("speed_mean", self.speed_mean.to_string()),
            ("speed_variance", self.speed_variance.to_string()),
            ("speed_min", self.speed_min.to_string()),
            ("speed_max", self.speed_max.to_string()),
            ("carrier_freq_mhz", self.carrier_freq_mhz.to_string()),
            ("path_loss_exp", self.path_loss_exp.to_string()),
            ("connection_factor", self.connection_factor.to_string()),
            ("signal_variance", self.signal_variance.to_string()),
            ("light_speed", self.light_speed.to_string()),
            ("noise_min", self.noise_min.to_string()),
            ("noise_max", self.noise_max.to_string()),
            ("shadow_base_min", self.shadow_base_min.to_string()),
            ("shadow_base_max", self.shadow_base_max.to_string()),
            (
                "comm_quality_mode",
                self.comm_quality_mode.as_str().to_string(),
            ),
            ("power_db_floor", self.power_db_floor.to_string()),
            ("energy_scale", self.energy_scale.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("decay_rate", self.decay_rate.to_string()),
            ("utility_basis", self.utility_basis.as_str().to_string()),
            ("static_k", self.static_k.to_string()),
            ("scheme", self.scheme.name().to_string()),
            ("departure_model", self.departure_model.as_str().to_string()),
            ("departure_prob", self.departure_prob.to_string()),
            ("departure_threshold", self.departure_threshold.to_string()),
            (
                "service_window",
                self.service_window
                    .map_or_else(|| "none".to_string(), |w| w.to_string()),
            ),
            ("n_servers", self.n_servers.to_string()),
            ("max_slots", self.max_slots.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("respawn", self.respawn.to_string()),
        ]
    }

    /// The config in its own text format.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Parses config text on top of the defaults, then applies `overrides`
    /// (`(key, value)` pairs, later wins) and validates.
    pub fn parse<'a, I>(text: &str, overrides: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut cfg = SimConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        for (key, value) in overrides {
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        use ConfigError::Constraint;
        let check = |ok: bool, name: &'static str| if ok { Ok(()) } else { Err(Constraint(name)) };
        check(self.radius_r > 0.0, "radius_r > 0")?;
        check(
            (self.span_d - 2.0 * self.radius_r).abs() <= 1e-9 * self.span_d.abs().max(1.0),
            "span_d = 2 * radius_r",
        )?;
        check(self.height_h > 0.0, "height_h > 0")?;
        check(self.min_distance > 0.0, "min_distance > 0")?;
        check(self.q_max_mb > 0.0, "q_max_mb > 0")?;
        check(self.tradeoff_v >= 0.0, "tradeoff_v >= 0")?;
        check(self.batch_mb > 0.0, "batch_mb > 0")?;
        check(self.slot_seconds > 0.0, "slot_seconds > 0")?;
        check(self.item_mb > 0.0, "item_mb > 0")?;
        let ratio = self.batch_mb / self.item_mb;
        check(
            ratio >= 1.0 && ratio.fract() == 0.0,
            "batch_mb is a whole multiple of item_mb",
        )?;
        check(
            self.energy_init_min > 0.0 && self.energy_init_min <= self.energy_init_max,
            "0 < energy_init_min <= energy_init_max",
        )?;
        check(self.speed_min > 0.0, "speed_min > 0")?;
        SpeedDistribution::new(
            self.speed_mean,
            self.speed_variance,
            self.speed_min,
            self.speed_max,
        )
        .map_err(|e| match e {
            ModelError::InvertedSpeedBounds { .. } => Constraint("speed_min <= speed_max"),
            ModelError::BadVariance(_) => Constraint("speed_variance >= 0"),
            _ => Constraint("speed_mean within [speed_min, speed_max] when variance = 0"),
        })?;
        check(self.carrier_freq_mhz > 0.0, "carrier_freq_mhz > 0")?;
        check(self.path_loss_exp > 0.0, "path_loss_exp > 0")?;
        check(self.connection_factor > 0.0, "connection_factor > 0")?;
        check(self.signal_variance >= 0.0, "signal_variance >= 0")?;
        check(self.light_speed > 0.0, "light_speed > 0")?;
        check(
            0.0 <= self.noise_min && self.noise_min <= self.noise_max && self.noise_max <= 1.0,
            "0 <= noise_min <= noise_max <= 1",
        )?;
        check(
            0.0 < self.shadow_base_min
                && self.shadow_base_min <= self.shadow_base_max
                && self.shadow_base_max <= 1.0,
            "0 < shadow_base_min <= shadow_base_max <= 1",
        )?;
        check(self.power_db_floor.is_finite(), "power_db_floor finite")?;
        check(self.energy_scale >= 0.0, "energy_scale >= 0")?;
        check(self.learning_rate >= 0.0, "learning_rate >= 0")?;
        check(self.decay_rate < 0.0, "decay_rate < 0")?;
        check(
            (0.0..=1.0).contains(&self.departure_prob),
            "0 <= departure_prob <= 1",
        )?;
        check(
            (0.0..=1.0).contains(&self.departure_threshold),
            "0 <= departure_threshold <= 1",
        )?;
        check(self.n_servers >= 1, "n_servers >= 1")?;
        Ok(())
    }

    pub fn geometry(&self) -> CoverageGeometry {
        CoverageGeometry {
            span_d: self.span_d,
            radius_r: self.radius_r,
            server_height: self.height_h,
            min_distance: self.min_distance,
        }
    }

    pub fn radio(&self) -> RadioEnvironment {
        RadioEnvironment {
            carrier_freq_mhz: self.carrier_freq_mhz,
            path_loss_exp: self.path_loss_exp,
            server_height: self.height_h,
            connection_factor: self.connection_factor,
            signal_variance: self.signal_variance,
            light_speed: self.light_speed,
            noise_range: (self.noise_min, self.noise_max),
            shadow_base_range: (self.shadow_base_min, self.shadow_base_max),
            comm_quality_mode: self.comm_quality_mode,
            power_db_floor: self.power_db_floor,
            energy_scale: self.energy_scale,
        }
    }

    pub fn speed_distribution(&self) -> Result<SpeedDistribution, ModelError> {
        SpeedDistribution::new(
            self.speed_mean,
            self.speed_variance,
            self.speed_min,
            self.speed_max,
        )
    }

    pub fn drift_penalty(&self) -> DriftPenaltyConfig {
        DriftPenaltyConfig {
            tradeoff_v: self.tradeoff_v,
            batch_size_mb: self.batch_mb,
            capacity_mb: self.q_max_mb,
        }
    }

    pub fn departures(&self) -> DepartureModel {
        let rule = match self.departure_model {
            DepartureKind::Bernoulli => DepartureRule::Bernoulli {
                p: self.departure_prob,
            },
            DepartureKind::ChannelGated => DepartureRule::ChannelGated {
                threshold: self.departure_threshold,
            },
        };
        DepartureModel {
            rule,
            service_window: self.service_window,
        }
    }

    pub fn learning_curve(&self) -> LearningCurve {
        LearningCurve::new(self.learning_rate, self.decay_rate)
    }

    /// Data items uploaded per selection.
    pub fn items_per_batch(&self) -> u64 {
        (self.batch_mb / self.item_mb) as u64
    }

    /// Same config with another scheme.
    pub fn with_scheme(&self, scheme: SchemeKind) -> Self {
        let scheme = match scheme {
            SchemeKind::Static { .. } => SchemeKind::Static { k: self.static_k },
            other => other,
        };
        Self {
            scheme,
            ..self.clone()
        }
    }
}

/// Reads `path` and parses it with [`SimConfig::parse`].
pub fn parse_config<'a, I>(path: &Path, overrides: I) -> Result<SimConfig, ConfigError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let text = std::fs::read_to_string(path)?;
    SimConfig::parse(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = SimConfig::parse("", []).unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!(cfg.n_vehicles, 100);
        assert_eq!(cfg.q_max_mb, 2000.0);
        assert_eq!(cfg.tradeoff_v, 1e10);
        assert_eq!(cfg.carrier_freq_mhz, 2500.0);
        assert_eq!(cfg.batch_mb, 10.0);
        assert_eq!(cfg.n_servers, 9);
        assert_eq!(cfg.items_per_batch(), 10);
    }

    #[test]
    fn override_wins_over_file() {
        let cfg = SimConfig::parse("scheme = random\n", [("scheme", "maximum")]).unwrap();
        assert_eq!(cfg.scheme, SchemeKind::Maximum);
    }

    #[test]
    fn static_k_applies_in_either_order() {
        let a = SimConfig::parse("scheme = static\nstatic_k = 7", []).unwrap();
        let b = SimConfig::parse("static_k = 7\nscheme = static", []).unwrap();
        assert_eq!(a.scheme, SchemeKind::Static { k: 7 });
        assert_eq!(a, b);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\n n_vehicles = 12   # trailing\nservice_window = none\n";
        let cfg = SimConfig::parse(text, []).unwrap();
        assert_eq!(cfg.n_vehicles, 12);
        assert_eq!(cfg.service_window, None);
    }

    #[test]
    fn negative_capacity_rejected_with_constraint_name() {
        let err = SimConfig::parse("q_max_mb=-5", []).unwrap_err();
        assert!(
            matches!(err, ConfigError::Constraint("q_max_mb > 0")),
            "{err}"
        );
        assert!(err.to_string().contains("q_max_mb > 0"));
    }

    #[test]
    fn unknown_key_named() {
        let err = SimConfig::parse("warp_factor = 9", []).unwrap_err();
        assert!(err.to_string().contains("warp_factor"));
    }

    #[test]
    fn syntax_and_value_errors() {
        assert!(matches!(
            SimConfig::parse("n_vehicles 100", []),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            SimConfig::parse("n_vehicles = lots", []),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(SimConfig::parse("radius_r = 400", []).is_err());
        assert!(SimConfig::parse("batch_mb = 2.5", []).is_err());
    }

    #[test]
    fn text_round_trips() {
        let mut cfg = SimConfig::default();
        cfg.set("scheme", "static").unwrap();
        cfg.set("static_k", "3").unwrap();
        cfg.set("tradeoff_v", "123.456").unwrap();
        cfg.set("service_window", "none").unwrap();
        cfg.set("comm_quality_mode", "literal").unwrap();
        let back = SimConfig::parse(&cfg.to_text(), []).unwrap();
        assert_eq!(back, cfg);
    }
}
