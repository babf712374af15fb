//! Browser bindings for the simulator: run a scheme, inspect the admission
//! objective and sample the channel across the coverage span.

use wasm_bindgen::prelude::*;

use vfeel_core::channel::{doppler, path_loss};
use vfeel_core::learning::UtilityBasis;
use vfeel_core::lyapunov::{objective, optimal_n};
use vfeel_core::{run_experiment, SchemeKind, SimConfig};

/// Slot-wise mean curves of one experiment.
#[wasm_bindgen]
pub struct SchemeCurves {
    backlog: Vec<f64>,
    n_star: Vec<f64>,
    cumulative_selected: Vec<f64>,
    accuracy: Vec<f64>,
}

#[wasm_bindgen]
impl SchemeCurves {
    pub fn backlog(&self) -> Vec<f64> {
        self.backlog.clone()
    }

    pub fn n_star(&self) -> Vec<f64> {
        self.n_star.clone()
    }

    pub fn cumulative_selected(&self) -> Vec<f64> {
        self.cumulative_selected.clone()
    }

    pub fn accuracy(&self) -> Vec<f64> {
        self.accuracy.clone()
    }

    pub fn len(&self) -> usize {
        self.backlog.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backlog.is_empty()
    }
}

/// Runs `scheme` on `servers` servers for at most `slots` slots.
#[wasm_bindgen]
pub fn run_scheme(
    scheme: &str,
    seed: u64,
    servers: usize,
    slots: u64,
) -> Result<SchemeCurves, String> {
    let mut cfg = SimConfig::default();
    let kind = SchemeKind::parse(scheme, cfg.static_k)
        .ok_or_else(|| format!("unknown scheme `{scheme}`"))?;
    cfg.master_seed = seed;
    cfg.n_servers = servers;
    cfg.max_slots = slots;
    let e = run_experiment(&cfg.with_scheme(kind)).map_err(|e| e.to_string())?;
    let column = |f: fn(&vfeel_core::AggregateMetrics) -> f64| e.aggregate.iter().map(f).collect();
    Ok(SchemeCurves {
        backlog: column(|r| r.queue_backlog_mb),
        n_star: column(|r| r.n_star),
        cumulative_selected: column(|r| r.cumulative_selected),
        accuracy: column(|r| r.accuracy),
    })
}

/// Drift-plus-penalty objective for `n = 0..=available` at backlog `q` and
/// departure estimate `mu`; infeasible counts are `NaN`.
#[wasm_bindgen]
pub fn objective_curve(q: f64, mu: f64, available: usize) -> Vec<f64> {
    let cfg = SimConfig::default();
    let dp = cfg.drift_penalty();
    let curve = cfg.learning_curve();
    (0..=available)
        .map(|n| {
            if q + dp.batch_size_mb * n as f64 > dp.capacity_mb {
                f64::NAN
            } else {
                objective(n, q, mu, &dp, |k| {
                    curve.slot_utility(k, dp.batch_size_mb, UtilityBasis::Slot)
                })
            }
        })
        .collect()
}

/// Admission count chosen at backlog `q`.
#[wasm_bindgen]
pub fn admission_count(q: f64, mu: f64, available: usize) -> usize {
    let cfg = SimConfig::default();
    let dp = cfg.drift_penalty();
    let curve = cfg.learning_curve();
    optimal_n(q, available, mu, &dp, |k| {
        curve.slot_utility(k, dp.batch_size_mb, UtilityBasis::Slot)
    })
}

/// Path loss in dB at `points` evenly spaced positions along the span for a
/// vehicle moving at `speed` m/s.
#[wasm_bindgen]
pub fn path_loss_profile(speed: f64, points: usize) -> Vec<f64> {
    let cfg = SimConfig::default();
    let geom = cfg.geometry();
    let env = cfg.radio();
    let step = if points > 1 {
        cfg.span_d / (points - 1) as f64
    } else {
        0.0
    };
    (0..points)
        .map(|i| {
            let dist = geom.distance_to_server(i as f64 * step);
            path_loss(&env, doppler(&env, speed, dist), dist)
        })
        .collect()
}
