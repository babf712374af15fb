//! Slot-synchronous simulation of edge servers.
//!
//! One slot of one server runs these steps in order:
//!
//! 1. every active vehicle refreshes its channel snapshot and resource status;
//! 2. the admission count `n*` is computed (queue-aware schemes only);
//! 3. the scheme selects uploaders;
//! 4. each uploader is debited one batch of data and its transmission energy;
//! 5. the uploaded batches join the cache queue;
//! 6. departures are sampled and removed from the queue;
//! 7. the slot's uploads are added to the training set;
//! 8. vehicles move and those leaving coverage are deactivated;
//! 9. a [`SlotMetrics`] row is emitted.
//!
//! A server stops at `max_slots`, or earlier once no active vehicle holds a
//! full batch and its queue is empty.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    normalize_comm_quality, update_energy, ChannelSnapshot, CommQualityMode, RadioEnvironment,
};
use crate::config::SimConfig;
use crate::error::ConfigError;
use crate::learning::LearningCurve;
use crate::lyapunov::{
    optimal_n, sample_departures, Batch, CacheQueue, DepartureModel, DriftPenaltyConfig,
};
use crate::mobility::{CoverageGeometry, SpeedDistribution, VehicleState};
use crate::rng::{phase_rng, server_seed, Phase};
use crate::selection::{select, ResourceStatus, SchemeKind, SelectionDecision};

/// One row of a server's output trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotMetrics {
    pub slot: u64,
    pub server_id: usize,
    pub scheme: SchemeKind,
    /// Backlog at the end of the slot.
    pub queue_backlog_mb: f64,
    pub n_star: usize,
    pub n_selected: usize,
    pub arrivals_mb: f64,
    pub departures_mb: f64,
    pub cumulative_selected: u64,
    pub cumulative_trained_mb: f64,
    pub accuracy: f64,
    pub loss: f64,
    /// Vehicles that reported statuses at the start of the slot.
    pub active_vehicles: usize,
}

/// Mean over servers of every numeric [`SlotMetrics`] field at one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics {
    pub slot: u64,
    pub scheme: SchemeKind,
    pub queue_backlog_mb: f64,
    pub n_star: f64,
    pub n_selected: f64,
    pub arrivals_mb: f64,
    pub departures_mb: f64,
    pub cumulative_selected: f64,
    pub cumulative_trained_mb: f64,
    pub accuracy: f64,
    pub loss: f64,
    pub active_vehicles: f64,
}

/// One edge server with its own fleet, queue and random streams.
#[derive(Debug, Clone)]
pub struct EdgeServer {
    server_id: usize,
    scheme: SchemeKind,
    geom: CoverageGeometry,
    radio: RadioEnvironment,
    drift: DriftPenaltyConfig,
    departure_model: DepartureModel,
    speeds: SpeedDistribution,
    cfg: SimConfig,
    vehicles: Vec<VehicleState>,
    initial_data: Vec<u64>,
    uploads: Vec<u64>,
    snapshots: Vec<Option<ChannelSnapshot>>,
    queue: CacheQueue,
    curve: LearningCurve,
    channel_rng: ChaCha8Rng,
    departure_rng: ChaCha8Rng,
    scheme_rng: ChaCha8Rng,
    respawn_rng: ChaCha8Rng,
    slot: u64,
    last_departures_mb: f64,
    cumulative_selected: u64,
    finished: bool,
}

impl EdgeServer {
    /// Builds server `server_id` of the experiment described by `cfg`.
    pub fn new(cfg: &SimConfig, server_id: usize) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let seed = server_seed(cfg.master_seed, server_id);
        let geom = cfg.geometry();
        let speeds = cfg
            .speed_distribution()
            .map_err(|_| ConfigError::Constraint("speed distribution"))?;
        let mut fleet_rng = phase_rng(seed, Phase::Fleet);
        let mut server = Self {
            server_id,
            scheme: cfg.scheme,
            geom,
            radio: cfg.radio(),
            drift: cfg.drift_penalty(),
            departure_model: cfg.departures(),
            speeds,
            cfg: cfg.clone(),
            vehicles: Vec::with_capacity(cfg.n_vehicles),
            initial_data: Vec::with_capacity(cfg.n_vehicles),
            uploads: Vec::with_capacity(cfg.n_vehicles),
            snapshots: Vec::with_capacity(cfg.n_vehicles),
            queue: CacheQueue::new(cfg.q_max_mb),
            curve: cfg.learning_curve(),
            channel_rng: phase_rng(seed, Phase::Channel),
            departure_rng: phase_rng(seed, Phase::Departures),
            scheme_rng: phase_rng(seed, Phase::Scheme),
            respawn_rng: phase_rng(seed, Phase::Respawn),
            slot: 0,
            last_departures_mb: 0.0,
            cumulative_selected: 0,
            finished: false,
        };
        for _ in 0..cfg.n_vehicles {
            let position = fleet_rng.random_range(0.0..=geom.span_d);
            server.spawn(position, &mut fleet_rng);
        }
        Ok(server)
    }

    fn spawn(&mut self, position: f64, rng: &mut ChaCha8Rng) {
        let id = self.vehicles.len();
        let speed = self.speeds.sample(rng);
        let energy = rng.random_range(self.cfg.energy_init_min..=self.cfg.energy_init_max);
        let v = VehicleState::enter(
            id,
            &self.geom,
            position,
            speed,
            self.cfg.data_items_per_vehicle,
            energy,
        )
        .expect("validated speed and position");
        self.vehicles.push(v);
        self.initial_data.push(self.cfg.data_items_per_vehicle);
        self.uploads.push(0);
        self.snapshots.push(None);
    }

    pub fn server_id(&self) -> usize {
        self.server_id
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    /// Data items each vehicle started with, indexed by vehicle id.
    pub fn initial_data(&self) -> &[u64] {
        &self.initial_data
    }

    /// Times each vehicle has been selected, indexed by vehicle id.
    pub fn uploads(&self) -> &[u64] {
        &self.uploads
    }

    pub fn queue(&self) -> &CacheQueue {
        &self.queue
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn remaining_mb(&self, v: &VehicleState) -> f64 {
        v.remaining_data as f64 * self.cfg.item_mb
    }

    fn has_full_batch(&self, v: &VehicleState) -> bool {
        v.remaining_data >= self.cfg.items_per_batch()
    }

    /// Steps 1: refreshes snapshots of the active fleet and builds statuses.
    fn observe(&mut self) -> Vec<ResourceStatus> {
        let (noise_lo, noise_hi) = self.radio.noise_range;
        let (eps_lo, eps_hi) = self.radio.shadow_base_range;
        let mut statuses = Vec::with_capacity(self.vehicles.len());
        for i in 0..self.vehicles.len() {
            if !self.vehicles[i].active {
                self.snapshots[i] = None;
                continue;
            }
            let eps = self.channel_rng.random_range(eps_lo..=eps_hi);
            let noise = self.channel_rng.random_range(noise_lo..=noise_hi);
            let v = &self.vehicles[i];
            let dist = self.geom.distance_to_server(v.position);
            let snap =
                ChannelSnapshot::compute(&self.radio, v.speed, dist, eps, noise, self.cfg.batch_mb)
                    .expect("validated shadow base range");
            statuses.push(ResourceStatus {
                vehicle_id: v.id,
                remaining_data_mb: self.remaining_mb(v),
                comm_quality: snap.comm_quality,
                remaining_energy: v.remaining_energy,
                survivability: v.survivability,
            });
            self.snapshots[i] = Some(snap);
        }
        if self.radio.comm_quality_mode == CommQualityMode::Normalized {
            let mut quality: Vec<f64> = statuses.iter().map(|s| s.comm_quality).collect();
            normalize_comm_quality(&mut quality);
            for (s, q) in statuses.iter_mut().zip(quality) {
                s.comm_quality = q;
            }
        }
        statuses
    }

    /// Admission count for this slot given `available` eligible vehicles.
    fn admission_count(&self, available: usize) -> usize {
        if !self.scheme.uses_queue_count() {
            return 0;
        }
        let curve = &self.curve;
        let batch = self.cfg.batch_mb;
        let basis = self.cfg.utility_basis;
        optimal_n(
            self.queue.backlog_mb(),
            available,
            self.last_departures_mb,
            &self.drift,
            |n| curve.slot_utility(n, batch, basis),
        )
    }

    /// Runs one slot and returns its metrics row.
    pub fn step(&mut self) -> SlotMetrics {
        let statuses = self.observe();
        let active_vehicles = statuses.len();
        let available = statuses
            .iter()
            .filter(|s| s.remaining_data_mb >= self.cfg.batch_mb)
            .count();

        let n_star = self.admission_count(available);
        let decision: SelectionDecision = select(
            self.scheme,
            &statuses,
            n_star,
            self.cfg.batch_mb,
            self.slot,
            &mut self.scheme_rng,
        );

        let items = self.cfg.items_per_batch();
        for &id in &decision.selected_ids {
            let energy = self.snapshots[id].map_or(0.0, |s| s.tx_energy);
            let v = &mut self.vehicles[id];
            v.remaining_data -= items;
            v.remaining_energy = update_energy(v.remaining_energy, energy);
            v.recheck(&self.geom);
            self.uploads[id] += 1;
            self.queue.enqueue(Batch {
                vehicle_id: id,
                size_mb: self.cfg.batch_mb,
                arrival_slot: self.slot,
            });
        }
        self.cumulative_selected += decision.selected_ids.len() as u64;

        let vehicles = &self.vehicles;
        let snapshots = &self.snapshots;
        let departures = sample_departures(
            &mut self.queue,
            &self.departure_model,
            |id| {
                snapshots[id]
                    .filter(|_| vehicles[id].active)
                    .map(|s| s.shadow_corr)
            },
            &mut self.departure_rng,
        );

        let (accuracy, loss) = self.curve.record_training(decision.arrivals_mb);

        self.advance_fleet();

        let row = SlotMetrics {
            slot: self.slot,
            server_id: self.server_id,
            scheme: self.scheme,
            queue_backlog_mb: self.queue.backlog_mb(),
            n_star: decision.n_star,
            n_selected: decision.selected_ids.len(),
            arrivals_mb: decision.arrivals_mb,
            departures_mb: departures.mb,
            cumulative_selected: self.cumulative_selected,
            cumulative_trained_mb: self.curve.cumulative_data_mb,
            accuracy,
            loss,
            active_vehicles,
        };
        self.last_departures_mb = departures.mb;
        self.slot += 1;
        self.finished = self.queue.is_empty()
            && !self
                .vehicles
                .iter()
                .any(|v| v.active && self.has_full_batch(v));
        row
    }

    /// Step 8, plus re-entry of fresh vehicles when respawn is on.
    fn advance_fleet(&mut self) {
        let mut exits = 0;
        for v in self.vehicles.iter_mut().filter(|v| v.active) {
            v.advance_slot(&self.geom, self.cfg.slot_seconds);
            if !v.active {
                exits += 1;
            }
        }
        if self.cfg.respawn {
            let mut rng = self.respawn_rng.clone();
            for _ in 0..exits {
                self.spawn(0.0, &mut rng);
            }
            self.respawn_rng = rng;
        }
    }

    /// Steps until `max_slots` or quiescence.
    pub fn run(mut self) -> Vec<SlotMetrics> {
        let mut rows = Vec::with_capacity(self.cfg.max_slots as usize);
        while self.slot < self.cfg.max_slots && !self.finished {
            rows.push(self.step());
        }
        rows
    }
}

/// Full trace of server `server_id` under `cfg`.
pub fn run_server(cfg: &SimConfig, server_id: usize) -> Result<Vec<SlotMetrics>, ConfigError> {
    Ok(EdgeServer::new(cfg, server_id)?.run())
}

/// Per-server traces and their slot-wise mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: SimConfig,
    pub traces: Vec<Vec<SlotMetrics>>,
    pub aggregate: Vec<AggregateMetrics>,
}

/// Runs `cfg.n_servers` independent servers and averages them slot by slot.
pub fn run_experiment(cfg: &SimConfig) -> Result<Experiment, ConfigError> {
    cfg.validate()?;
    let ids: Vec<usize> = (0..cfg.n_servers).collect();

    #[cfg(feature = "parallel")]
    let traces: Vec<Vec<SlotMetrics>> = {
        use rayon::prelude::*;
        ids.par_iter()
            .map(|&i| run_server(cfg, i))
            .collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let traces: Vec<Vec<SlotMetrics>> = ids
        .iter()
        .map(|&i| run_server(cfg, i))
        .collect::<Result<_, _>>()?;

    let aggregate = aggregate(&traces);
    Ok(Experiment {
        config: cfg.clone(),
        traces,
        aggregate,
    })
}

/// Slot-wise mean over `traces`. A server that stopped early keeps
/// contributing its last stock values (backlog, cumulative counts, accuracy,
/// loss, active vehicles) with zero flows.
pub fn aggregate(traces: &[Vec<SlotMetrics>]) -> Vec<AggregateMetrics> {
    let Some(scheme) = traces.iter().find_map(|t| t.first()).map(|r| r.scheme) else {
        return Vec::new();
    };
    let len = traces.iter().map(Vec::len).max().unwrap_or(0);
    let n = traces.len() as f64;
    (0..len)
        .map(|t| {
            let mut acc = AggregateMetrics {
                slot: t as u64,
                scheme,
                queue_backlog_mb: 0.0,
                n_star: 0.0,
                n_selected: 0.0,
                arrivals_mb: 0.0,
                departures_mb: 0.0,
                cumulative_selected: 0.0,
                cumulative_trained_mb: 0.0,
                accuracy: 0.0,
                loss: 0.0,
                active_vehicles: 0.0,
            };
            for trace in traces {
                let Some(last) = trace.last() else {
                    continue;
                };
                let (row, live) = match trace.get(t) {
                    Some(r) => (r, true),
                    None => (last, false),
                };
                acc.queue_backlog_mb += row.queue_backlog_mb;
                acc.cumulative_selected += row.cumulative_selected as f64;
                acc.cumulative_trained_mb += row.cumulative_trained_mb;
                acc.accuracy += row.accuracy;
                acc.loss += row.loss;
                acc.active_vehicles += row.active_vehicles as f64;
                if live {
                    acc.n_star += row.n_star as f64;
                    acc.n_selected += row.n_selected as f64;
                    acc.arrivals_mb += row.arrivals_mb;
                    acc.departures_mb += row.departures_mb;
                }
            }
            for field in [
                &mut acc.queue_backlog_mb,
                &mut acc.n_star,
                &mut acc.n_selected,
                &mut acc.arrivals_mb,
                &mut acc.departures_mb,
                &mut acc.cumulative_selected,
                &mut acc.cumulative_trained_mb,
                &mut acc.accuracy,
                &mut acc.loss,
                &mut acc.active_vehicles,
            ] {
                *field /= n;
            }
            acc
        })
        .collect()
}
