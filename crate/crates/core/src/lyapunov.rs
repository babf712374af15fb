//! Edge-server cache queue and the drift-plus-penalty admission count.
//!
//! The queue evolves as `Q(t+1) = max(Q(t) + lambda(t) - mu(t), 0)`. Each
//! slot the server admits the `n` maximizing
//!
//! ```text
//! V * U(n) + Q(t) * (C_n * n - mu(t))
//! ```
//!
//! over the `n` that keep `Q(t) + C_n * n` within capacity.

use std::collections::VecDeque;

use rand::Rng;

/// One vehicle's upload resident in the cache.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub vehicle_id: usize,
    pub size_mb: f64,
    pub arrival_slot: u64,
}

/// Bounded FCFS cache of uploaded batches.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheQueue {
    backlog_mb: f64,
    capacity_mb: f64,
    resident: VecDeque<Batch>,
}

impl CacheQueue {
    pub fn new(capacity_mb: f64) -> Self {
        Self {
            backlog_mb: 0.0,
            capacity_mb,
            resident: VecDeque::new(),
        }
    }

    pub fn backlog_mb(&self) -> f64 {
        self.backlog_mb
    }

    pub fn capacity_mb(&self) -> f64 {
        self.capacity_mb
    }

    pub fn batches(&self) -> impl ExactSizeIterator<Item = &Batch> {
        self.resident.iter()
    }

    pub fn len(&self) -> usize {
        self.resident.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resident.is_empty()
    }

    /// Appends a batch at the tail. The capacity is not enforced here: the
    /// maximum-selection baseline is allowed to overflow.
    pub fn enqueue(&mut self, batch: Batch) {
        self.backlog_mb += batch.size_mb;
        self.resident.push_back(batch);
    }
}

pub fn queue_update(q: f64, arrivals: f64, departures: f64) -> f64 {
    (q + arrivals - departures).max(0.0)
}

/// `Q^2 / 2`.
pub fn lyapunov_value(q: f64) -> f64 {
    0.5 * q * q
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftPenaltyConfig {
    /// Trade-off weight `V` on the utility term.
    pub tradeoff_v: f64,
    /// Data each selected vehicle uploads per slot, MB.
    pub batch_size_mb: f64,
    /// Queue capacity `Q_max`, MB.
    pub capacity_mb: f64,
}

pub fn arrivals_for(n: usize, cfg: &DriftPenaltyConfig) -> f64 {
    cfg.batch_size_mb * n as f64
}

/// Per-slot drift-plus-penalty objective for admitting `n` vehicles.
pub fn objective<U: Fn(usize) -> f64>(
    n: usize,
    q: f64,
    mu: f64,
    cfg: &DriftPenaltyConfig,
    utility: U,
) -> f64 {
    cfg.tradeoff_v * utility(n) + q * (arrivals_for(n, cfg) - mu)
}

/// Admission count for the slot: the objective's argmax over feasible
/// `n <= available`, ties going to the larger `n`.
///
/// Candidates are scanned upward and the scan stops at the first `n` that
/// would overflow the queue, so feasibility uses the pre-arrival backlog.
pub fn optimal_n<U: Fn(usize) -> f64>(
    q: f64,
    available: usize,
    mu_est: f64,
    cfg: &DriftPenaltyConfig,
    utility: U,
) -> usize {
    let mut best_n = 0;
    let mut best = f64::NEG_INFINITY;
    for n in 0..=available {
        if q + arrivals_for(n, cfg) > cfg.capacity_mb {
            break;
        }
        let value = objective(n, q, mu_est, cfg, &utility);
        if value >= best {
            best = value;
            best_n = n;
        }
    }
    best_n
}

/// Which resident batches leave the cache in a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepartureRule {
    /// Each scanned batch departs independently with probability `p`.
    Bernoulli { p: f64 },
    /// A scanned batch departs when its vehicle's shadow correlation exceeds
    /// `threshold`. Batches whose vehicle has left coverage always depart.
    ChannelGated { threshold: f64 },
}

/// Departure behaviour of the cache.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepartureModel {
    pub rule: DepartureRule,
    /// Only the oldest `service_window` batches are eligible each slot;
    /// `None` scans the whole queue.
    pub service_window: Option<usize>,
}

impl DepartureModel {
    pub fn bernoulli(p: f64) -> Self {
        Self {
            rule: DepartureRule::Bernoulli { p },
            service_window: None,
        }
    }

    pub fn with_window(mut self, window: Option<usize>) -> Self {
        self.service_window = window;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Departures {
    pub mb: f64,
    pub batches: Vec<Batch>,
}

/// Removes this slot's departing batches from `queue`, scanning in FIFO order.
///
/// `shadow_corr` looks up the current shadow correlation of a vehicle that is
/// still in coverage; it is consulted only by the channel-gated rule.
pub fn sample_departures<R, F>(
    queue: &mut CacheQueue,
    model: &DepartureModel,
    shadow_corr: F,
    rng: &mut R,
) -> Departures
where
    R: Rng + ?Sized,
    F: Fn(usize) -> Option<f64>,
{
    let window = model.service_window.unwrap_or(usize::MAX);
    let mut out = Departures::default();
    let mut survivors = VecDeque::with_capacity(queue.resident.len());
    for (i, batch) in queue.resident.drain(..).enumerate() {
        let departs = i < window
            && match model.rule {
                DepartureRule::Bernoulli { p } => rng.random::<f64>() < p,
                DepartureRule::ChannelGated { threshold } => {
                    shadow_corr(batch.vehicle_id).is_none_or(|a| a > threshold)
                }
            };
        if departs {
            out.mb += batch.size_mb;
            out.batches.push(batch);
        } else {
            survivors.push_back(batch);
        }
    }
    queue.resident = survivors;
    queue.backlog_mb = queue_update(queue.backlog_mb, 0.0, out.mb);
    out
}
