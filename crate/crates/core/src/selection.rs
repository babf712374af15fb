//! Priority weights and the four vehicle-selection schemes.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::index;
use rand::Rng;

pub const DEFAULT_STATIC_K: usize = 5;

/// Resource statuses a vehicle reports to its server at the start of a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceStatus {
    pub vehicle_id: usize,
    pub remaining_data_mb: f64,
    pub comm_quality: f64,
    pub remaining_energy: f64,
    pub survivability: f64,
}

/// Outcome of one slot's selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionDecision {
    pub slot: u64,
    pub n_star: usize,
    pub selected_ids: Vec<usize>,
    pub arrivals_mb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Queue-aware count, highest-priority vehicles first.
    Proposed,
    /// Every eligible vehicle, every slot.
    Maximum,
    /// A fixed number of random vehicles per slot.
    Static { k: usize },
    /// Queue-aware count, vehicles chosen uniformly at random.
    Random,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Proposed,
        SchemeKind::Maximum,
        SchemeKind::Static {
            k: DEFAULT_STATIC_K,
        },
        SchemeKind::Random,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Proposed => "proposed",
            SchemeKind::Maximum => "maximum",
            SchemeKind::Static { .. } => "static",
            SchemeKind::Random => "random",
        }
    }

    /// Whether the scheme sizes its selection with the drift-plus-penalty count.
    pub fn uses_queue_count(&self) -> bool {
        matches!(self, SchemeKind::Proposed | SchemeKind::Random)
    }

    /// Parses a scheme name; `static` takes `static_k`.
    pub fn parse(name: &str, static_k: usize) -> Option<Self> {
        match name {
            "proposed" => Some(SchemeKind::Proposed),
            "maximum" => Some(SchemeKind::Maximum),
            "static" => Some(SchemeKind::Static { k: static_k }),
            "random" => Some(SchemeKind::Random),
            _ => None,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `w = (C_d * C_com) / (C_E * C_S)`, or 0 once survivability or energy is
/// exhausted.
pub fn priority(status: &ResourceStatus) -> f64 {
    if status.survivability == 0.0 || status.remaining_energy == 0.0 {
        return 0.0;
    }
    (status.remaining_data_mb * status.comm_quality)
        / (status.remaining_energy * status.survivability)
}

/// Descending weight, then ascending id.
fn by_priority(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Picks this slot's uploaders among `statuses`.
///
/// Only vehicles holding at least one full batch are eligible. `n_star` caps
/// the proposed and random schemes; the static scheme uses its own `k` and the
/// maximum scheme takes every eligible vehicle. The reported `n_star` is the
/// cap each scheme actually applied.
pub fn select<R: Rng + ?Sized>(
    scheme: SchemeKind,
    statuses: &[ResourceStatus],
    n_star: usize,
    batch_mb: f64,
    slot: u64,
    rng: &mut R,
) -> SelectionDecision {
    let eligible: Vec<&ResourceStatus> = statuses
        .iter()
        .filter(|s| s.remaining_data_mb >= batch_mb)
        .collect();
    let (cap, selected_ids) = match scheme {
        SchemeKind::Proposed => {
            let mut ranked: Vec<(f64, usize)> = eligible
                .iter()
                .map(|s| (priority(s), s.vehicle_id))
                .collect();
            ranked.sort_by(by_priority);
            let ids = ranked.into_iter().take(n_star).map(|(_, id)| id).collect();
            (n_star, ids)
        }
        SchemeKind::Maximum => (
            eligible.len(),
            eligible.iter().map(|s| s.vehicle_id).collect(),
        ),
        SchemeKind::Static { k } => (k, sample_ids(&eligible, k, rng)),
        SchemeKind::Random => (n_star, sample_ids(&eligible, n_star, rng)),
    };
    SelectionDecision {
        slot,
        n_star: cap,
        arrivals_mb: batch_mb * selected_ids.len() as f64,
        selected_ids,
    }
}

fn sample_ids<R: Rng + ?Sized>(
    eligible: &[&ResourceStatus],
    want: usize,
    rng: &mut R,
) -> Vec<usize> {
    let amount = want.min(eligible.len());
    index::sample(rng, eligible.len(), amount)
        .into_iter()
        .map(|i| eligible[i].vehicle_id)
        .collect()
}
