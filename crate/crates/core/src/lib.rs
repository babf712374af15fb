//! Slot-based simulation of queue-aware vehicle selection for federated edge
//! learning.
//!
//! Each edge server owns a bounded FCFS cache queue. Every slot it picks how
//! many vehicles may upload (a drift-plus-penalty argmax under the queue
//! capacity), ranks vehicles by a resource-status priority, enqueues the
//! uploaded batches, drains a random amount of the queue, and feeds the
//! uploaded data into a learning-curve accuracy surrogate.
//!
//! Module map:
//! - [`mobility`]: speed sampling, positions, survivability.
//! - [`channel`]: Doppler, path loss, shadow correlation, rate/power, energy.
//! - [`lyapunov`]: cache queue, drift-plus-penalty objective, departures.
//! - [`learning`]: learning-curve utility and accuracy/loss tracking.
//! - [`selection`]: priority weights and the four selection schemes.
//! - [`simulator`]: per-server slot loop and multi-server experiments.
//! - [`config`] and [`trace`]: the flat config format and CSV output.

pub mod channel;
pub mod config;
pub mod error;
pub mod learning;
pub mod lyapunov;
pub mod mobility;
pub mod rng;
pub mod selection;
pub mod simulator;
pub mod trace;

pub use config::SimConfig;
pub use error::{ConfigError, ModelError};
pub use selection::SchemeKind;
pub use simulator::{
    run_experiment, run_server, AggregateMetrics, EdgeServer, Experiment, SlotMetrics,
};
