//! CSV output for per-server traces and aggregates.
//!
//! Files are comma separated with a header row and `\n` line endings. Floats
//! are written with Rust's shortest round-trip decimal form, so parsing a
//! value back yields the identical `f64`.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::config::SimConfig;
use crate::selection::SchemeKind;
use crate::simulator::{AggregateMetrics, Experiment, SlotMetrics};

pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

pub const TRACE_HEADER: [&str; 13] = [
    "slot",
    "server_id",
    "scheme",
    "queue_backlog_mb",
    "n_star",
    "n_selected",
    "arrivals_mb",
    "departures_mb",
    "cumulative_selected",
    "cumulative_trained_mb",
    "accuracy",
    "loss",
    "active_vehicles",
];

pub const AGGREGATE_HEADER: [&str; 12] = [
    "slot",
    "scheme",
    "queue_backlog_mb",
    "n_star",
    "n_selected",
    "arrivals_mb",
    "departures_mb",
    "cumulative_selected",
    "cumulative_trained_mb",
    "accuracy",
    "loss",
    "active_vehicles",
];

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_trace<W: Write>(out: W, rows: &[SlotMetrics]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.slot.to_string(),
            r.server_id.to_string(),
            r.scheme.name().to_string(),
            r.queue_backlog_mb.to_string(),
            r.n_star.to_string(),
            r.n_selected.to_string(),
            r.arrivals_mb.to_string(),
            r.departures_mb.to_string(),
            r.cumulative_selected.to_string(),
            r.cumulative_trained_mb.to_string(),
            r.accuracy.to_string(),
            r.loss.to_string(),
            r.active_vehicles.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate<W: Write>(out: W, rows: &[AggregateMetrics]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.slot.to_string(),
            r.scheme.name().to_string(),
            r.queue_backlog_mb.to_string(),
            r.n_star.to_string(),
            r.n_selected.to_string(),
            r.arrivals_mb.to_string(),
            r.departures_mb.to_string(),
            r.cumulative_selected.to_string(),
            r.cumulative_trained_mb.to_string(),
            r.accuracy.to_string(),
            r.loss.to_string(),
            r.active_vehicles.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A per-server trace row as read back from CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceRecord {
    pub slot: u64,
    pub server_id: usize,
    pub scheme: String,
    pub queue_backlog_mb: f64,
    pub n_star: usize,
    pub n_selected: usize,
    pub arrivals_mb: f64,
    pub departures_mb: f64,
    pub cumulative_selected: u64,
    pub cumulative_trained_mb: f64,
    pub accuracy: f64,
    pub loss: f64,
    pub active_vehicles: usize,
}

impl TraceRecord {
    /// Rebuilds the in-memory row; `static_k` restores the static scheme's
    /// count, which the CSV does not carry.
    pub fn into_metrics(self, static_k: usize) -> Option<SlotMetrics> {
        Some(SlotMetrics {
            slot: self.slot,
            server_id: self.server_id,
            scheme: SchemeKind::parse(&self.scheme, static_k)?,
            queue_backlog_mb: self.queue_backlog_mb,
            n_star: self.n_star,
            n_selected: self.n_selected,
            arrivals_mb: self.arrivals_mb,
            departures_mb: self.departures_mb,
            cumulative_selected: self.cumulative_selected,
            cumulative_trained_mb: self.cumulative_trained_mb,
            accuracy: self.accuracy,
            loss: self.loss,
            active_vehicles: self.active_vehicles,
        })
    }
}

pub fn read_trace<R: Read>(input: R) -> csv::Result<Vec<TraceRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// An aggregate row as read back from CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct AggregateRecord {
    pub slot: u64,
    pub scheme: String,
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

pub fn read_aggregate<R: Read>(input: R) -> csv::Result<Vec<AggregateRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn server_file_name(server_id: usize) -> String {
    format!("server_{server_id:02}.csv")
}

/// Run manifest: the fully resolved config in its own format, headed by the
/// producing version. Parsing it back reproduces the run.
pub fn manifest_text(cfg: &SimConfig) -> String {
    format!(
        "# vfeel-core {} run manifest\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.to_text()
    )
}

/// Paths written by [`write_bundle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBundle {
    pub server_files: Vec<PathBuf>,
    pub aggregate_file: PathBuf,
    pub manifest_file: PathBuf,
}

/// Writes every per-server trace, the aggregate and the manifest into `dir`,
/// creating it if needed.
pub fn write_bundle(dir: &Path, experiment: &Experiment) -> io::Result<OutputBundle> {
    std::fs::create_dir_all(dir)?;
    let mut server_files = Vec::with_capacity(experiment.traces.len());
    for (i, trace) in experiment.traces.iter().enumerate() {
        let path = dir.join(server_file_name(i));
        write_trace(BufWriter::new(File::create(&path)?), trace)?;
        server_files.push(path);
    }
    let aggregate_file = dir.join(AGGREGATE_FILE);
    write_aggregate(
        BufWriter::new(File::create(&aggregate_file)?),
        &experiment.aggregate,
    )?;
    let manifest_file = dir.join(MANIFEST_FILE);
    std::fs::write(&manifest_file, manifest_text(&experiment.config))?;
    Ok(OutputBundle {
        server_files,
        aggregate_file,
        manifest_file,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(slot: u64, backlog: f64, acc: f64) -> SlotMetrics {
        SlotMetrics {
            slot,
            server_id: 2,
            scheme: SchemeKind::Static { k: 5 },
            queue_backlog_mb: backlog,
            n_star: 5,
            n_selected: 4,
            arrivals_mb: 40.0,
            departures_mb: 10.0,
            cumulative_selected: 4 * (slot + 1),
            cumulative_trained_mb: 40.0 * (slot + 1) as f64,
            accuracy: acc,
            loss: 1.0 - acc,
            active_vehicles: 97,
        }
    }

    #[test]
    fn header_and_line_endings() {
        let mut buf = Vec::new();
        write_trace(&mut buf, &[row(0, 30.0, 0.5)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.split('\n');
        assert_eq!(
            lines.next().unwrap(),
            "slot,server_id,scheme,queue_backlog_mb,n_star,n_selected,arrivals_mb,departures_mb,cumulative_selected,cumulative_trained_mb,accuracy,loss,active_vehicles"
        );
        assert_eq!(
            lines.next().unwrap(),
            "0,2,static,30,5,4,40,10,4,40,0.5,0.5,97"
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn manifest_reparses_to_same_config() {
        let mut cfg = SimConfig {
            master_seed: 77,
            ..SimConfig::default()
        };
        cfg.set("scheme", "random").unwrap();
        let text = manifest_text(&cfg);
        assert!(text.starts_with("# vfeel-core "));
        assert_eq!(SimConfig::parse(&text, []).unwrap(), cfg);
    }

    proptest! {
        #[test]
        fn floats_round_trip_exactly(backlog in 0.0f64..1e4, acc in 0.0f64..1.0, slot in 0u64..5000) {
            let r = row(slot, backlog, acc);
            let mut buf = Vec::new();
            write_trace(&mut buf, std::slice::from_ref(&r)).unwrap();
            let back = read_trace(buf.as_slice()).unwrap().remove(0).into_metrics(5).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
