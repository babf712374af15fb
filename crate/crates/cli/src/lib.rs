//! Command-line front end: loads a config, runs one or all schemes and writes
//! a CSV bundle per scheme.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Parser, ValueEnum};
use vfeel_core::trace::write_bundle;
use vfeel_core::{run_experiment, Experiment, SchemeKind, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Proposed,
    Maximum,
    Static,
    Random,
}

impl SchemeArg {
    fn name(self) -> &'static str {
        match self {
            SchemeArg::Proposed => "proposed",
            SchemeArg::Maximum => "maximum",
            SchemeArg::Static => "static",
            SchemeArg::Random => "random",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vfeel",
    version,
    about = "Simulate vehicle selection for federated edge learning"
)]
pub struct Args {
    /// Flat `key = value` config file; omitted keys keep their defaults
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,

    /// Master seed
    #[arg(long, env = "FEEL_SEED")]
    pub seed: Option<u64>,

    /// Slot horizon
    #[arg(long)]
    pub slots: Option<u64>,

    /// Number of replicated edge servers
    #[arg(long)]
    pub servers: Option<usize>,

    /// Output directory; each scheme gets its own subdirectory
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,

    /// Run all four schemes under the same seed
    #[arg(long)]
    pub compare: bool,

    /// Extra config override, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl Args {
    /// Resolves the config: file, then `--set`, then the dedicated flags.
    pub fn resolve_config(&self) -> Result<SimConfig> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| anyhow!("override `{o}` is not KEY=VALUE"))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some(s) = self.scheme {
            pairs.push(("scheme".into(), s.name().into()));
        }
        if let Some(seed) = self.seed {
            pairs.push(("master_seed".into(), seed.to_string()));
        }
        if let Some(slots) = self.slots {
            pairs.push(("max_slots".into(), slots.to_string()));
        }
        if let Some(servers) = self.servers {
            pairs.push(("n_servers".into(), servers.to_string()));
        }
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => String::new(),
        };
        let cfg = SimConfig::parse(&text, pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        Ok(cfg)
    }
}

/// One summary line for a finished experiment.
pub fn summary_line(e: &Experiment) -> String {
    match e.aggregate.last() {
        Some(last) => format!(
            "{:<8} slots={} final_backlog_mb={} cumulative_selected={} final_accuracy={:.6}",
            e.config.scheme.name(),
            e.aggregate.len(),
            last.queue_backlog_mb,
            last.cumulative_selected,
            last.accuracy
        ),
        None => format!("{:<8} slots=0", e.config.scheme.name()),
    }
}

fn run_scheme(cfg: &SimConfig, out: &Path) -> Result<Experiment> {
    let experiment = run_experiment(cfg)?;
    let dir = out.join(cfg.scheme.name());
    write_bundle(&dir, &experiment)
        .with_context(|| format!("writing bundle to {}", dir.display()))?;
    Ok(experiment)
}

/// Runs the configured scheme, or all four with `--compare`, and returns the
/// summary lines in run order.
pub fn run(args: &Args) -> Result<Vec<String>> {
    let cfg = args.resolve_config()?;
    let schemes: Vec<SchemeKind> = if args.compare {
        SchemeKind::ALL.to_vec()
    } else {
        vec![cfg.scheme]
    };
    let mut lines = Vec::with_capacity(schemes.len());
    for scheme in schemes {
        let e = run_scheme(&cfg.with_scheme(scheme), &args.out)?;
        lines.push(summary_line(&e));
    }
    Ok(lines)
}
