//! Discrete-event comparison of decentralized, peer-to-peer and centralized
//! record storage, plus a static consensus property sheet.
//!
//! Latency and throughput come from the simulated clock, never from wall
//! time, so results are identical on every machine.

mod consensus;
mod sim;

use std::io::Write;

use rayon::prelude::*;

pub use consensus::{consensus_matrix, profile, ConsensusProfile};
pub use sim::{run, SimConfig, SimResult, StorageModel};

pub const DEFAULT_PATIENT_GRID: [usize; 5] = [100, 200, 300, 400, 500];
pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

pub const COMPARE_COLUMNS: [&str; 8] = [
    "model",
    "patients",
    "seed",
    "mean_latency_ms",
    "p95_latency_ms",
    "throughput_tps",
    "completed",
    "dropped",
];

/// Runs every (model, patient count, seed) cell with default parameters, in
/// model-major order. Cells run in parallel; each is independent.
pub fn compare(patients: &[usize], seeds: &[u64]) -> Result<Vec<SimResult>, String> {
    compare_with(patients, seeds, |cfg| cfg)
}

/// [`compare`] with a hook to adjust each cell's configuration.
pub fn compare_with(
    patients: &[usize],
    seeds: &[u64],
    tune: impl Fn(SimConfig) -> SimConfig + Sync,
) -> Result<Vec<SimResult>, String> {
    let cells: Vec<SimConfig> = StorageModel::ALL
        .iter()
        .flat_map(|&m| patients.iter().flat_map(move |&p| seeds.iter().map(move |&s| SimConfig::new(m, p, s))))
        .map(&tune)
        .collect();
    cells.par_iter().map(run).collect()
}

pub fn write_compare_csv(results: &[SimResult], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_COLUMNS)?;
    for r in results {
        w.write_record([
            r.model.as_str().to_string(),
            r.patients.to_string(),
            r.seed.to_string(),
            format!("{:.3}", r.mean_latency_ms),
            format!("{:.3}", r.p95_latency_ms),
            format!("{:.3}", r.throughput_tps),
            r.completed.to_string(),
            r.dropped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean over seeds of a per-cell statistic, keyed by (model, patients).
pub fn seed_means(results: &[SimResult], stat: impl Fn(&SimResult) -> f64) -> Vec<(StorageModel, usize, f64)> {
    let mut keys: Vec<(StorageModel, usize)> = results.iter().map(|r| (r.model, r.patients)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(m, p)| {
            let vals: Vec<f64> = results.iter().filter(|r| r.model == m && r.patients == p).map(&stat).collect();
            (m, p, vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect()
}
