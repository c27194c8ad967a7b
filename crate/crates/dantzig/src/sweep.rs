//! Parallel execution of benchmark sweeps.
//!
//! Cells run on a dedicated rayon pool. Every cell derives its instance from
//! its own seed, so the records do not depend on the number of workers or
//! on scheduling; only `wall_seconds` does.

use dantzig_core::bench::{record_order, run_cell, sweep_cells, BenchRecord, SweepConfig};
use dantzig_core::Result;
use rayon::prelude::*;

use crate::clock::StdClock;

pub const JOBS_ENV: &str = "DANTZIG_JOBS";

/// Worker count: the explicit value if given, else `DANTZIG_JOBS`, else the
/// number of physical cores.
pub fn resolve_jobs(explicit: Option<usize>) -> std::result::Result<usize, String> {
    if let Some(j) = explicit {
        return if j == 0 {
            Err("--jobs must be at least 1".into())
        } else {
            Ok(j)
        };
    }
    match std::env::var(JOBS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(j) if j > 0 => Ok(j),
            _ => Err(format!("{JOBS_ENV} must be a positive integer, got {v:?}")),
        },
        Err(_) => Ok(num_cpus::get_physical().max(1)),
    }
}

/// Runs every cell of `cfg` on `jobs` worker threads and returns the records
/// in `(method, m, σ, replicate)` order.
pub fn run_sweep_parallel(cfg: &SweepConfig, jobs: usize) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let cells = sweep_cells(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let clock = StdClock::new();
    let mut records: Vec<BenchRecord> = pool.install(|| cells.par_iter().map(|c| run_cell(cfg, c, &clock)).collect());
    records.sort_by(record_order);
    Ok(records)
}
