//! Reference config at 0.1x request scale over 96 epochs: each SLIT-m run
//! must not exceed either baseline on m, and SLIT-Balance must not be
//! dominated by either baseline.

use std::path::PathBuf;

use slit_core::sim::RunOptions;
use slit_core::sustainability::ObjectiveVector;
use slit_core::{load_config, run_simulation, SchedulerKind, SelectionPolicy};

use crate::common::ensure;

const SCALE: f64 = 0.1;
const EPOCHS: u32 = 96;
const SEED: u64 = 7;

pub fn reference_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.json")
}

pub fn run() -> Result<String, String> {
    let loaded = load_config(&reference_config()).map_err(|e| e.to_string())?;
    let total = |scheduler, policy| -> Result<ObjectiveVector, String> {
        let options = RunOptions {
            scheduler,
            policy,
            seed: SEED,
            epochs: Some(EPOCHS),
            scale: SCALE,
            ..Default::default()
        };
        let report = run_simulation(&loaded, &options).map_err(|e| e.to_string())?;
        ensure(report.epochs.len() == EPOCHS as usize, || {
            format!("{} emitted {} rows", options.run_label(), report.epochs.len())
        })?;
        Ok(report.totals.objectives)
    };
    let rr = total(SchedulerKind::RoundRobin, SelectionPolicy::Balance)?;
    let lq = total(SchedulerKind::LeastQueue, SelectionPolicy::Balance)?;

    let mut notes = Vec::new();
    for (k, policy) in [
        SelectionPolicy::Ttft,
        SelectionPolicy::Carbon,
        SelectionPolicy::Water,
        SelectionPolicy::Cost,
    ]
    .into_iter()
    .enumerate()
    {
        let slit = total(SchedulerKind::Slit, policy)?.get(k);
        let name = ObjectiveVector::NAMES[k];
        notes.push(format!("{name} {:.3}/{:.3}", slit / rr.get(k), slit / lq.get(k)));
        ensure(slit <= rr.get(k) && slit <= lq.get(k), || {
            format!("slit-{policy} {name} {slit} vs rr {} and least-queue {}", rr.get(k), lq.get(k))
        })?;
    }
    let balance = total(SchedulerKind::Slit, SelectionPolicy::Balance)?;
    for (name, b) in [("rr", rr), ("least-queue", lq)] {
        ensure(!b.dominates(&balance), || format!("{name} {b:?} dominates slit-balance {balance:?}"))?;
    }
    Ok(format!("slit-m / (rr, least-queue): {}; balance not dominated", notes.join(", ")))
}
