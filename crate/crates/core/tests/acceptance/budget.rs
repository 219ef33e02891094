//! With a 5 s time budget on the reference config, one epoch of
//! optimization returns within 6 s and its archive is non-dominated.

use std::time::{Duration, Instant};

use slit_core::exec::Exec;
use slit_core::optimizer::{run_epoch, EpochProblem, OptimizerParams, PlanEvaluator};
use slit_core::sustainability::{CarryState, PreparedEpoch};
use slit_core::workload::generate_trace;
use slit_core::load_config;

use crate::common::ensure;
use crate::ordering::reference_config;

const BUDGET_S: f64 = 5.0;
const LIMIT: Duration = Duration::from_secs(6);
/// Mid-afternoon at the default peak hour, the busiest epoch of the day.
const EPOCH: usize = 56;

pub fn run() -> Result<String, String> {
    let loaded = load_config(&reference_config()).map_err(|e| e.to_string())?;
    let infra = &loaded.infra;
    let traces = generate_trace(&loaded.config.trace_gen, 1).map_err(|e| e.to_string())?;
    let epoch = PreparedEpoch::new(&traces[EPOCH], infra).map_err(|e| e.to_string())?;
    let carry = CarryState::initial(infra);
    let evaluator = PlanEvaluator {
        infra,
        epoch: &epoch,
        carry: &carry,
        seed: 9,
        exec: Exec::default(),
    };
    let params = OptimizerParams {
        gen: 1_000_000,
        time_budget: BUDGET_S,
        ..loaded.config.optimizer.clone()
    };
    let problem = EpochProblem {
        evaluator: &evaluator,
        predicted: &epoch.bucket_counts,
        n_buckets: infra.n_buckets(),
        n_locations: infra.n_locations(),
    };
    let start = Instant::now();
    let search = run_epoch(&problem, &params, 4);
    let elapsed = start.elapsed();

    let objs = search.archive.objectives();
    for (i, a) in objs.iter().enumerate() {
        for (j, b) in objs.iter().enumerate() {
            ensure(i == j || !a.dominates(b), || format!("archive entry {i} dominates {j}"))?;
        }
    }
    let detail = format!(
        "{} requests, returned in {:.2} s after {} iterations, {} evaluations, archive {}",
        epoch.requests.len(),
        elapsed.as_secs_f64(),
        search.iterations,
        search.evaluations,
        objs.len()
    );
    ensure(search.budget_exhausted, || format!("budget never bound: {detail}"))?;
    ensure(elapsed <= LIMIT, || format!("over {LIMIT:?}: {detail}"))?;
    Ok(detail)
}
