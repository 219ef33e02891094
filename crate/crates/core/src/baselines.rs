//! Comparison routers. These are simplified stand-ins, not reproductions of
//! any published scheduler.

use serde::{Deserialize, Serialize};

use crate::infrastructure::Infrastructure;
use crate::optimizer::SchedulingPlan;
use crate::sustainability::CarryState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// Uniform over all datacenters.
    GlobalRoundRobin,
    /// Mass inversely proportional to queue depth plus load already routed.
    LeastQueue,
    /// Everything to the region's nearest datacenter.
    NearestDatacenter,
}

pub fn baseline_plan(
    kind: BaselineKind,
    predicted: &[u64],
    infra: &Infrastructure,
    carry: &CarryState,
) -> SchedulingPlan {
    let (b, l) = (infra.n_buckets(), infra.n_locations());
    match kind {
        BaselineKind::GlobalRoundRobin => SchedulingPlan::uniform(b, l),
        BaselineKind::NearestDatacenter => {
            let targets: Vec<usize> = (0..b)
                .map(|k| infra.topology.nearest_datacenter(infra.bucket_parts(k).0))
                .collect();
            SchedulingPlan::from_targets(&targets, l)
        }
        BaselineKind::LeastQueue => {
            let queue: Vec<f64> = (0..l).map(|d| carry.queue_depth(d) as f64).collect();
            least_queue(&queue, predicted)
        }
    }
}

/// Buckets are routed in index order; each sees the predicted load of the
/// buckets before it.
fn least_queue(queue: &[f64], predicted: &[u64]) -> SchedulingPlan {
    let mut load = vec![0.0; queue.len()];
    let assignment = predicted
        .iter()
        .map(|&count| {
            let w: Vec<f64> = queue.iter().zip(&load).map(|(q, p)| 1.0 / (1.0 + q + p)).collect();
            let total: f64 = w.iter().sum();
            let row: Vec<f64> = w.iter().map(|x| x / total).collect();
            for (p, share) in load.iter_mut().zip(&row) {
                *p += count as f64 * share;
            }
            row
        })
        .collect();
    SchedulingPlan { assignment }
}
