use crate::infrastructure::Infrastructure;
use crate::perf::PendingRequest;
use crate::sustainability::{route_plan, PreparedEpoch};

use super::SchedulingPlan;

#[derive(Debug, Clone, PartialEq)]
pub struct FallbackRouting {
    /// Per-datacenter request lists in arrival order.
    pub routes: Vec<Vec<PendingRequest>>,
    /// Per bucket: observed requests beyond the prediction.
    pub missed: Vec<u64>,
}

impl FallbackRouting {
    pub fn missed_total(&self) -> u64 {
        self.missed.iter().sum()
    }
}

/// Routes the observed epoch: per bucket, the first `predicted` arrivals
/// follow `plan`, later arrivals go to the region's nearest datacenter.
pub fn fallback_missed(
    predicted: &[u64],
    observed: &PreparedEpoch,
    plan: &SchedulingPlan,
    infra: &Infrastructure,
    seed: u64,
) -> FallbackRouting {
    let missed = observed
        .bucket_counts
        .iter()
        .zip(predicted)
        .map(|(&o, &p)| o.saturating_sub(p))
        .collect();
    FallbackRouting {
        routes: route_plan(plan, observed, infra, seed, Some(predicted)),
        missed,
    }
}
