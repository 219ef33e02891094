//! Whole-plan evaluation: route an epoch's requests by a plan, place them in
//! every datacenter and account the four objectives.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dc_carbon, dc_energy, dc_water, CarbonBreakdown, EnergyBreakdown, ObjectiveVector, WaterBreakdown};
use crate::exec::Exec;
use crate::infrastructure::{Infrastructure, Node, TtftStatistic};
use crate::optimizer::SchedulingPlan;
use crate::perf::{ingress_latency, local_schedule, PendingRequest, PlacementOutcome};
use crate::workload::{EpochTrace, WorkloadError};

/// A request resolved against the infrastructure's bucket indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedRequest {
    pub request_id: u64,
    pub bucket: u32,
    pub region: u16,
    pub model: u16,
    pub input_tokens: u32,
    pub output_tokens: u32,
}

/// An epoch's requests in arrival order, ready for repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedEpoch {
    pub epoch: u32,
    pub requests: Vec<PreparedRequest>,
    pub bucket_counts: Vec<u64>,
}

impl PreparedEpoch {
    pub fn new(trace: &EpochTrace, infra: &Infrastructure) -> Result<Self, WorkloadError> {
        let mut bucket_counts = vec![0; infra.n_buckets()];
        let requests = trace
            .requests
            .iter()
            .map(|r| {
                let unknown = || WorkloadError::UnknownBucket {
                    request_id: r.request_id,
                    region: r.origin_region.clone(),
                    model: r.model_id.clone(),
                };
                let region = infra.region_idx(&r.origin_region).ok_or_else(unknown)?;
                let model = infra.model_idx(&r.model_id).ok_or_else(unknown)?;
                let bucket = infra.bucket(region, model);
                bucket_counts[bucket] += 1;
                Ok(PreparedRequest {
                    request_id: r.request_id,
                    bucket: bucket as u32,
                    region: region as u16,
                    model: model as u16,
                    input_tokens: r.input_tokens,
                    output_tokens: r.output_tokens,
                })
            })
            .collect::<Result<_, WorkloadError>>()?;
        Ok(Self {
            epoch: trace.epoch_index,
            requests,
            bucket_counts,
        })
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcState {
    pub nodes: Vec<Node>,
    /// Requests deferred by saturation, placed first next epoch.
    pub backlog: Vec<PendingRequest>,
}

/// Node state threaded from one epoch to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarryState {
    pub dcs: Vec<DcState>,
}

impl CarryState {
    pub fn initial(infra: &Infrastructure) -> Self {
        Self {
            dcs: infra
                .initial_nodes()
                .into_iter()
                .map(|nodes| DcState {
                    nodes,
                    backlog: Vec::new(),
                })
                .collect(),
        }
    }

    /// Requests placed in the last epoch plus those still waiting.
    pub fn queue_depth(&self, location: usize) -> u64 {
        let dc = &self.dcs[location];
        dc.nodes.iter().map(|n| u64::from(n.queue_depth)).sum::<u64>() + dc.backlog.len() as u64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DcBreakdown {
    pub location: usize,
    pub energy: EnergyBreakdown,
    pub cost: f64,
    pub water: WaterBreakdown,
    pub carbon: CarbonBreakdown,
    /// Requests counted towards TTFT at this location.
    pub requests: usize,
    pub ttft_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochEvaluation {
    pub objectives: ObjectiveVector,
    pub per_dc: Vec<DcBreakdown>,
    pub outcomes: Vec<PlacementOutcome>,
    pub carry: CarryState,
}

/// Column layout of the per-epoch breakdown export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub epoch: u32,
    pub location: String,
    pub it_kwh: f64,
    pub crac_kwh: f64,
    pub cooling_kwh: f64,
    pub support_kwh: f64,
    pub total_kwh: f64,
    pub cost_usd: f64,
    pub w_evap_l: f64,
    pub w_blow_l: f64,
    pub w_grid_l: f64,
    pub c_grid_kg: f64,
    pub c_water_kg: f64,
    pub ttft_mean_s: f64,
}

pub const BREAKDOWN_CSV_HEADER: [&str; 14] = [
    "epoch",
    "location",
    "it_kwh",
    "crac_kwh",
    "cooling_kwh",
    "support_kwh",
    "total_kwh",
    "cost_usd",
    "w_evap_l",
    "w_blow_l",
    "w_grid_l",
    "c_grid_kg",
    "c_water_kg",
    "ttft_mean_s",
];

impl BreakdownRow {
    pub fn new(epoch: u32, b: &DcBreakdown, infra: &Infrastructure) -> Self {
        Self {
            epoch,
            location: infra.datacenters[b.location].location_id.clone(),
            it_kwh: b.energy.it,
            crac_kwh: b.energy.crac,
            cooling_kwh: b.energy.cooling,
            support_kwh: b.energy.support,
            total_kwh: b.energy.total,
            cost_usd: b.cost,
            w_evap_l: b.water.evaporative,
            w_blow_l: b.water.blowdown,
            w_grid_l: b.water.grid,
            c_grid_kg: b.carbon.grid,
            c_water_kg: b.carbon.water_related,
            ttft_mean_s: b.ttft_mean,
        }
    }
}

fn bucket_rng(seed: u64, epoch: u32, bucket: usize) -> ChaCha8Rng {
    let mix = seed
        ^ (u64::from(epoch) << 32)
        ^ (bucket as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ChaCha8Rng::seed_from_u64(mix)
}

/// Integer counts proportional to `shares` summing to `n`: floors first, the
/// remainder to the largest fractional parts with seeded tie-breaking.
fn apportion(shares: &[f64], n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let raw: Vec<f64> = shares.iter().map(|p| p.max(0.0) * n as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let keys: Vec<u64> = shares.iter().map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..shares.len()).filter(|&l| shares[l] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (raw[a] - raw[a].floor(), raw[b] - raw[b].floor());
        fb.total_cmp(&fa).then(keys[a].cmp(&keys[b]))
    });
    for &l in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[l] += 1;
    }
    counts
}

/// Splits an epoch's requests over datacenters. The first `limits[b]`
/// requests of bucket `b` follow the plan; the rest go to the region's
/// nearest datacenter. Per-datacenter lists keep arrival order.
pub fn route_plan(
    plan: &SchedulingPlan,
    epoch: &PreparedEpoch,
    infra: &Infrastructure,
    seed: u64,
    limits: Option<&[u64]>,
) -> Vec<Vec<PendingRequest>> {
    let n_loc = infra.n_locations();
    let mut labels: Vec<Vec<u16>> = Vec::with_capacity(infra.n_buckets());
    for (b, &count) in epoch.bucket_counts.iter().enumerate() {
        let planned = limits.map_or(count, |l| l[b].min(count)) as usize;
        let mut rng = bucket_rng(seed, epoch.epoch, b);
        let counts = apportion(&plan.assignment[b], planned, &mut rng);
        let mut row: Vec<u16> = Vec::with_capacity(count as usize);
        for (l, &c) in counts.iter().enumerate() {
            row.extend(std::iter::repeat_n(l as u16, c));
        }
        row.shuffle(&mut rng);
        let nearest = infra.topology.nearest_datacenter(infra.bucket_parts(b).0) as u16;
        row.resize(count as usize, nearest);
        labels.push(row);
    }

    let mut cursor = vec![0usize; labels.len()];
    let mut routes: Vec<Vec<PendingRequest>> = vec![Vec::new(); n_loc];
    for r in &epoch.requests {
        let b = r.bucket as usize;
        let l = usize::from(labels[b][cursor[b]]);
        cursor[b] += 1;
        routes[l].push(PendingRequest {
            request_id: r.request_id,
            model: r.model,
            input_tokens: r.input_tokens,
            output_tokens: r.output_tokens,
            migration_one_way: ingress_latency(usize::from(r.region), l, &infra.topology),
            carried: false,
        });
    }
    routes
}

struct DcResult {
    breakdown: DcBreakdown,
    outcomes: Vec<PlacementOutcome>,
    state: DcState,
}

/// Places pre-routed requests (per datacenter, arrival order) on a copy of
/// `carry` and accounts every location.
pub fn evaluate_routed(
    routes: &[Vec<PendingRequest>],
    epoch: u32,
    infra: &Infrastructure,
    carry: &CarryState,
    exec: Exec,
) -> EpochEvaluation {
    let locations: Vec<usize> = (0..infra.n_locations()).collect();
    let results = exec.map(&locations, |&l| {
        let dc = &infra.datacenters[l];
        let prior = &carry.dcs[l];
        let mut nodes = prior.nodes.clone();
        let mut queue = prior.backlog.clone();
        queue.extend_from_slice(&routes[l]);
        let schedule = local_schedule(&queue, l, infra, &mut nodes);

        let e = epoch as usize;
        let energy = dc_energy(&nodes, dc, infra);
        let water = dc_water(&energy, dc, e, &infra.constants);
        let carbon = dc_carbon(&energy, &water, dc, e, infra.constants.literal_water_carbon);
        let counted: Vec<f64> = schedule
            .outcomes
            .iter()
            .filter(|o| o.counted)
            .map(|o| o.latency.ttft)
            .collect();
        let ttft_mean = if counted.is_empty() {
            0.0
        } else {
            counted.iter().sum::<f64>() / counted.len() as f64
        };
        DcResult {
            breakdown: DcBreakdown {
                location: l,
                energy,
                cost: energy.total * dc.tou_at(e),
                water,
                carbon,
                requests: counted.len(),
                ttft_mean,
            },
            outcomes: schedule.outcomes,
            state: DcState {
                nodes,
                backlog: schedule.unplaced,
            },
        }
    });

    let mut per_dc = Vec::with_capacity(results.len());
    let mut outcomes = Vec::new();
    let mut dcs = Vec::with_capacity(results.len());
    for r in results {
        per_dc.push(r.breakdown);
        outcomes.extend(r.outcomes);
        dcs.push(r.state);
    }
    let objectives = ObjectiveVector {
        ttft: ttft_statistic(&outcomes, infra.constants.ttft_statistic),
        carbon: per_dc.iter().map(|b| b.carbon.total).sum(),
        water: per_dc.iter().map(|b| b.water.total).sum(),
        cost: per_dc.iter().map(|b| b.cost).sum(),
    };
    EpochEvaluation {
        objectives,
        per_dc,
        outcomes,
        carry: CarryState { dcs },
    }
}

fn ttft_statistic(outcomes: &[PlacementOutcome], stat: TtftStatistic) -> f64 {
    let mut v: Vec<f64> = outcomes.iter().filter(|o| o.counted).map(|o| o.latency.ttft).collect();
    if v.is_empty() {
        return 0.0;
    }
    match stat {
        TtftStatistic::Mean => v.iter().sum::<f64>() / v.len() as f64,
        TtftStatistic::P95 => {
            v.sort_by(f64::total_cmp);
            let rank = (0.95 * v.len() as f64).ceil() as usize;
            v[rank.clamp(1, v.len()) - 1]
        }
    }
}

/// Routes `epoch` by `plan` and evaluates it. Pure in all inputs; `seed`
/// fixes the rounding of fractional assignments.
pub fn evaluate_plan(
    plan: &SchedulingPlan,
    epoch: &PreparedEpoch,
    infra: &Infrastructure,
    carry: &CarryState,
    seed: u64,
    exec: Exec,
) -> EpochEvaluation {
    let routes = route_plan(plan, epoch, infra, seed, None);
    evaluate_routed(&routes, epoch.epoch, infra, carry, exec)
}
