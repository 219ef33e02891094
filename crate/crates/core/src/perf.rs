//! Time-to-first-token components and intra-datacenter placement.
//!
//! TTFT of a request is `load + 2 * migration + exec_time / output_tokens`:
//! loading the model on a cold node costs `param_memory / load_bandwidth`,
//! migration is `hops * media_latency` each way, and processing is linear in
//! the request's total token count.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infrastructure::{Infrastructure, Node, NodeType, PowerState, Topology};
use crate::workload::{LlmModelSpec, Request};

#[derive(Debug, Error, PartialEq)]
pub enum PerfError {
    #[error("node type {node_type} ({capacity} B) cannot hold model {model} ({needed} B)")]
    InfeasibleNode {
        model: String,
        node_type: String,
        needed: u64,
        capacity: u64,
    },
    #[error("node type {node_type} has no throughput for model {model}")]
    MissingThroughput { model: String, node_type: String },
    #[error("unknown location index {0}")]
    UnknownLocation(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub load: f64,
    pub migration_one_way: f64,
    pub process: f64,
    pub ttft: f64,
}

impl LatencyBreakdown {
    pub fn new(load: f64, migration_one_way: f64, process: f64) -> Self {
        Self {
            load,
            migration_one_way,
            process,
            ttft: load + 2.0 * migration_one_way + process,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementOutcome {
    pub request_id: u64,
    pub location: usize,
    /// None when the datacenter was saturated and the request was deferred.
    pub node_id: Option<u32>,
    pub latency: LatencyBreakdown,
    pub reassigned: bool,
    pub exec_time: f64,
    /// Could not be placed this epoch; queued for the next one.
    pub deferred: bool,
    /// Contributes to this epoch's TTFT statistic. False for requests carried
    /// over from a previous epoch, which were already charged when deferred.
    pub counted: bool,
}

/// Model loading time; zero on a node that already holds the model.
pub fn load_overhead(model: &LlmModelSpec, node_type: &NodeType, warm: bool) -> f64 {
    if warm {
        0.0
    } else {
        model.param_memory() as f64 / node_type.load_bandwidth
    }
}

/// One-way latency between two datacenters.
pub fn migration_latency(src: usize, dst: usize, topo: &Topology) -> Result<f64, PerfError> {
    let n = topo.hop_matrix.len();
    if src >= n {
        return Err(PerfError::UnknownLocation(src));
    }
    if dst >= n {
        return Err(PerfError::UnknownLocation(dst));
    }
    Ok(f64::from(topo.hop_matrix[src][dst]) * topo.media_latency)
}

/// One-way latency from a region's ingress to a datacenter.
pub fn ingress_latency(region: usize, dst: usize, topo: &Topology) -> f64 {
    f64::from(topo.origin_hops[region][dst]) * topo.media_latency
}

pub fn ttft(
    request: &Request,
    model: &LlmModelSpec,
    node_type: &NodeType,
    warm: bool,
    migration_one_way: f64,
) -> Result<LatencyBreakdown, PerfError> {
    let needed = model.param_memory() + model.kv_bytes_per_token;
    if needed > node_type.mem_capacity() {
        return Err(PerfError::InfeasibleNode {
            model: model.model_id.clone(),
            node_type: node_type.type_id.clone(),
            needed,
            capacity: node_type.mem_capacity(),
        });
    }
    let throughput = *node_type
        .throughput
        .get(&model.model_id)
        .ok_or_else(|| PerfError::MissingThroughput {
            model: model.model_id.clone(),
            node_type: node_type.type_id.clone(),
        })?;
    let exec = request.total_tokens() as f64 / throughput;
    Ok(LatencyBreakdown::new(
        load_overhead(model, node_type, warm),
        migration_one_way,
        exec / f64::from(request.output_tokens),
    ))
}

/// A request already routed to a datacenter, reduced to what placement
/// needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendingRequest {
    pub request_id: u64,
    /// Index into [`Infrastructure::models`].
    pub model: u16,
    pub input_tokens: u32,
    pub output_tokens: u32,
    pub migration_one_way: f64,
    /// Deferred from an earlier epoch.
    pub carried: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalSchedule {
    pub outcomes: Vec<PlacementOutcome>,
    /// Requests that did not fit anywhere; they go to the next epoch.
    pub unplaced: Vec<PendingRequest>,
}

/// Places `requests` (arrival order, carried requests first) on the nodes of
/// datacenter `location` and applies the power policy.
///
/// Each model has its own weighted round-robin cycle over the nodes able to
/// host it; a node takes as many consecutive turns as its throughput
/// multiple of the slowest eligible type. A request whose peak footprint does
/// not fit on the cycled node goes to the next node in the cycle that fits
/// and pays one extra model load. Nodes that receive work are ON; drained
/// nodes go IDLE and then OFF after `idle_epochs_to_off` empty epochs.
pub fn local_schedule(
    requests: &[PendingRequest],
    location: usize,
    infra: &Infrastructure,
    nodes: &mut [Node],
) -> LocalSchedule {
    let dc = &infra.datacenters[location];
    let penalty = infra.epoch_length_s;
    for n in nodes.iter_mut() {
        n.committed_memory = 0;
        n.queue_depth = 0;
    }
    let mut cursors = vec![(0usize, 0u32); infra.models.len()];
    let mut out = LocalSchedule {
        outcomes: Vec::with_capacity(requests.len()),
        unplaced: Vec::new(),
    };

    for req in requests {
        let m = usize::from(req.model);
        let model = &infra.models[m];
        let eligible = &dc.eligible[m];
        let slots = &dc.slots[m];
        let kv = u64::from(req.output_tokens) * model.kv_bytes_per_token;
        let fits = |node: &Node| -> Option<u64> {
            let busy = node.queue_depth > 0;
            if busy && node.loaded_model != Some(req.model) {
                return None;
            }
            let need = if busy { kv } else { kv + model.param_memory() };
            let cap = infra.node_types[usize::from(node.type_idx)].mem_capacity();
            (node.committed_memory + need <= cap).then_some(need)
        };

        let (pos, used) = cursors[m];
        cursors[m] = if used + 1 >= slots[pos] {
            ((pos + 1) % eligible.len(), 0)
        } else {
            (pos, used + 1)
        };
        let mut chosen = None;
        for k in 0..eligible.len() {
            let id = eligible[(pos + k) % eligible.len()] as usize;
            if let Some(need) = fits(&nodes[id]) {
                chosen = Some((id, need, k > 0));
                break;
            }
        }

        let tokens = u64::from(req.input_tokens) + u64::from(req.output_tokens);
        match chosen {
            Some((id, need, reassigned)) => {
                let node = &mut nodes[id];
                let ty = usize::from(node.type_idx);
                let node_type = &infra.node_types[ty];
                let warm = node.loaded_model == Some(req.model);
                let mut load = load_overhead(model, node_type, warm);
                if reassigned {
                    load += load_overhead(model, node_type, false);
                }
                node.loaded_model = Some(req.model);
                node.committed_memory += need;
                node.queue_depth += 1;
                let exec_time = tokens as f64 / infra.throughput[ty][m];
                let latency = LatencyBreakdown::new(
                    load,
                    req.migration_one_way,
                    exec_time / f64::from(req.output_tokens),
                );
                out.outcomes.push(PlacementOutcome {
                    request_id: req.request_id,
                    location,
                    node_id: Some(node.node_id),
                    latency,
                    reassigned,
                    exec_time,
                    deferred: false,
                    counted: !req.carried,
                });
            }
            None => {
                // Charged now as one epoch of waiting plus a cold start on
                // the cycled node; served next epoch without being re-counted.
                let ty = usize::from(dc.layout[eligible[pos] as usize]);
                let exec_time = tokens as f64 / infra.throughput[ty][m];
                let latency = LatencyBreakdown::new(
                    penalty + load_overhead(model, &infra.node_types[ty], false),
                    req.migration_one_way,
                    exec_time / f64::from(req.output_tokens),
                );
                out.outcomes.push(PlacementOutcome {
                    request_id: req.request_id,
                    location,
                    node_id: None,
                    latency,
                    reassigned: false,
                    exec_time,
                    deferred: true,
                    counted: !req.carried,
                });
                out.unplaced.push(PendingRequest { carried: true, ..*req });
            }
        }
    }

    let threshold = infra.constants.idle_epochs_to_off;
    for n in nodes.iter_mut() {
        if n.queue_depth > 0 {
            n.power_state = PowerState::On;
            n.idle_epochs = 0;
        } else if n.power_state != PowerState::Off {
            n.idle_epochs += 1;
            if n.idle_epochs > threshold {
                n.power_state = PowerState::Off;
                n.loaded_model = None;
                n.idle_epochs = 0;
            } else {
                n.power_state = PowerState::Idle;
            }
        }
    }
    out
}
