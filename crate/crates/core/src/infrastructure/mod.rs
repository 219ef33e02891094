//! Datacenters, heterogeneous GPU nodes, topology and per-location series.

mod config;
#[doc(hidden)]
pub mod fixtures;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub use config::{
    load_config, parse_config, ConfigError, Constants, DatacenterConfig, LoadedConfig, SimConfig,
    TopologyConfig, TtftStatistic,
};

use crate::workload::LlmModelSpec;

/// A node flavour: `gpu_count` GPUs of one kind pooling their memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeType {
    pub type_id: String,
    pub gpu_count: u32,
    /// Bytes per GPU.
    pub gpu_mem_each: u64,
    /// Thermal design power of the whole node, watts.
    pub tdp: f64,
    /// Host-to-GPU model loading bandwidth, bytes/second.
    pub load_bandwidth: f64,
    /// Tokens/second per model id.
    pub throughput: BTreeMap<String, f64>,
}

impl NodeType {
    /// Pooled memory of all GPUs in the node.
    pub fn mem_capacity(&self) -> u64 {
        u64::from(self.gpu_count) * self.gpu_mem_each
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PowerState {
    On,
    Idle,
    Off,
}

/// Mutable state of one node. Owned by the simulation's carry state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub node_id: u32,
    /// Index into [`Infrastructure::node_types`].
    pub type_idx: u16,
    pub power_state: PowerState,
    /// Index into [`Infrastructure::models`].
    pub loaded_model: Option<u16>,
    pub committed_memory: u64,
    pub queue_depth: u32,
    /// Consecutive epochs without work while powered.
    pub idle_epochs: u32,
}

impl Node {
    pub fn off(node_id: u32, type_idx: u16) -> Self {
        Self {
            node_id,
            type_idx,
            power_state: PowerState::Off,
            loaded_model: None,
            committed_memory: 0,
            queue_depth: 0,
            idle_epochs: 0,
        }
    }
}

/// Fraction of TDP drawn in each power state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerStateRatios {
    pub on: f64,
    pub idle: f64,
    pub off: f64,
}

impl Default for PowerStateRatios {
    fn default() -> Self {
        Self {
            on: 1.0,
            idle: 0.3,
            off: 0.0,
        }
    }
}

impl PowerStateRatios {
    pub fn ratio(&self, state: PowerState) -> f64 {
        match state {
            PowerState::On => self.on,
            PowerState::Idle => self.idle,
            PowerState::Off => self.off,
        }
    }
}

/// Runtime view of one location: static parameters plus the node layout
/// and per-model round-robin tables derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Datacenter {
    pub location_id: String,
    pub region: String,
    pub cop: f64,
    pub tou_series: Vec<f64>,
    pub ci_series: Vec<f64>,
    pub wi_series: Vec<f64>,
    pub blowdown_ratio: f64,
    pub ei_potable: f64,
    pub ei_waste: f64,
    /// Node type index of every node, by node id.
    pub layout: Vec<u16>,
    /// Per model: node ids able to host it, in round-robin order.
    pub eligible: Vec<Vec<u32>>,
    /// Per model, parallel to `eligible`: consecutive round-robin turns.
    pub slots: Vec<Vec<u32>>,
}

fn cyclic(series: &[f64], epoch: usize) -> f64 {
    series[epoch % series.len()]
}

impl Datacenter {
    pub fn tou_at(&self, epoch: usize) -> f64 {
        cyclic(&self.tou_series, epoch)
    }

    pub fn ci_at(&self, epoch: usize) -> f64 {
        cyclic(&self.ci_series, epoch)
    }

    pub fn wi_at(&self, epoch: usize) -> f64 {
        cyclic(&self.wi_series, epoch)
    }

    pub fn n_nodes(&self) -> usize {
        self.layout.len()
    }

    pub fn initial_nodes(&self) -> Vec<Node> {
        self.layout
            .iter()
            .enumerate()
            .map(|(i, &t)| Node::off(i as u32, t))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub hop_matrix: Vec<Vec<u32>>,
    /// Seconds per hop.
    pub media_latency: f64,
    /// Per region index: hops from the region's ingress to each datacenter.
    pub origin_hops: Vec<Vec<u32>>,
}

impl Topology {
    /// Datacenter with the fewest ingress hops from `region`; ties go to the
    /// lowest index.
    pub fn nearest_datacenter(&self, region: usize) -> usize {
        let row = &self.origin_hops[region];
        (0..row.len()).min_by_key(|&d| (row[d], d)).unwrap_or(0)
    }
}

/// Validated, immutable infrastructure shared by every component.
#[derive(Debug, Clone)]
pub struct Infrastructure {
    pub models: Vec<LlmModelSpec>,
    pub node_types: Vec<NodeType>,
    pub datacenters: Vec<Datacenter>,
    pub topology: Topology,
    pub ratios: PowerStateRatios,
    pub constants: Constants,
    /// Origin regions, sorted.
    pub regions: Vec<String>,
    pub epoch_length_s: f64,
    /// `throughput[type][model]`, tokens/second.
    pub throughput: Vec<Vec<f64>>,
    model_index: HashMap<String, usize>,
    region_index: HashMap<String, usize>,
}

impl Infrastructure {
    pub fn n_locations(&self) -> usize {
        self.datacenters.len()
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    /// Plans are indexed by (region, model) buckets.
    pub fn n_buckets(&self) -> usize {
        self.regions.len() * self.models.len()
    }

    pub fn bucket(&self, region: usize, model: usize) -> usize {
        region * self.models.len() + model
    }

    pub fn bucket_parts(&self, bucket: usize) -> (usize, usize) {
        (bucket / self.models.len(), bucket % self.models.len())
    }

    pub fn bucket_label(&self, bucket: usize) -> String {
        let (r, m) = self.bucket_parts(bucket);
        format!("{}/{}", self.regions[r], self.models[m].model_id)
    }

    pub fn model_idx(&self, model_id: &str) -> Option<usize> {
        self.model_index.get(model_id).copied()
    }

    pub fn region_idx(&self, region: &str) -> Option<usize> {
        self.region_index.get(region).copied()
    }

    pub fn bucket_of(&self, region: &str, model_id: &str) -> Option<usize> {
        Some(self.bucket(self.region_idx(region)?, self.model_idx(model_id)?))
    }

    /// Fresh node state for every datacenter: all nodes OFF.
    pub fn initial_nodes(&self) -> Vec<Vec<Node>> {
        self.datacenters.iter().map(Datacenter::initial_nodes).collect()
    }
}
