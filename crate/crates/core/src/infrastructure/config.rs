//! The top-level JSON configuration file and its validation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{Datacenter, Infrastructure, NodeType, PowerStateRatios, Topology};
use crate::optimizer::OptimizerParams;
use crate::workload::{LlmModelSpec, PredictorConfig, TraceGenConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config does not parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config at `{key}`: {constraint}")]
    Invalid { key: String, constraint: String },
}

fn invalid<T>(key: impl Into<String>, constraint: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid {
        key: key.into(),
        constraint: constraint.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TtftStatistic {
    #[default]
    Mean,
    P95,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constants {
    /// Energy absorbed per litre evaporated, MJ/L.
    pub h_water: f64,
    /// Epochs a drained node stays IDLE before it is switched OFF.
    pub idle_epochs_to_off: u32,
    pub ttft_statistic: TtftStatistic,
    /// Charge evaporative + blowdown water at the potable intensity and grid
    /// water at the wastewater intensity. When false, all make-up water is
    /// potable, blowdown is also charged at the wastewater intensity and grid
    /// water carries no treatment energy.
    pub literal_water_carbon: bool,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            h_water: 2.26,
            idle_epochs_to_off: 1,
            ttft_statistic: TtftStatistic::Mean,
            literal_water_carbon: true,
        }
    }
}

fn default_ei_potable() -> f64 {
    0.005
}

fn default_ei_waste() -> f64 {
    0.002
}

fn default_media_latency() -> f64 {
    0.010
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatacenterConfig {
    pub location_id: String,
    pub region: String,
    /// Node count per node type id.
    pub node_counts: BTreeMap<String, u32>,
    pub cop: f64,
    /// $/kWh per epoch.
    pub tou_series: Vec<f64>,
    /// kg CO2/kWh per epoch.
    pub ci_series: Vec<f64>,
    /// L/kWh per epoch.
    pub wi_series: Vec<f64>,
    pub blowdown_ratio: f64,
    /// kWh/L to supply potable water.
    #[serde(default = "default_ei_potable")]
    pub ei_potable: f64,
    /// kWh/L to treat wastewater.
    #[serde(default = "default_ei_waste")]
    pub ei_waste: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub hop_matrix: Vec<Vec<u32>>,
    #[serde(default = "default_media_latency")]
    pub media_latency: f64,
    /// Region -> hops from that region's ingress to each datacenter.
    pub origin_hops: BTreeMap<String, Vec<u32>>,
}

/// Everything a run needs, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub models: Vec<LlmModelSpec>,
    pub node_types: Vec<NodeType>,
    pub datacenters: Vec<DatacenterConfig>,
    pub topology: TopologyConfig,
    #[serde(default)]
    pub power_ratios: PowerStateRatios,
    #[serde(default)]
    pub trace_gen: TraceGenConfig,
    #[serde(default)]
    pub optimizer: OptimizerParams,
    #[serde(default)]
    pub predictor: PredictorConfig,
    #[serde(default)]
    pub constants: Constants,
}

/// A validated configuration, its resolved infrastructure and the list of
/// defaults that were filled in for omitted keys.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: SimConfig,
    pub infra: Infrastructure,
    pub applied_defaults: Vec<String>,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let raw: Value = serde_json::from_str(text)?;
    let config: SimConfig = serde_json::from_value(raw.clone())?;
    let applied_defaults = applied_defaults(&raw, &config);
    let infra = config.resolve()?;
    Ok(LoadedConfig {
        config,
        infra,
        applied_defaults,
    })
}

/// Lists `section.key = value` for every defaultable key absent from `raw`.
fn applied_defaults(raw: &Value, cfg: &SimConfig) -> Vec<String> {
    let mut out = Vec::new();
    let sections: [(&str, Value); 5] = [
        ("power_ratios", serde_json::to_value(cfg.power_ratios).unwrap()),
        ("trace_gen", serde_json::to_value(&cfg.trace_gen).unwrap()),
        ("optimizer", serde_json::to_value(&cfg.optimizer).unwrap()),
        ("predictor", serde_json::to_value(&cfg.predictor).unwrap()),
        ("constants", serde_json::to_value(&cfg.constants).unwrap()),
    ];
    for (name, resolved) in sections {
        let given = raw.get(name).and_then(Value::as_object);
        if let Value::Object(fields) = resolved {
            for (k, v) in fields {
                if !given.is_some_and(|g| g.contains_key(&k)) {
                    out.push(format!("{name}.{k} = {v}"));
                }
            }
        }
    }
    if raw.pointer("/topology/media_latency").is_none() {
        out.push(format!("topology.media_latency = {}", cfg.topology.media_latency));
    }
    if let Some(dcs) = raw.get("datacenters").and_then(Value::as_array) {
        for (i, dc) in dcs.iter().enumerate() {
            for (k, v) in [("ei_potable", cfg.datacenters[i].ei_potable), ("ei_waste", cfg.datacenters[i].ei_waste)] {
                if dc.get(k).is_none() {
                    out.push(format!("datacenters[{i}].{k} = {v}"));
                }
            }
        }
    }
    out
}

fn check_series(key: String, s: &[f64], horizon: u32) -> Result<(), ConfigError> {
    if s.is_empty() {
        return invalid(key, "series must not be empty");
    }
    if s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return invalid(key, "series values must be finite and >= 0");
    }
    if s.len() < horizon as usize {
        warn!("{key} has {} values for a {horizon}-epoch horizon; repeating cyclically", s.len());
    }
    Ok(())
}

/// Interleaves node types so that consecutive node ids cycle through types.
fn interleave(counts: &[(u16, u32)]) -> Vec<u16> {
    let mut left: Vec<(u16, u32)> = counts.to_vec();
    let mut layout = Vec::with_capacity(counts.iter().map(|c| c.1 as usize).sum());
    while left.iter().any(|c| c.1 > 0) {
        for (t, n) in left.iter_mut() {
            if *n > 0 {
                layout.push(*t);
                *n -= 1;
            }
        }
    }
    layout
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validates every invariant and cross reference and builds the runtime
    /// [`Infrastructure`].
    pub fn resolve(&self) -> Result<Infrastructure, ConfigError> {
        if self.models.is_empty() {
            return invalid("models", "at least one model is required");
        }
        let mut model_index = HashMap::new();
        for (i, m) in self.models.iter().enumerate() {
            m.validate().or_else(|c| invalid(format!("models[{i}]"), c))?;
            if model_index.insert(m.model_id.clone(), i).is_some() {
                return invalid(format!("models[{i}].model_id"), "duplicate model id");
            }
        }
        if self.models.len() > usize::from(u16::MAX) {
            return invalid("models", "too many models");
        }

        if self.node_types.is_empty() {
            return invalid("node_types", "at least one node type is required");
        }
        let mut type_index = HashMap::new();
        let mut throughput = Vec::with_capacity(self.node_types.len());
        for (i, t) in self.node_types.iter().enumerate() {
            let key = |f: &str| format!("node_types[{i}].{f}");
            if !(2..=8).contains(&t.gpu_count) {
                return invalid(key("gpu_count"), "must lie in [2, 8]");
            }
            if t.gpu_mem_each == 0 {
                return invalid(key("gpu_mem_each"), "must be > 0");
            }
            if !(t.tdp.is_finite() && t.tdp > 0.0) {
                return invalid(key("tdp"), "must be > 0");
            }
            if !(t.load_bandwidth.is_finite() && t.load_bandwidth > 0.0) {
                return invalid(key("load_bandwidth"), "must be > 0");
            }
            let mut row = Vec::with_capacity(self.models.len());
            for m in &self.models {
                match t.throughput.get(&m.model_id) {
                    Some(&v) if v.is_finite() && v > 0.0 => row.push(v),
                    _ => {
                        return invalid(
                            key(&format!("throughput.{}", m.model_id)),
                            "throughput must be defined and > 0 for every model",
                        )
                    }
                }
            }
            for k in t.throughput.keys() {
                if !model_index.contains_key(k) {
                    return invalid(key(&format!("throughput.{k}")), "unknown model id");
                }
            }
            throughput.push(row);
            if type_index.insert(t.type_id.clone(), i as u16).is_some() {
                return invalid(key("type_id"), "duplicate node type id");
            }
        }

        let horizon = self.trace_gen.epochs;
        let n_dc = self.datacenters.len();
        if n_dc == 0 {
            return invalid("datacenters", "at least one datacenter is required");
        }
        let mut seen = HashSet::new();
        let mut datacenters = Vec::with_capacity(n_dc);
        for (i, dc) in self.datacenters.iter().enumerate() {
            let key = |f: &str| format!("datacenters[{i}].{f}");
            if !seen.insert(dc.location_id.clone()) {
                return invalid(key("location_id"), "duplicate location id");
            }
            if !(dc.cop.is_finite() && dc.cop > 0.0) {
                return invalid(key("cop"), "must be > 0");
            }
            if !(dc.blowdown_ratio > 0.0 && dc.blowdown_ratio < 1.0) {
                return invalid(key("blowdown_ratio"), "must lie in (0, 1)");
            }
            if !(dc.ei_potable.is_finite() && dc.ei_potable >= 0.0) {
                return invalid(key("ei_potable"), "must be >= 0");
            }
            if !(dc.ei_waste.is_finite() && dc.ei_waste >= 0.0) {
                return invalid(key("ei_waste"), "must be >= 0");
            }
            check_series(key("tou_series"), &dc.tou_series, horizon)?;
            check_series(key("ci_series"), &dc.ci_series, horizon)?;
            check_series(key("wi_series"), &dc.wi_series, horizon)?;
            let mut counts = Vec::new();
            for (t, &n) in &dc.node_counts {
                let Some(&ti) = type_index.get(t) else {
                    return invalid(key(&format!("node_counts.{t}")), "unknown node type id");
                };
                counts.push((ti, n));
            }
            counts.sort_by_key(|c| c.0);
            let layout = interleave(&counts);
            if layout.is_empty() {
                return invalid(key("node_counts"), "datacenter has no nodes");
            }
            let mut eligible = Vec::with_capacity(self.models.len());
            let mut slots = Vec::with_capacity(self.models.len());
            for (mi, m) in self.models.iter().enumerate() {
                let need = m.param_memory() + m.kv_bytes_per_token;
                let nodes: Vec<u32> = layout
                    .iter()
                    .enumerate()
                    .filter(|(_, &t)| self.node_types[t as usize].mem_capacity() >= need)
                    .map(|(n, _)| n as u32)
                    .collect();
                if nodes.is_empty() {
                    return invalid(
                        key("node_counts"),
                        format!("no node can host model {}", m.model_id),
                    );
                }
                let min_thr = nodes
                    .iter()
                    .map(|&n| throughput[layout[n as usize] as usize][mi])
                    .fold(f64::INFINITY, f64::min);
                let turns = nodes
                    .iter()
                    .map(|&n| {
                        let r = throughput[layout[n as usize] as usize][mi] / min_thr;
                        (r.round() as u32).max(1)
                    })
                    .collect();
                eligible.push(nodes);
                slots.push(turns);
            }
            datacenters.push(Datacenter {
                location_id: dc.location_id.clone(),
                region: dc.region.clone(),
                cop: dc.cop,
                tou_series: dc.tou_series.clone(),
                ci_series: dc.ci_series.clone(),
                wi_series: dc.wi_series.clone(),
                blowdown_ratio: dc.blowdown_ratio,
                ei_potable: dc.ei_potable,
                ei_waste: dc.ei_waste,
                layout,
                eligible,
                slots,
            });
        }

        let topo = &self.topology;
        if topo.hop_matrix.len() != n_dc || topo.hop_matrix.iter().any(|r| r.len() != n_dc) {
            return invalid("topology.hop_matrix", format!("must be {n_dc}x{n_dc}"));
        }
        for a in 0..n_dc {
            if topo.hop_matrix[a][a] != 0 {
                return invalid("topology.hop_matrix", "diagonal must be 0");
            }
            for b in 0..a {
                if topo.hop_matrix[a][b] != topo.hop_matrix[b][a] {
                    return invalid("topology.hop_matrix", format!("not symmetric at ({a}, {b})"));
                }
            }
        }
        if !(topo.media_latency.is_finite() && topo.media_latency >= 0.0) {
            return invalid("topology.media_latency", "must be >= 0");
        }
        if topo.origin_hops.is_empty() {
            return invalid("topology.origin_hops", "at least one origin region is required");
        }
        for (r, row) in &topo.origin_hops {
            if row.len() != n_dc {
                return invalid(format!("topology.origin_hops.{r}"), format!("must list {n_dc} hop counts"));
            }
        }
        let regions: Vec<String> = topo.origin_hops.keys().cloned().collect();
        let region_index: HashMap<String, usize> =
            regions.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();

        let pr = &self.power_ratios;
        if !(pr.off >= 0.0 && pr.off <= pr.idle && pr.idle <= pr.on && pr.on <= 1.0) {
            return invalid("power_ratios", "require 0 <= off <= idle <= on <= 1");
        }
        if !(self.constants.h_water.is_finite() && self.constants.h_water > 0.0) {
            return invalid("constants.h_water", "must be > 0");
        }

        self.trace_gen
            .validate()
            .or_else(|e| invalid("trace_gen", e.to_string()))?;
        for m in self.trace_gen.model_shares.keys() {
            if !model_index.contains_key(m) {
                return invalid(format!("trace_gen.model_shares.{m}"), "unknown model id");
            }
        }
        for r in self.trace_gen.region_weights.keys() {
            if !region_index.contains_key(r) {
                return invalid(format!("trace_gen.region_weights.{r}"), "region missing from topology.origin_hops");
            }
        }
        self.predictor
            .validate()
            .or_else(|e| invalid("predictor", e.to_string()))?;
        self.optimizer.validate().or_else(|c| invalid("optimizer", c))?;

        Ok(Infrastructure {
            models: self.models.clone(),
            node_types: self.node_types.clone(),
            datacenters,
            topology: Topology {
                hop_matrix: topo.hop_matrix.clone(),
                media_latency: topo.media_latency,
                origin_hops: topo.origin_hops.values().cloned().collect(),
            },
            ratios: self.power_ratios,
            constants: self.constants.clone(),
            regions,
            epoch_length_s: self.trace_gen.epoch_length_s,
            throughput,
            model_index,
            region_index,
        })
    }
}
