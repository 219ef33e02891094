//! Small hand-sized configurations used by tests, benches and examples.

use std::collections::BTreeMap;

use super::{DatacenterConfig, NodeType, PowerStateRatios, SimConfig, TopologyConfig};
use crate::infrastructure::Constants;
use crate::optimizer::OptimizerParams;
use crate::workload::{LlmModelSpec, PredictorConfig, TraceGenConfig};

pub const GB: u64 = 1_000_000_000;
pub const MB: u64 = 1_000_000;

pub fn llama_7b() -> LlmModelSpec {
    LlmModelSpec {
        model_id: "llama-7b".into(),
        param_count: 7_000_000_000,
        bytes_per_param: 2,
        kv_bytes_per_token: MB / 2,
    }
}

pub fn llama_70b() -> LlmModelSpec {
    LlmModelSpec {
        model_id: "llama-70b".into(),
        param_count: 70_000_000_000,
        bytes_per_param: 2,
        kv_bytes_per_token: 5 * MB / 2,
    }
}

pub fn node_type(type_id: &str, gpus: u32, mem_each_gb: u64, tdp: f64, bw: f64, thr7: f64, thr70: f64) -> NodeType {
    NodeType {
        type_id: type_id.into(),
        gpu_count: gpus,
        gpu_mem_each: mem_each_gb * GB,
        tdp,
        load_bandwidth: bw,
        throughput: BTreeMap::from([("llama-7b".into(), thr7), ("llama-70b".into(), thr70)]),
    }
}

/// `n_dcs` datacenters in two regions with 4 nodes each (two node types),
/// 4-epoch series with distinct intensities per location.
pub fn small_config(n_dcs: usize) -> SimConfig {
    let node_types = vec![
        node_type("a100x2", 2, 40, 1200.0, 16.0 * GB as f64, 2000.0, 300.0),
        node_type("h100x2", 2, 80, 1800.0, 32.0 * GB as f64, 4000.0, 600.0),
    ];
    let datacenters = (0..n_dcs)
        .map(|i| {
            let f = i as f64;
            DatacenterConfig {
                location_id: format!("dc{i}"),
                region: format!("r{}", i % 2),
                node_counts: BTreeMap::from([("a100x2".into(), 2), ("h100x2".into(), 2)]),
                cop: 3.0 + f,
                tou_series: vec![0.10 + 0.03 * f, 0.12 + 0.03 * f, 0.08 + 0.02 * f, 0.11],
                ci_series: vec![0.5 - 0.12 * f, 0.45 - 0.1 * f, 0.4 - 0.1 * f, 0.5 - 0.1 * f]
                    .into_iter()
                    .map(|v: f64| v.max(0.02))
                    .collect(),
                wi_series: vec![1.0 + 2.0 * f, 1.5 + 2.0 * f, 1.2 + 2.0 * f, 1.0 + f],
                blowdown_ratio: 0.2 + 0.05 * f,
                ei_potable: 0.005,
                ei_waste: 0.002,
            }
        })
        .collect();
    let hop_matrix = (0..n_dcs)
        .map(|a| (0..n_dcs).map(|b| (a as i64 - b as i64).unsigned_abs() as u32 * 3).collect())
        .collect();
    let origin_hops = BTreeMap::from([
        ("r0".to_string(), (0..n_dcs).map(|d| 1 + 3 * d as u32).collect()),
        ("r1".to_string(), (0..n_dcs).map(|d| 1 + 3 * (n_dcs - 1 - d) as u32).collect()),
    ]);
    SimConfig {
        models: vec![llama_7b(), llama_70b()],
        node_types,
        datacenters,
        topology: TopologyConfig {
            hop_matrix,
            media_latency: 0.010,
            origin_hops,
        },
        power_ratios: PowerStateRatios::default(),
        trace_gen: TraceGenConfig {
            epochs: 4,
            base_requests_per_epoch: 1.0,
            region_weights: BTreeMap::from([("r0".into(), 0.6), ("r1".into(), 0.4)]),
            ..Default::default()
        },
        optimizer: OptimizerParams {
            gen: 3,
            archive_capacity: 12,
            ..Default::default()
        },
        predictor: PredictorConfig::default(),
        constants: Constants::default(),
    }
}
