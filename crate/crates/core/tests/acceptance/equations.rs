//! Worked examples of the memory, latency, energy, cost, water and carbon
//! models against a straight-line oracle that shares no code with the crate.

use slit_core::exec::Exec;
use slit_core::infrastructure::{parse_config, Infrastructure, NodeType, PowerState, PowerStateRatios, Topology};
use slit_core::optimizer::SchedulingPlan;
use slit_core::perf::{load_overhead, local_schedule, migration_latency, ttft, PendingRequest};
use slit_core::sustainability::{
    dc_carbon, dc_water, energy_cost, evaluate_plan, node_energy, CarryState, EnergyBreakdown, PreparedEpoch,
};
use slit_core::workload::{memory_footprint, EpochTrace, LlmModelSpec, Request};

use crate::common::{close, ensure};

const REL: f64 = 1e-9;

/// Independent formula chain. Units: bytes, seconds, watts, kWh, litres,
/// kg CO2, dollars.
mod oracle {
    pub fn footprint(n_out: f64, kv_per_token: f64, model_bytes: f64) -> f64 {
        n_out * kv_per_token + model_bytes
    }

    pub fn load(model_bytes: f64, bandwidth: f64) -> f64 {
        model_bytes / bandwidth
    }

    pub fn migration(hops: f64, per_hop: f64) -> f64 {
        hops * per_hop
    }

    pub fn ttft(load: f64, migration: f64, exec: f64, n_out: f64) -> f64 {
        load + 2.0 * migration + exec / n_out
    }

    pub fn node_kwh(ratio: f64, tdp_w: f64, seconds: f64) -> f64 {
        ratio * (tdp_w / 1000.0) * (seconds / 3600.0)
    }

    pub struct Energy {
        pub crac: f64,
        pub cooling: f64,
        pub support: f64,
        pub total: f64,
    }

    pub fn energy(it: f64, cop: f64) -> Energy {
        let crac = it / cop;
        let cooling = 3.0 * crac;
        let support = 0.13 * it;
        Energy {
            crac,
            cooling,
            support,
            total: it + cooling + support,
        }
    }

    pub fn evaporative(it_kwh: f64, h_water: f64) -> f64 {
        it_kwh * 3.6 / h_water
    }

    pub fn blowdown(evaporative: f64, d: f64) -> f64 {
        evaporative / (1.0 - d)
    }

    pub fn grid_water(total_kwh: f64, wi: f64) -> f64 {
        total_kwh * wi
    }

    pub fn grid_carbon(ci: f64, total_kwh: f64) -> f64 {
        ci * total_kwh
    }

    pub fn water_carbon(evap: f64, blow: f64, grid_water: f64, ei_pot: f64, ei_waste: f64, ci: f64) -> f64 {
        ((blow + evap) * ei_pot + grid_water * ei_waste) * ci
    }
}

const TINY: &str = r#"{
  "models": [{"model_id": "m7", "param_count": 7000000000, "bytes_per_param": 2, "kv_bytes_per_token": 500000}],
  "node_types": [{"type_id": "t80", "gpu_count": 2, "gpu_mem_each": 40000000000, "tdp": 2000.0,
                  "load_bandwidth": 16000000000.0, "throughput": {"m7": 1000.0}}],
  "datacenters": [
    {"location_id": "dc-a", "region": "r0", "node_counts": {"t80": 2}, "cop": 4.0,
     "tou_series": [0.10], "ci_series": [0.4], "wi_series": [0.2], "blowdown_ratio": 0.2,
     "ei_potable": 0.005, "ei_waste": 0.002},
    {"location_id": "dc-b", "region": "r0", "node_counts": {"t80": 2}, "cop": 3.0,
     "tou_series": [0.20], "ci_series": [0.1], "wi_series": [1.5], "blowdown_ratio": 0.3,
     "ei_potable": 0.005, "ei_waste": 0.002}
  ],
  "topology": {"hop_matrix": [[0, 4], [4, 0]], "media_latency": 0.01, "origin_hops": {"r0": [1, 5]}},
  "power_ratios": {"on": 1.0, "idle": 0.3, "off": 0.0},
  "trace_gen": {"epochs": 1, "epoch_length_s": 900.0, "model_shares": {"m7": 1.0}, "region_weights": {"r0": 1.0}},
  "constants": {"h_water": 2.26}
}"#;

/// Two node types, one node each; `fast` has twice the throughput, so it
/// takes two consecutive round-robin turns. A 100-token request holds 8 GB
/// of parameters plus 40 GB of KV cache, 60% of either node.
const OVERFLOW: &str = r#"{
  "models": [{"model_id": "m4", "param_count": 4000000000, "bytes_per_param": 2, "kv_bytes_per_token": 400000000}],
  "node_types": [
    {"type_id": "fast", "gpu_count": 2, "gpu_mem_each": 40000000000, "tdp": 1000.0,
     "load_bandwidth": 32000000000.0, "throughput": {"m4": 2000.0}},
    {"type_id": "slow", "gpu_count": 2, "gpu_mem_each": 40000000000, "tdp": 800.0,
     "load_bandwidth": 16000000000.0, "throughput": {"m4": 1000.0}}
  ],
  "datacenters": [
    {"location_id": "dc", "region": "r0", "node_counts": {"fast": 1, "slow": 1}, "cop": 4.0,
     "tou_series": [0.1], "ci_series": [0.4], "wi_series": [0.2], "blowdown_ratio": 0.2}
  ],
  "topology": {"hop_matrix": [[0]], "origin_hops": {"r0": [1]}},
  "trace_gen": {"epochs": 1, "model_shares": {"m4": 1.0}, "region_weights": {"r0": 1.0}}
}"#;

const GB: f64 = 1e9;

fn model_7b() -> LlmModelSpec {
    LlmModelSpec {
        model_id: "m7".into(),
        param_count: 7_000_000_000,
        bytes_per_param: 2,
        kv_bytes_per_token: 500_000,
    }
}

fn node(bandwidth: f64, throughput: f64) -> NodeType {
    NodeType {
        type_id: "n".into(),
        gpu_count: 8,
        gpu_mem_each: 80_000_000_000,
        tdp: 2000.0,
        load_bandwidth: bandwidth,
        throughput: [("m7".to_string(), throughput)].into(),
    }
}

fn request(id: u64, input: u32, output: u32) -> Request {
    Request {
        request_id: id,
        model_id: "m7".into(),
        origin_region: "r0".into(),
        arrival_epoch: 0,
        arrival_offset_s: id as f64,
        input_tokens: input,
        output_tokens: output,
    }
}

fn infra(text: &str) -> Infrastructure {
    parse_config(text).expect("fixture config is valid").infra
}

pub fn run() -> Result<String, String> {
    let mut n = 0usize;
    let mut check = |what: &str, actual: f64, expected: f64| -> Result<(), String> {
        n += 1;
        close(what, actual, expected, REL)
    };
    // Printed values from the worked examples, at their printed precision.
    let printed = |what: &str, actual: f64, value: f64, precision: f64| -> Result<(), String> {
        ensure((actual - value).abs() <= precision / 2.0 + 1e-12, || {
            format!("{what}: {actual} does not round to {value}")
        })
    };

    // Memory footprint.
    let m7 = model_7b();
    let r = request(0, 50, 100);
    let fp = memory_footprint(&r, &m7, 100) as f64;
    check("footprint", fp, oracle::footprint(100.0, 0.5e6, 14.0 * GB))?;
    printed("footprint", fp, 14.05 * GB, 1.0)?;

    // Model loading.
    let slow = node(16.0 * GB, 100.0);
    check("load 14 GB", load_overhead(&m7, &slow, false), oracle::load(14.0 * GB, 16.0 * GB))?;
    printed("load 14 GB", load_overhead(&m7, &slow, false), 0.875, 1e-12)?;
    let m70 = LlmModelSpec {
        param_count: 70_000_000_000,
        ..m7.clone()
    };
    check("load 140 GB", load_overhead(&m70, &slow, false), oracle::load(140.0 * GB, 16.0 * GB))?;
    printed("load 140 GB", load_overhead(&m70, &slow, false), 8.75, 1e-12)?;

    // Migration.
    let topo = Topology {
        hop_matrix: vec![vec![0, 5], vec![5, 0]],
        media_latency: 0.010,
        origin_hops: vec![vec![0, 5]],
    };
    let mig = migration_latency(0, 1, &topo).map_err(|e| e.to_string())?;
    check("migration", mig, oracle::migration(5.0, 0.010))?;
    printed("migration", mig, 0.050, 1e-12)?;

    // TTFT: 1000 tokens at 100 tok/s is a 10 s execution.
    let r = request(1, 900, 100);
    let warm = ttft(&r, &m7, &slow, true, 0.0).map_err(|e| e.to_string())?;
    check("ttft warm", warm.ttft, oracle::ttft(0.0, 0.0, 10.0, 100.0))?;
    printed("ttft warm", warm.ttft, 0.1, 1e-12)?;
    let cold = ttft(&r, &m7, &slow, false, mig).map_err(|e| e.to_string())?;
    let expect = oracle::ttft(oracle::load(14.0 * GB, 16.0 * GB), oracle::migration(5.0, 0.010), 10.0, 100.0);
    check("ttft cold", cold.ttft, expect)?;
    printed("ttft cold", cold.ttft, 1.075, 1e-12)?;

    overflow(&mut check)?;

    // Node energy.
    let ratios = PowerStateRatios::default();
    check("node on", node_energy(PowerState::On, 2000.0, &ratios, 900.0), oracle::node_kwh(1.0, 2000.0, 900.0))?;
    printed("node on", node_energy(PowerState::On, 2000.0, &ratios, 900.0), 0.5, 1e-12)?;
    check("node idle", node_energy(PowerState::Idle, 2000.0, &ratios, 900.0), oracle::node_kwh(0.3, 2000.0, 900.0))?;
    printed("node idle", node_energy(PowerState::Idle, 2000.0, &ratios, 900.0), 0.15, 1e-12)?;

    // Facility energy.
    let e = EnergyBreakdown::from_it(100.0, 4.0);
    let o = oracle::energy(100.0, 4.0);
    check("crac", e.crac, o.crac)?;
    check("cooling", e.cooling, o.cooling)?;
    check("support", e.support, o.support)?;
    check("total", e.total, o.total)?;
    for (what, v, p) in [("crac", e.crac, 25.0), ("cooling", e.cooling, 75.0), ("support", e.support, 13.0), ("total", e.total, 188.0)] {
        printed(what, v, p, 1e-9)?;
    }

    // Cost.
    let tiny = infra(TINY);
    let dcs = &tiny.datacenters;
    let cost_one = energy_cost(&[e], &dcs[..1], 0);
    check("cost one dc", cost_one, 188.0 * 0.10)?;
    printed("cost one dc", cost_one, 18.80, 0.01)?;
    let e100 = EnergyBreakdown {
        total: 100.0,
        ..e
    };
    let cost_two = energy_cost(&[e100, e100], dcs, 0);
    check("cost two dcs", cost_two, 100.0 * 0.10 + 100.0 * 0.20)?;
    printed("cost two dcs", cost_two, 30.00, 0.01)?;

    // Water, at dc-a: D = 0.2, WI = 0.2 L/kWh.
    let w = dc_water(&e, &dcs[0], 0, &tiny.constants);
    let evap = oracle::evaporative(100.0, 2.26);
    let blow = oracle::blowdown(evap, 0.2);
    let gw = oracle::grid_water(188.0, 0.2);
    check("evaporative", w.evaporative, evap)?;
    check("blowdown", w.blowdown, blow)?;
    check("grid water", w.grid, gw)?;
    printed("evaporative", w.evaporative, 159.29, 0.01)?;
    printed("blowdown", w.blowdown, 199.12, 0.01)?;
    printed("grid water", w.grid, 37.6, 1e-9)?;

    // Carbon, at dc-a: CI = 0.4 kg/kWh.
    let c = dc_carbon(&e, &w, &dcs[0], 0, true);
    check("grid carbon", c.grid, oracle::grid_carbon(0.4, 188.0))?;
    printed("grid carbon", c.grid, 75.2, 1e-9)?;
    check("water carbon", c.water_related, oracle::water_carbon(evap, blow, gw, 0.005, 0.002, 0.4))?;
    printed("water carbon", c.water_related, 0.747, 0.001)?;
    let zero_ci = oracle::water_carbon(evap, blow, gw, 0.005, 0.002, 0.0) + oracle::grid_carbon(0.0, 188.0);
    check("zero ci", zero_ci, 0.0)?;

    // Whole evaluator against the chain, for a concentrated and a spread plan.
    let ep = PreparedEpoch::new(
        &EpochTrace {
            epoch_index: 0,
            epoch_length_s: 900.0,
            requests: (0..4).map(|i| request(i, 100, 100)).collect(),
        },
        &tiny,
    )
    .map_err(|e| e.to_string())?;
    let carry = CarryState::initial(&tiny);
    for (name, plan, split) in [
        ("one dc", SchedulingPlan::one_hot(1, 2, 0), [4usize, 0]),
        ("spread", SchedulingPlan::uniform(1, 2), [2, 2]),
    ] {
        let got = evaluate_plan(&plan, &ep, &tiny, &carry, 11, Exec::Sequential).objectives;
        let want = chain(split);
        for (k, label) in ["ttft", "carbon", "water", "cost"].iter().enumerate() {
            check(&format!("{name} {label}"), got.get(k), want[k])?;
        }
    }
    Ok(format!("{n} quantities within rel {REL:e} of the oracle"))
}

/// Two requests each needing 60% of a node. The fast node's second turn
/// cannot hold the second request, which moves to the slow node and pays
/// one extra cold load there.
fn overflow(check: &mut impl FnMut(&str, f64, f64) -> Result<(), String>) -> Result<(), String> {
    let infra = infra(OVERFLOW);
    let dc = &infra.datacenters[0];
    let mut nodes = dc.initial_nodes();
    let model = &infra.models[0];
    let need = (model.param_memory() + 100 * model.kv_bytes_per_token) as f64;
    ensure((need / 80e9 - 0.6).abs() < 0.01, || "fixture footprint is not 60%".into())?;
    let reqs: Vec<PendingRequest> = (0..2)
        .map(|i| PendingRequest {
            request_id: i,
            model: 0,
            input_tokens: 100,
            output_tokens: 100,
            migration_one_way: 0.0,
            carried: false,
        })
        .collect();
    let out = local_schedule(&reqs, 0, &infra, &mut nodes).outcomes;
    let type_of = |id: Option<u32>| id.map(|i| infra.node_types[usize::from(dc.layout[i as usize])].type_id.as_str());
    ensure(type_of(out[0].node_id) == Some("fast") && !out[0].reassigned, || {
        format!("first request on {:?}", type_of(out[0].node_id))
    })?;
    ensure(type_of(out[1].node_id) == Some("slow") && out[1].reassigned, || {
        format!("second request on {:?}, reassigned {}", type_of(out[1].node_id), out[1].reassigned)
    })?;
    let slow_load = oracle::load(8.0 * GB, 16.0 * GB);
    check("reassigned load", out[1].latency.load, 2.0 * slow_load)?;
    check("reassigned ttft", out[1].latency.ttft, oracle::ttft(2.0 * slow_load, 0.0, 0.2, 100.0))?;
    ensure(nodes.iter().all(|n| n.power_state == PowerState::On), || "both nodes should be ON".into())
}

/// Objectives of the tiny config when `split[d]` identical requests
/// (100 in, 100 out) go to datacenter `d`. Each datacenter has two nodes
/// served alternately; the first request on a node loads the model.
fn chain(split: [usize; 2]) -> [f64; 4] {
    let m_o = 14.0 * GB;
    let bw = 16.0 * GB;
    let exec = 200.0 / 1000.0;
    let hops = [1.0, 5.0];
    let cop = [4.0, 3.0];
    let tou = [0.10, 0.20];
    let ci = [0.4, 0.1];
    let wi = [0.2, 1.5];
    let d_ratio = [0.2, 0.3];

    let mut ttfts = Vec::new();
    let (mut carbon, mut water, mut cost) = (0.0, 0.0, 0.0);
    for d in 0..2 {
        for i in 0..split[d] {
            let load = if i < 2 { oracle::load(m_o, bw) } else { 0.0 };
            ttfts.push(oracle::ttft(load, oracle::migration(hops[d], 0.01), exec, 100.0));
        }
        let on = split[d].min(2) as f64;
        let it = on * oracle::node_kwh(1.0, 2000.0, 900.0);
        let e = oracle::energy(it, cop[d]);
        let evap = oracle::evaporative(it, 2.26);
        let blow = oracle::blowdown(evap, d_ratio[d]);
        let gw = oracle::grid_water(e.total, wi[d]);
        water += evap + blow + gw;
        carbon += oracle::grid_carbon(ci[d], e.total) + oracle::water_carbon(evap, blow, gw, 0.005, 0.002, ci[d]);
        cost += e.total * tou[d];
    }
    [ttfts.iter().sum::<f64>() / ttfts.len() as f64, carbon, water, cost]
}
