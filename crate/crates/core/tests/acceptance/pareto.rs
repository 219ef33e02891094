//! Tiny instance: 3 datacenters, 2 buckets, shares on a 0.25 grid. Every
//! plan is enumerated to get the true front; the optimizer's archive must
//! cover >= 90% of its hypervolume and every archived point must lie within
//! 2% normalized distance of a true-front point.

use std::collections::BTreeMap;

use slit_core::exec::Exec;
use slit_core::infrastructure::fixtures;
use slit_core::optimizer::{hypervolume, run_epoch, EpochProblem, Evaluator, OptimizerParams, PlanEvaluator, SchedulingPlan};
use slit_core::sustainability::{CarryState, ObjectiveVector, PreparedEpoch};
use slit_core::workload::generate_trace;

use crate::common::ensure;

const HV_RATIO: f64 = 0.90;
const MAX_DISTANCE: f64 = 0.02;
const QUANTUM: f64 = 0.25;
const NODES_PER_TYPE: u32 = 16;

/// All distributions over `n` locations in multiples of 1/`units`.
fn grid_rows(units: usize, n: usize) -> Vec<Vec<f64>> {
    compositions_of(units, n)
        .into_iter()
        .map(|c| c.iter().map(|&k| k as f64 / units as f64).collect())
        .collect()
}

fn compositions_of(total: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|k| {
            compositions_of(total - k, n - 1).into_iter().map(move |mut r| {
                r.insert(0, k);
                r
            })
        })
        .collect()
}

fn non_dominated(points: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    let mut front: Vec<ObjectiveVector> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let dominated = points.iter().any(|q| q.dominates(p));
        let duplicate = points[..i].iter().any(|q| q == p);
        if !dominated && !duplicate {
            front.push(*p);
        }
    }
    front
}

pub fn run() -> Result<String, String> {
    let mut cfg = fixtures::small_config(3);
    cfg.models = vec![fixtures::llama_7b()];
    for t in &mut cfg.node_types {
        t.throughput.remove("llama-70b");
    }
    cfg.trace_gen.model_shares = BTreeMap::from([("llama-7b".into(), 1.0)]);
    cfg.trace_gen.base_requests_per_epoch = 4.0;
    cfg.trace_gen.epochs = 1;
    // More nodes than requests, so the number of powered nodes (and with it
    // energy, water, carbon and cost) tracks the requests routed to a site.
    for dc in &mut cfg.datacenters {
        dc.node_counts = BTreeMap::from([("a100x2".into(), NODES_PER_TYPE), ("h100x2".into(), NODES_PER_TYPE)]);
    }
    let infra = cfg.resolve().map_err(|e| e.to_string())?;
    ensure(infra.n_buckets() == 2 && infra.n_locations() == 3, || "fixture shape".into())?;

    let trace = generate_trace(&cfg.trace_gen, 21).map_err(|e| e.to_string())?;
    let epoch = PreparedEpoch::new(&trace[0], &infra).map_err(|e| e.to_string())?;
    let carry = CarryState::initial(&infra);
    let evaluator = PlanEvaluator {
        infra: &infra,
        epoch: &epoch,
        carry: &carry,
        seed: 5,
        exec: Exec::default(),
    };

    let rows = grid_rows(4, 3);
    ensure(rows.len() == 15, || format!("{} grid rows", rows.len()))?;
    let mut all = Vec::with_capacity(rows.len() * rows.len());
    for a in &rows {
        for b in &rows {
            let plan = SchedulingPlan {
                assignment: vec![a.clone(), b.clone()],
            };
            all.push(evaluator.evaluate(&plan));
        }
    }
    let truth = non_dominated(&all);

    let params = OptimizerParams {
        gen: 30,
        // Room for every plan: crowding eviction never runs, so an evicted
        // front point cannot let a point it dominates back in.
        archive_capacity: all.len(),
        step: QUANTUM,
        quantum: Some(QUANTUM),
        ..Default::default()
    };
    let problem = EpochProblem {
        evaluator: &evaluator,
        predicted: &epoch.bucket_counts,
        n_buckets: 2,
        n_locations: 3,
    };
    let search = run_epoch(&problem, &params, 17);
    let found = search.archive.objectives();

    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for v in &all {
        for k in 0..4 {
            lo[k] = lo[k].min(v.get(k));
            hi[k] = hi[k].max(v.get(k));
        }
    }
    let norm = |v: &ObjectiveVector| -> Vec<f64> {
        (0..4)
            .map(|k| {
                let range = hi[k] - lo[k];
                if range > 0.0 {
                    (v.get(k) - lo[k]) / range
                } else {
                    0.0
                }
            })
            .collect()
    };
    let reference = vec![1.1; 4];
    let truth_n: Vec<Vec<f64>> = truth.iter().map(norm).collect();
    let found_n: Vec<Vec<f64>> = found.iter().map(norm).collect();
    let hv_true = hypervolume(&truth_n, &reference);
    let hv_found = hypervolume(&found_n, &reference);
    let ratio = hv_found / hv_true;

    let worst = found_n
        .iter()
        .map(|p| {
            truth_n
                .iter()
                .map(|t| t.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    let detail = format!(
        "{} requests, {} plans, true front {}, archive {}, HV ratio {:.4}, max distance {:.4}, {} evaluations",
        epoch.requests.len(),
        all.len(),
        truth.len(),
        found.len(),
        ratio,
        worst,
        search.evaluations
    );
    ensure(ratio >= HV_RATIO, || format!("HV ratio below {HV_RATIO}: {detail}"))?;
    ensure(worst <= MAX_DISTANCE, || format!("point farther than {MAX_DISTANCE}: {detail}"))?;
    Ok(detail)
}
