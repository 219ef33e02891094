//! Randomized invariants, 10,000 trials each.

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use slit_core::infrastructure::fixtures;
use slit_core::optimizer::{ParetoArchive, SchedulingPlan};
use slit_core::sim::RunOptions;
use slit_core::sustainability::{dc_water, EnergyBreakdown, ObjectiveVector};
use slit_core::workload::{memory_footprint, LlmModelSpec, Request};
use slit_core::{SchedulerKind, SelectionPolicy, Simulation};

const TRIALS: u32 = 10_000;
const IDENTITY_REL: f64 = 1e-12;

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: TRIALS,
        failure_persistence: None,
        ..Config::default()
    })
}

fn check<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner().run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn energy_identity() -> Result<(), String> {
    check("energy identity", (0.0f64..1e6, 1.0f64..12.0), |(it, cop)| {
        let e = EnergyBreakdown::from_it(it, cop);
        let expected = it * (1.13 + 3.0 / cop);
        prop_assert!((e.total - expected).abs() <= IDENTITY_REL * expected.max(f64::MIN_POSITIVE));
        Ok(())
    })
}

fn blowdown_exceeds_evaporative() -> Result<(), String> {
    let infra = fixtures::small_config(1).resolve().map_err(|e| e.to_string())?;
    let template = infra.datacenters[0].clone();
    check("blowdown", (1e-3f64..1e6, 1e-6f64..(1.0 - 1e-6), 1.0f64..12.0), |(it, d, cop)| {
        let mut dc = template.clone();
        dc.blowdown_ratio = d;
        let w = dc_water(&EnergyBreakdown::from_it(it, cop), &dc, 0, &infra.constants);
        prop_assert!(w.blowdown > w.evaporative, "D {d}: {} <= {}", w.blowdown, w.evaporative);
        Ok(())
    })
}

fn archive_non_domination() -> Result<(), String> {
    // Coarse integer objectives so that ties and exact duplicates occur.
    let point = vec(0u8..6, 4);
    let strategy = (1usize..12, vec(point, 1..40));
    check("archive", strategy, |(capacity, points)| {
        let mut archive = ParetoArchive::new(capacity);
        for (i, p) in points.iter().enumerate() {
            let v = ObjectiveVector::new(p[0].into(), p[1].into(), p[2].into(), p[3].into());
            let plan = SchedulingPlan::one_hot(1, 40, i);
            archive.insert(plan, v, vec![i as f64]);
            let objs = archive.objectives();
            prop_assert!(objs.len() <= capacity);
            for (a, x) in objs.iter().enumerate() {
                for (b, y) in objs.iter().enumerate() {
                    prop_assert!(a == b || !x.dominates(y), "{x:?} dominates {y:?}");
                }
            }
        }
        Ok(())
    })
}

fn footprint_linearity() -> Result<(), String> {
    let strategy = (1u64..200_000_000_000, 1u64..10_000_000, 1u32..8192, any::<u32>(), any::<u32>());
    check("footprint", strategy, |(params, kv, n, a, b)| {
        let model = LlmModelSpec {
            model_id: "m".into(),
            param_count: params / 2,
            bytes_per_param: 2,
            kv_bytes_per_token: kv,
        };
        let r = Request {
            request_id: 0,
            model_id: "m".into(),
            origin_region: "r".into(),
            arrival_epoch: 0,
            arrival_offset_s: 0.0,
            input_tokens: 1,
            output_tokens: n,
        };
        let (g1, g2) = (a % (n + 1), b % (n + 1));
        let f = |g| memory_footprint(&r, &model, g);
        prop_assert_eq!(f(0), model.param_memory());
        prop_assert_eq!(f(g1) - f(0), u64::from(g1) * kv);
        prop_assert_eq!(f(g1) + f(g2), 2 * f(0) + u64::from(g1 + g2) * kv);
        Ok(())
    })
}

fn determinism() -> Result<(), String> {
    let schedulers = prop_oneof![
        Just(SchedulerKind::Slit),
        Just(SchedulerKind::RoundRobin),
        Just(SchedulerKind::LeastQueue),
        Just(SchedulerKind::Nearest),
    ];
    let policies = prop_oneof![
        Just(SelectionPolicy::Ttft),
        Just(SelectionPolicy::Carbon),
        Just(SelectionPolicy::Water),
        Just(SelectionPolicy::Cost),
        Just(SelectionPolicy::Balance),
    ];
    let mut cfg = fixtures::small_config(2);
    cfg.optimizer.gen = 1;
    cfg.optimizer.archive_capacity = 6;
    check("determinism", (schedulers, policies, any::<u64>(), 1u32..3), |(scheduler, policy, seed, epochs)| {
        let run = || {
            let options = RunOptions {
                scheduler,
                policy,
                seed,
                epochs: Some(epochs),
                ..Default::default()
            };
            let mut sim = Simulation::new(&cfg, options).expect("fixture config");
            sim.run_to_end().expect("non-interactive run");
            serde_json::to_string(&sim.report()).expect("report serializes")
        };
        prop_assert_eq!(run(), run());
        Ok(())
    })
}

pub fn run() -> Result<String, String> {
    energy_identity()?;
    blowdown_exceeds_evaporative()?;
    archive_non_domination()?;
    footprint_linearity()?;
    determinism()?;
    Ok(format!(
        "energy identity (rel {IDENTITY_REL:e}), blowdown > evaporative, archive non-domination, \
         footprint linearity, byte-identical reports: {TRIALS} trials each"
    ))
}
