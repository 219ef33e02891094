//! The SLIT metaheuristic: ML-guided local search, an evolutionary step and
//! a capped Pareto archive, run once per epoch on the predicted workload.
//!
//! ```text
//! init population ─▶ for it in 0..gen:
//!                      starts  = one per cluster (surrogate-ranked)
//!                      s_new   = local_search(start) for each start
//!                      archive ∪= s_new;  Y_train ∪= trajectories
//!                      if it % freq == 0: retrain surrogates, clear Y_train
//!                      archive ∪= evaluated children of random parent pairs
//! ```

mod archive;
mod ea;
mod fallback;
mod plan;
mod search;
mod select;

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use archive::{
    crowding_distances, dominance_rank, hypervolume, normalized_sum, objective_bounds, ArchiveEntry, ParetoArchive,
};
pub use ea::{crossover, ea_step, mutate};
pub use fallback::{fallback_missed, FallbackRouting};
pub use plan::SchedulingPlan;
pub use search::{farthest_point_clusters, local_search, ml_select_starts, neighbor, SearchContext, SearchResult, TrajectorySample};
pub use select::{select_solutions, Label, Selections};

pub use crate::sustainability::ObjectiveVector;

use crate::exec::Exec;
use crate::infrastructure::Infrastructure;
use crate::surrogate::{self, BoostParams, GradBoostModel, SurrogateError, TrainingSet};
use crate::sustainability::{evaluate_plan, CarryState, PreparedEpoch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerParams {
    /// Iterations per epoch.
    pub gen: usize,
    /// Surrogate retrain period, in iterations.
    pub freq: usize,
    /// Local-search move size (probability mass).
    pub step: f64,
    pub candidates_per_step: usize,
    pub p_mut: f64,
    pub archive_capacity: usize,
    pub cluster_count: usize,
    /// Share of surrogate-ranked neighbours that are truly evaluated.
    pub guided_fraction: f64,
    /// Wall-clock cap per epoch, seconds.
    pub time_budget: f64,
    pub seed: u64,
    /// Accepted for compatibility and ignored.
    pub iter_early: Option<usize>,
    pub surrogate: BoostParams,
    /// Restricts every distribution to multiples of this value.
    pub quantum: Option<f64>,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            gen: 30,
            freq: 5,
            step: 0.1,
            candidates_per_step: 20,
            p_mut: 0.2,
            archive_capacity: 50,
            cluster_count: 4,
            guided_fraction: 0.25,
            time_budget: 900.0,
            seed: 0,
            iter_early: None,
            surrogate: BoostParams::default(),
            quantum: None,
            exec: Exec::default(),
        }
    }
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<(), String> {
        let checks: [(bool, &str); 10] = [
            (self.gen >= 1, "gen must be >= 1"),
            (self.freq >= 1, "freq must be >= 1"),
            (self.step.is_finite() && (0.0..=1.0).contains(&self.step), "step must be in [0, 1]"),
            (self.candidates_per_step >= 1, "candidates_per_step must be >= 1"),
            ((0.0..=1.0).contains(&self.p_mut), "p_mut must be in [0, 1]"),
            (self.archive_capacity >= 1, "archive_capacity must be >= 1"),
            (self.cluster_count >= 1, "cluster_count must be >= 1"),
            (
                self.guided_fraction > 0.0 && self.guided_fraction <= 1.0,
                "guided_fraction must be in (0, 1]",
            ),
            (self.time_budget > 0.0 && self.time_budget.is_finite(), "time_budget must be > 0"),
            (
                self.quantum.is_none_or(|q| q > 0.0 && q <= 1.0 && ((1.0 / q) - (1.0 / q).round()).abs() < 1e-9),
                "quantum must divide 1",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(msg.to_string());
            }
        }
        self.surrogate.validate().map_err(|e| e.to_string())
    }
}

/// True evaluation of a plan. Every objective vector stored in an archive
/// comes from here.
pub trait Evaluator: Sync {
    fn evaluate(&self, plan: &SchedulingPlan) -> ObjectiveVector;
}

impl<F> Evaluator for F
where
    F: Fn(&SchedulingPlan) -> ObjectiveVector + Sync,
{
    fn evaluate(&self, plan: &SchedulingPlan) -> ObjectiveVector {
        self(plan)
    }
}

/// Cheap objective estimate from plan features.
pub trait ObjectivePredictor: Sync {
    fn predict(&self, features: &[f64]) -> ObjectiveVector;
}

/// Evaluates plans against a (predicted) epoch from a fixed carry state.
pub struct PlanEvaluator<'a> {
    pub infra: &'a Infrastructure,
    pub epoch: &'a PreparedEpoch,
    pub carry: &'a CarryState,
    pub seed: u64,
    pub exec: Exec,
}

impl Evaluator for PlanEvaluator<'_> {
    fn evaluate(&self, plan: &SchedulingPlan) -> ObjectiveVector {
        evaluate_plan(plan, self.epoch, self.infra, self.carry, self.seed, self.exec).objectives
    }
}

/// One gradient-boosting model per objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surrogates {
    pub models: Vec<GradBoostModel>,
}

impl Surrogates {
    pub fn fit(rows: &[TrajectorySample], params: &BoostParams, exec: Exec) -> Result<Self, SurrogateError> {
        let features: Vec<Vec<f64>> = rows.iter().map(|r| r.features.clone()).collect();
        let objectives: Vec<usize> = (0..4).collect();
        let models = exec
            .map(&objectives, |&k| {
                let set = TrainingSet {
                    features: features.clone(),
                    targets: rows.iter().map(|r| r.objectives.get(k)).collect(),
                };
                surrogate::fit(&set, params)
            })
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { models })
    }
}

impl ObjectivePredictor for Surrogates {
    fn predict(&self, features: &[f64]) -> ObjectiveVector {
        let mut v = [0.0; 4];
        for (k, m) in self.models.iter().enumerate() {
            v[k] = m.predict_staged(features, m.trees.len());
        }
        ObjectiveVector::from_array(v)
    }
}

pub(crate) fn cmp_features(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(a.len().cmp(&b.len()))
}

/// Shape of the epoch being planned.
pub struct EpochProblem<'a> {
    pub evaluator: &'a dyn Evaluator,
    /// Predicted per-bucket request counts.
    pub predicted: &'a [u64],
    pub n_buckets: usize,
    pub n_locations: usize,
}

#[derive(Debug, Clone)]
pub struct EpochSearch {
    pub archive: ParetoArchive,
    pub evaluations: usize,
    pub iterations: usize,
    pub initial_population: usize,
    /// Worst value of every objective over the evaluated initial population.
    pub initial_worst: ObjectiveVector,
    pub budget_exhausted: bool,
    pub surrogate: Option<Surrogates>,
}

/// Uniform plan, one single-location plan per datacenter and random plans,
/// `archive_capacity` in total, evaluated and merged in that order.
pub fn initialize_population(
    problem: &EpochProblem<'_>,
    params: &OptimizerParams,
    rng: &mut impl Rng,
) -> (ParetoArchive, Vec<ObjectiveVector>) {
    let (b, l) = (problem.n_buckets, problem.n_locations);
    let cap = params.archive_capacity.max(1);
    let mut plans = vec![SchedulingPlan::uniform(b, l)];
    plans.extend((0..l).take(cap.saturating_sub(1)).map(|d| SchedulingPlan::one_hot(b, l, d)));
    while plans.len() < cap {
        plans.push(SchedulingPlan::random(b, l, rng));
    }
    if let Some(q) = params.quantum {
        plans.iter_mut().for_each(|p| p.snap(q));
    }
    let objectives = params.exec.map(&plans, |p| problem.evaluator.evaluate(p));
    let mut archive = ParetoArchive::new(cap);
    for (p, o) in plans.into_iter().zip(&objectives) {
        let f = p.features(problem.predicted);
        archive.insert(p, *o, f);
    }
    (archive, objectives)
}

pub fn run_epoch(problem: &EpochProblem<'_>, params: &OptimizerParams, seed: u64) -> EpochSearch {
    run_epoch_observed(problem, params, seed, &mut |_, _| {})
}

/// [`run_epoch`] calling `observe(iteration, archive)` after every
/// completed iteration.
pub fn run_epoch_observed(
    problem: &EpochProblem<'_>,
    params: &OptimizerParams,
    seed: u64,
    observe: &mut dyn FnMut(usize, &ParetoArchive),
) -> EpochSearch {
    let started = Instant::now();
    let budget = Duration::from_secs_f64(params.time_budget.max(0.0));
    let out_of_time = || started.elapsed() >= budget;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exec = params.exec;

    let (mut archive, initial) = initialize_population(problem, params, &mut rng);
    let worst = initial.iter().fold([f64::NEG_INFINITY; 4], |mut w, o| {
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = wk.max(o.get(k));
        }
        w
    });
    let mut search = EpochSearch {
        evaluations: initial.len(),
        initial_population: initial.len(),
        initial_worst: ObjectiveVector::from_array(worst),
        archive: ParetoArchive::new(1),
        iterations: 0,
        budget_exhausted: false,
        surrogate: None,
    };
    let mut y_train: Vec<TrajectorySample> = Vec::new();

    for it in 0..params.gen {
        if out_of_time() {
            search.budget_exhausted = true;
            break;
        }
        let surrogate = search.surrogate.as_ref().map(|s| s as &dyn ObjectivePredictor);
        let starts = ml_select_starts(archive.entries(), surrogate, params.cluster_count, &mut rng);
        let jobs: Vec<(ArchiveEntry, u64)> = starts
            .iter()
            .map(|&i| (archive.entries()[i].clone(), rng.random()))
            .collect();
        let archive_objs = archive.objectives();
        let ctx = SearchContext {
            params,
            evaluator: problem.evaluator,
            surrogate,
            predicted: problem.predicted,
            archive: &archive_objs,
        };
        let mut results = exec.map(&jobs, |(start, s)| {
            local_search(start, &ctx, &mut ChaCha8Rng::seed_from_u64(*s))
        });
        for r in &results {
            search.evaluations += r.trajectory.len();
            y_train.extend(r.trajectory.iter().cloned());
        }
        results.sort_by(|a, b| cmp_features(&a.features, &b.features));
        for r in results {
            archive.insert(r.plan, r.objectives, r.features);
        }

        if it % params.freq == 0 {
            if let Ok(s) = Surrogates::fit(&y_train, &params.surrogate, exec) {
                search.surrogate = Some(s);
            }
            y_train.clear();
        }
        if out_of_time() {
            search.budget_exhausted = true;
            search.iterations = it + 1;
            observe(it, &archive);
            break;
        }
        search.evaluations += ea_step(&mut archive, params, problem.evaluator, problem.predicted, exec, &mut rng);
        search.iterations = it + 1;
        observe(it, &archive);
    }
    search.archive = archive;
    search
}
