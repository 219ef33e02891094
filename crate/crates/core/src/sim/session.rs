use log::info;
use serde::{Deserialize, Serialize};

use super::output::{config_hash, RunManifest};
use super::report::{EpochRow, PredictionSource, RunReport, Totals};
use super::{mix, RunOptions, SchedulerKind, SelectionPolicy, SessionError};
use crate::baselines::baseline_plan;
use crate::infrastructure::{Infrastructure, LoadedConfig, SimConfig};
use crate::optimizer::{
    fallback_missed, run_epoch, select_solutions, EpochProblem, Evaluator, Label, ParetoArchive, PlanEvaluator,
    SchedulingPlan, Selections,
};
use crate::sustainability::{evaluate_routed, CarryState, DcBreakdown, ObjectiveVector, PreparedEpoch};
use crate::workload::{generate_trace, synthesize_epoch, ArrivalPredictor, BucketDemand, EpochTrace};

const STREAM_SYNTH: u64 = 1;
const STREAM_ROUTE: u64 = 2;
const STREAM_OPT: u64 = 3;

/// The planned-but-not-executed epoch.
#[derive(Debug, Clone)]
pub struct PendingEpoch {
    pub epoch: usize,
    pub predicted: Vec<u64>,
    pub source: PredictionSource,
    pub archive: ParetoArchive,
    pub selections: Selections,
    pub committed: Option<u64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub id: u64,
    pub labels: Vec<Label>,
    pub objectives: ObjectiveVector,
    /// Bucket label ("region/model") to per-location shares.
    pub plan: Vec<PlanRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRow {
    pub bucket: String,
    pub shares: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoView {
    pub epoch: usize,
    pub locations: Vec<String>,
    pub committed: Option<u64>,
    pub points: Vec<ParetoPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub epoch: usize,
    pub n_epochs: usize,
    pub finished: bool,
    pub label: String,
    pub scheduler: String,
    pub policy: String,
    pub seed: u64,
    pub pending: bool,
    pub committed: Option<u64>,
    pub totals: Totals,
    pub config_hash: String,
    pub version: String,
}

/// A run in progress. Epochs advance by `prepare` (predict and plan),
/// optional `select`, and `step` (execute and account).
pub struct Simulation {
    config: SimConfig,
    infra: Infrastructure,
    options: RunOptions,
    manifest: RunManifest,
    traces: Vec<EpochTrace>,
    epoch: usize,
    carry: CarryState,
    predictor: ArrivalPredictor,
    pending: Option<PendingEpoch>,
    rows: Vec<EpochRow>,
    breakdowns: Vec<Vec<DcBreakdown>>,
    archives: Vec<ParetoView>,
}

impl Simulation {
    pub fn from_loaded(loaded: &LoadedConfig, options: RunOptions) -> crate::Result<Self> {
        let mut sim = Self::new(&loaded.config, options)?;
        sim.manifest.applied_defaults = loaded.applied_defaults.clone();
        Ok(sim)
    }

    /// Generates the observed trace from the config's trace parameters.
    pub fn new(config: &SimConfig, options: RunOptions) -> crate::Result<Self> {
        let effective = effective_config(config, &options);
        let traces = generate_trace(&effective.trace_gen, options.seed)?;
        Self::build(effective, options, traces)
    }

    /// Runs over a given observed trace instead of a generated one.
    pub fn with_traces(config: &SimConfig, options: RunOptions, traces: Vec<EpochTrace>) -> crate::Result<Self> {
        let mut effective = effective_config(config, &options);
        effective.trace_gen.epochs = traces.len() as u32;
        Self::build(effective, options, traces)
    }

    fn build(config: SimConfig, options: RunOptions, traces: Vec<EpochTrace>) -> crate::Result<Self> {
        let infra = config.resolve()?;
        let predictor = ArrivalPredictor::new(config.predictor.clone(), infra.n_buckets())?;
        let manifest = RunManifest {
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash(&config),
            label: options.run_label(),
            scheduler: options.scheduler.to_string(),
            policy: options.policy.to_string(),
            seed: options.seed,
            scale: options.scale,
            epochs: traces.len(),
            applied_defaults: Vec::new(),
            optimizer: config.optimizer.clone(),
        };
        Ok(Self {
            carry: CarryState::initial(&infra),
            config,
            infra,
            options,
            manifest,
            traces,
            epoch: 0,
            predictor,
            pending: None,
            rows: Vec::new(),
            breakdowns: Vec::new(),
            archives: Vec::new(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn infra(&self) -> &Infrastructure {
        &self.infra
    }

    pub fn options(&self) -> &RunOptions {
        &self.options
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    pub fn traces(&self) -> &[EpochTrace] {
        &self.traces
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn n_epochs(&self) -> usize {
        self.traces.len()
    }

    pub fn is_finished(&self) -> bool {
        self.epoch >= self.traces.len()
    }

    pub fn carry(&self) -> &CarryState {
        &self.carry
    }

    pub fn pending(&self) -> Option<&PendingEpoch> {
        self.pending.as_ref()
    }

    pub fn rows(&self) -> &[EpochRow] {
        &self.rows
    }

    pub fn breakdowns(&self) -> &[Vec<DcBreakdown>] {
        &self.breakdowns
    }

    /// Archive of every executed epoch.
    pub fn archives(&self) -> &[ParetoView] {
        &self.archives
    }

    /// Predicts the next epoch and builds its candidate plans. No-op if the
    /// epoch is already prepared.
    pub fn prepare(&mut self) -> crate::Result<&PendingEpoch> {
        if self.pending.is_none() {
            let p = self.plan_epoch()?;
            self.pending = Some(p);
        }
        Ok(self.pending.as_ref().expect("prepared"))
    }

    fn plan_epoch(&self) -> crate::Result<PendingEpoch> {
        if self.is_finished() {
            return Err(SessionError::Finished(self.traces.len()).into());
        }
        let e = self.epoch;
        let seed = self.options.seed;
        let observed = PreparedEpoch::new(&self.traces[e], &self.infra)?;
        let (predicted, source) = match self.predictor.predict_next_epoch() {
            Ok(p) => (p.counts, PredictionSource::Predictor),
            Err(_) => (observed.bucket_counts.clone(), PredictionSource::WarmUp),
        };
        let demands: Vec<BucketDemand> = predicted
            .iter()
            .enumerate()
            .map(|(b, &count)| {
                let (r, m) = self.infra.bucket_parts(b);
                BucketDemand {
                    region: self.infra.regions[r].clone(),
                    model_id: self.infra.models[m].model_id.clone(),
                    count,
                }
            })
            .collect();
        let synthetic = synthesize_epoch(&demands, &self.config.trace_gen, e as u32, mix(seed, e, STREAM_SYNTH));
        let planned = PreparedEpoch::new(&synthetic, &self.infra)?;
        let evaluator = PlanEvaluator {
            infra: &self.infra,
            epoch: &planned,
            carry: &self.carry,
            seed: mix(seed, e, STREAM_ROUTE),
            exec: self.options.exec,
        };

        let (archive, evaluations) = match self.options.scheduler.baseline() {
            None => {
                let problem = EpochProblem {
                    evaluator: &evaluator,
                    predicted: &predicted,
                    n_buckets: self.infra.n_buckets(),
                    n_locations: self.infra.n_locations(),
                };
                let params = &self.config.optimizer;
                let search = run_epoch(&problem, params, mix(seed ^ params.seed, e, STREAM_OPT));
                info!(
                    "epoch {e}: {} evaluations, {} iterations, archive {}",
                    search.evaluations,
                    search.iterations,
                    search.archive.len()
                );
                (search.archive, search.evaluations)
            }
            Some(kind) => {
                let plan = baseline_plan(kind, &predicted, &self.infra, &self.carry);
                let objectives = evaluator.evaluate(&plan);
                let mut archive = ParetoArchive::new(1);
                let features = plan.features(&predicted);
                archive.insert(plan, objectives, features);
                (archive, 1)
            }
        };
        let selections = select_solutions(&archive).expect("archive is never empty");
        Ok(PendingEpoch {
            epoch: e,
            predicted,
            source,
            archive,
            selections,
            committed: None,
            evaluations,
        })
    }

    /// Commits archive entry `plan_id` for the pending epoch.
    pub fn select(&mut self, plan_id: u64) -> crate::Result<()> {
        self.prepare()?;
        let p = self.pending.as_mut().expect("prepared");
        if p.archive.get(plan_id).is_none() {
            return Err(SessionError::UnknownPlan(plan_id).into());
        }
        p.committed = Some(plan_id);
        Ok(())
    }

    pub fn select_label(&mut self, label: Label) -> crate::Result<u64> {
        let id = self.prepare()?.selections.get(label);
        self.select(id)?;
        Ok(id)
    }

    /// Executes the pending epoch (preparing it first if needed) with the
    /// committed plan, or the policy's plan when nothing was committed.
    pub fn step(&mut self) -> crate::Result<&EpochRow> {
        self.prepare()?;
        let pending = self.pending.as_ref().expect("prepared");
        let plan_id = match (pending.committed, self.options.policy.label()) {
            (Some(id), _) => id,
            (None, Some(label)) => pending.selections.get(label),
            (None, None) => return Err(SessionError::NoSelection.into()),
        };
        let pending = self.pending.take().expect("prepared");
        let e = pending.epoch;
        let entry = pending.archive.get(plan_id).expect("validated id").clone();
        let observed = PreparedEpoch::new(&self.traces[e], &self.infra)?;
        let routing = fallback_missed(
            &pending.predicted,
            &observed,
            &entry.plan,
            &self.infra,
            mix(self.options.seed, e, STREAM_ROUTE),
        );
        let ev = evaluate_routed(&routing.routes, e as u32, &self.infra, &self.carry, self.options.exec);
        self.predictor.observe(&observed.bucket_counts)?;

        self.archives.push(self.view_of(&pending));
        self.rows.push(EpochRow {
            epoch: e as u32,
            plan_id,
            labels: pending.selections.labels_of(plan_id),
            prediction: pending.source,
            predicted_requests: pending.predicted.iter().sum(),
            requests: observed.len(),
            counted: ev.outcomes.iter().filter(|o| o.counted).count(),
            missed: routing.missed_total(),
            deferred: ev.outcomes.iter().filter(|o| o.deferred).count(),
            planned: entry.objectives,
            realized: ev.objectives,
            evaluations: pending.evaluations,
            archive_size: pending.archive.len(),
        });
        self.breakdowns.push(ev.per_dc);
        self.carry = ev.carry;
        self.epoch += 1;
        Ok(self.rows.last().expect("just pushed"))
    }

    pub fn run_to_end(&mut self) -> crate::Result<()> {
        if self.options.policy == SelectionPolicy::Interactive {
            return Err(SessionError::InteractiveRequiresOperator.into());
        }
        while !self.is_finished() {
            self.step()?;
        }
        Ok(())
    }

    fn view_of(&self, p: &PendingEpoch) -> ParetoView {
        let points = p
            .archive
            .entries()
            .iter()
            .map(|e| ParetoPoint {
                id: e.id,
                labels: p.selections.labels_of(e.id),
                objectives: e.objectives,
                plan: plan_rows(&e.plan, &self.infra),
            })
            .collect();
        ParetoView {
            epoch: p.epoch,
            locations: self.infra.datacenters.iter().map(|d| d.location_id.clone()).collect(),
            committed: p.committed,
            points,
        }
    }

    /// Candidate plans of the pending epoch, preparing it if needed.
    pub fn pareto(&mut self) -> crate::Result<ParetoView> {
        self.prepare()?;
        Ok(self.view_of(self.pending.as_ref().expect("prepared")))
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            label: self.options.run_label(),
            scheduler: self.options.scheduler.to_string(),
            policy: self.options.policy.to_string(),
            seed: self.options.seed,
            epochs: self.rows.clone(),
            totals: Totals::from_rows(&self.rows),
        }
    }

    pub fn state(&self) -> StateSummary {
        StateSummary {
            epoch: self.epoch,
            n_epochs: self.n_epochs(),
            finished: self.is_finished(),
            label: self.options.run_label(),
            scheduler: self.options.scheduler.to_string(),
            policy: self.options.policy.to_string(),
            seed: self.options.seed,
            pending: self.pending.is_some(),
            committed: self.pending.as_ref().and_then(|p| p.committed),
            totals: Totals::from_rows(&self.rows),
            config_hash: self.manifest.config_hash.clone(),
            version: self.manifest.version.clone(),
        }
    }

    pub fn scheduler(&self) -> SchedulerKind {
        self.options.scheduler
    }
}

fn plan_rows(plan: &SchedulingPlan, infra: &Infrastructure) -> Vec<PlanRow> {
    plan.assignment
        .iter()
        .enumerate()
        .map(|(b, shares)| PlanRow {
            bucket: infra.bucket_label(b),
            shares: shares.clone(),
        })
        .collect()
}

fn effective_config(config: &SimConfig, options: &RunOptions) -> SimConfig {
    let mut c = config.clone();
    c.trace_gen.request_scale *= options.scale;
    if let Some(n) = options.epochs {
        c.trace_gen.epochs = n;
    }
    c.optimizer.exec = options.exec;
    c
}
