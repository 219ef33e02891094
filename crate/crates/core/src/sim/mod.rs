//! The epoch loop: predict, plan, select, execute the observed trace and
//! account. [`Simulation`] exposes each step so an operator can pick plans
//! between epochs; [`run_simulation`] drives it with a fixed policy.

mod output;
mod report;
mod session;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use output::{config_hash, load_reports, write_comparison, write_run, RunManifest};
pub use report::{compare_runs, ComparisonReport, ComparisonRow, EpochRow, PredictionSource, RunReport, Totals};
pub use session::{ParetoPoint, ParetoView, PendingEpoch, Simulation, StateSummary};

use crate::baselines::BaselineKind;
use crate::exec::Exec;
use crate::infrastructure::LoadedConfig;
use crate::optimizer::Label;

#[derive(Debug, Error, PartialEq)]
pub enum SessionError {
    #[error("no plan selected for the pending epoch")]
    NoSelection,
    #[error("no plan with id {0} in the current archive")]
    UnknownPlan(u64),
    #[error("all {0} epochs have been simulated")]
    Finished(usize),
    #[error("interactive selection needs an operator; use serve mode")]
    InteractiveRequiresOperator,
    #[error("no run labelled {0:?} to normalize against")]
    UnknownBaseline(String),
    #[error("unknown {kind} {value:?}")]
    Parse { kind: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    Slit,
    #[serde(rename = "rr")]
    RoundRobin,
    LeastQueue,
    Nearest,
}

impl SchedulerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::Slit => "slit",
            SchedulerKind::RoundRobin => "rr",
            SchedulerKind::LeastQueue => "least-queue",
            SchedulerKind::Nearest => "nearest",
        }
    }

    pub fn baseline(self) -> Option<BaselineKind> {
        match self {
            SchedulerKind::Slit => None,
            SchedulerKind::RoundRobin => Some(BaselineKind::GlobalRoundRobin),
            SchedulerKind::LeastQueue => Some(BaselineKind::LeastQueue),
            SchedulerKind::Nearest => Some(BaselineKind::NearestDatacenter),
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchedulerKind {
    type Err = SessionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slit" => Ok(SchedulerKind::Slit),
            "rr" => Ok(SchedulerKind::RoundRobin),
            "least-queue" => Ok(SchedulerKind::LeastQueue),
            "nearest" => Ok(SchedulerKind::Nearest),
            _ => Err(SessionError::Parse {
                kind: "scheduler",
                value: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    Carbon,
    Ttft,
    Water,
    Cost,
    Balance,
    Interactive,
}

impl SelectionPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionPolicy::Carbon => "carbon",
            SelectionPolicy::Ttft => "ttft",
            SelectionPolicy::Water => "water",
            SelectionPolicy::Cost => "cost",
            SelectionPolicy::Balance => "balance",
            SelectionPolicy::Interactive => "interactive",
        }
    }

    pub fn label(self) -> Option<Label> {
        match self {
            SelectionPolicy::Carbon => Some(Label::Carbon),
            SelectionPolicy::Ttft => Some(Label::Ttft),
            SelectionPolicy::Water => Some(Label::Water),
            SelectionPolicy::Cost => Some(Label::Cost),
            SelectionPolicy::Balance => Some(Label::Balance),
            SelectionPolicy::Interactive => None,
        }
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionPolicy {
    type Err = SessionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "carbon" => Ok(SelectionPolicy::Carbon),
            "ttft" => Ok(SelectionPolicy::Ttft),
            "water" => Ok(SelectionPolicy::Water),
            "cost" => Ok(SelectionPolicy::Cost),
            "balance" => Ok(SelectionPolicy::Balance),
            "interactive" => Ok(SelectionPolicy::Interactive),
            _ => Err(SessionError::Parse {
                kind: "selection policy",
                value: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub scheduler: SchedulerKind,
    pub policy: SelectionPolicy,
    pub seed: u64,
    /// Overrides the configured number of epochs.
    pub epochs: Option<u32>,
    /// Multiplies the configured request scale.
    pub scale: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            scheduler: SchedulerKind::Slit,
            policy: SelectionPolicy::Balance,
            seed: 0,
            epochs: None,
            scale: 1.0,
            exec: Exec::default(),
        }
    }
}

impl RunOptions {
    /// `slit-<policy>` for the optimizer, the scheduler name otherwise.
    pub fn run_label(&self) -> String {
        match self.scheduler {
            SchedulerKind::Slit => format!("slit-{}", self.policy),
            other => other.to_string(),
        }
    }
}

/// Runs every epoch with a fixed selection policy.
pub fn run_simulation(config: &LoadedConfig, options: &RunOptions) -> crate::Result<RunReport> {
    let mut sim = Simulation::from_loaded(config, options.clone())?;
    sim.run_to_end()?;
    Ok(sim.report())
}

/// SplitMix64 finalizer; derives independent sub-seeds.
pub(crate) fn mix(seed: u64, epoch: usize, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add((epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
