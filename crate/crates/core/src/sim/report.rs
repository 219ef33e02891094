use serde::{Deserialize, Serialize};

use super::SessionError;
use crate::optimizer::Label;
use crate::sustainability::ObjectiveVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    /// Not enough history yet; the observed counts stood in.
    WarmUp,
    Predictor,
}

/// One executed epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub epoch: u32,
    pub plan_id: u64,
    /// Every selection label carried by the executed plan.
    pub labels: Vec<Label>,
    pub prediction: PredictionSource,
    pub predicted_requests: u64,
    pub requests: usize,
    /// Requests counted towards this epoch's TTFT.
    pub counted: usize,
    /// Arrivals beyond the prediction, routed by the default plan.
    pub missed: u64,
    /// Requests deferred to the next epoch by saturation.
    pub deferred: usize,
    /// Objectives of the plan on the predicted workload.
    pub planned: ObjectiveVector,
    /// Objectives of the observed trace as executed.
    pub realized: ObjectiveVector,
    pub evaluations: usize,
    pub archive_size: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    /// Per-metric sums of the realized per-epoch values.
    pub objectives: ObjectiveVector,
    /// TTFT averaged over every counted request of the run.
    pub mean_ttft_per_request: f64,
    pub requests: usize,
    pub missed: u64,
    pub deferred: usize,
}

impl Totals {
    pub fn from_rows(rows: &[EpochRow]) -> Self {
        let mut t = [0.0; 4];
        let mut weighted = 0.0;
        let mut counted = 0usize;
        for r in rows {
            for (k, acc) in t.iter_mut().enumerate() {
                *acc += r.realized.get(k);
            }
            weighted += r.realized.ttft * r.counted as f64;
            counted += r.counted;
        }
        Self {
            objectives: ObjectiveVector::from_array(t),
            mean_ttft_per_request: if counted > 0 { weighted / counted as f64 } else { 0.0 },
            requests: rows.iter().map(|r| r.requests).sum(),
            missed: rows.iter().map(|r| r.missed).sum(),
            deferred: rows.iter().map(|r| r.deferred).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub scheduler: String,
    pub policy: String,
    pub seed: u64,
    pub epochs: Vec<EpochRow>,
    pub totals: Totals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub totals: ObjectiveVector,
    /// `totals / baseline totals` per metric.
    pub normalized: ObjectiveVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline: String,
    pub runs: Vec<ComparisonRow>,
}

/// Normalizes every run's totals by the run labelled `baseline`.
pub fn compare_runs(reports: &[RunReport], baseline: &str) -> Result<ComparisonReport, SessionError> {
    let base = reports
        .iter()
        .find(|r| r.label == baseline)
        .ok_or_else(|| SessionError::UnknownBaseline(baseline.into()))?
        .totals
        .objectives;
    let runs = reports
        .iter()
        .map(|r| {
            let t = r.totals.objectives;
            let mut n = [0.0; 4];
            for (k, v) in n.iter_mut().enumerate() {
                *v = t.get(k) / base.get(k);
            }
            ComparisonRow {
                label: r.label.clone(),
                totals: t,
                normalized: ObjectiveVector::from_array(n),
            }
        })
        .collect();
    Ok(ComparisonReport {
        baseline: baseline.into(),
        runs,
    })
}
