use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::report::{ComparisonReport, RunReport};
use super::session::Simulation;
use crate::infrastructure::SimConfig;
use crate::optimizer::OptimizerParams;
use crate::sustainability::evaluate::BreakdownRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    /// SHA-256 of the effective configuration's canonical JSON.
    pub config_hash: String,
    pub label: String,
    pub scheduler: String,
    pub policy: String,
    pub seed: u64,
    pub scale: f64,
    pub epochs: usize,
    /// Config keys that were omitted and filled with defaults.
    pub applied_defaults: Vec<String>,
    pub optimizer: OptimizerParams,
}

pub fn config_hash(config: &SimConfig) -> String {
    Sha256::digest(config.to_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> crate::Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Writes `manifest.json`, `report.json`, `epochs.csv` and one
/// `archive/epoch_NNNN.json` per executed epoch under `dir`.
pub fn write_run(dir: &Path, sim: &Simulation) -> crate::Result<()> {
    fs::create_dir_all(dir.join("archive"))?;
    write_json(&dir.join("manifest.json"), sim.manifest())?;
    write_json(&dir.join("report.json"), &sim.report())?;
    let mut csv = csv::Writer::from_path(dir.join("epochs.csv"))?;
    for (row, per_dc) in sim.rows().iter().zip(sim.breakdowns()) {
        for b in per_dc {
            csv.serialize(BreakdownRow::new(row.epoch, b, sim.infra()))?;
        }
    }
    csv.flush()?;
    for view in sim.archives() {
        write_json(&dir.join("archive").join(format!("epoch_{:04}.json", view.epoch)), view)?;
    }
    Ok(())
}

/// Every `report.json` directly in `dir` or one level below, sorted by path.
pub fn load_reports(dir: &Path) -> crate::Result<Vec<RunReport>> {
    let mut paths: Vec<PathBuf> = Vec::new();
    let direct = dir.join("report.json");
    if direct.is_file() {
        paths.push(direct);
    }
    for entry in fs::read_dir(dir)? {
        let p = entry?.path().join("report.json");
        if p.is_file() {
            paths.push(p);
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| Ok(serde_json::from_str(&fs::read_to_string(p)?)?))
        .collect()
}

#[derive(Serialize)]
struct ComparisonCsvRow<'a> {
    label: &'a str,
    ttft: f64,
    carbon: f64,
    water: f64,
    cost: f64,
    ttft_norm: f64,
    carbon_norm: f64,
    water_norm: f64,
    cost_norm: f64,
}

pub fn write_comparison(out: &mut dyn Write, report: &ComparisonReport, as_csv: bool) -> crate::Result<()> {
    if !as_csv {
        serde_json::to_writer_pretty(&mut *out, report)?;
        out.write_all(b"\n")?;
        return Ok(());
    }
    let mut w = csv::Writer::from_writer(out);
    for r in &report.runs {
        w.serialize(ComparisonCsvRow {
            label: &r.label,
            ttft: r.totals.ttft,
            carbon: r.totals.carbon,
            water: r.totals.water,
            cost: r.totals.cost,
            ttft_norm: r.normalized.ttft,
            carbon_norm: r.normalized.carbon,
            water_norm: r.normalized.water,
            cost_norm: r.normalized.cost,
        })?;
    }
    w.flush()?;
    Ok(())
}
