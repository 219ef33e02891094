use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use slit_core::sim::{compare_runs, load_reports, write_comparison, write_run, RunOptions};
use slit_core::workload::{generate_trace, group_into_epochs, read_requests, write_trace};
use slit_core::{load_config, Simulation};

/// Runs a whole simulation and writes its outputs under `out`.
pub fn simulate(config: &Path, options: RunOptions, trace: Option<&Path>, out: &Path) -> Result<Simulation> {
    let loaded = load_config(config).with_context(|| format!("loading {}", config.display()))?;
    let mut sim = match trace {
        Some(path) => {
            let requests = read_requests(path).with_context(|| format!("reading {}", path.display()))?;
            let tg = &loaded.config.trace_gen;
            let epochs = options.epochs.unwrap_or(tg.epochs);
            let traces = group_into_epochs(requests, tg.epoch_length_s, epochs);
            Simulation::with_traces(&loaded.config, options, traces)?
        }
        None => Simulation::from_loaded(&loaded, options)?,
    };
    info!("simulating {} epochs as {}", sim.n_epochs(), sim.options().run_label());
    sim.run_to_end()?;
    write_run(out, &sim).with_context(|| format!("writing {}", out.display()))?;
    Ok(sim)
}

/// Writes the configured synthetic trace as NDJSON (gzip when `out` ends in `.gz`).
pub fn gen_trace(config: &Path, seed: u64, out: &Path) -> Result<usize> {
    let loaded = load_config(config).with_context(|| format!("loading {}", config.display()))?;
    let traces = generate_trace(&loaded.config.trace_gen, seed)?;
    write_trace(out, &traces).with_context(|| format!("writing {}", out.display()))?;
    Ok(traces.iter().map(|t| t.requests.len()).sum())
}

/// Compares every run found under `runs` against the run labelled `normalize_to`.
pub fn report(runs: &Path, normalize_to: &str, as_csv: bool, out: &mut dyn Write) -> Result<()> {
    let reports = load_reports(runs).with_context(|| format!("reading runs in {}", runs.display()))?;
    anyhow::ensure!(!reports.is_empty(), "no report.json found in {}", runs.display());
    let comparison = compare_runs(&reports, normalize_to)?;
    write_comparison(out, &comparison, as_csv)?;
    Ok(())
}
