//! Newline-delimited JSON trace files, optionally gzip-compressed (`.gz`).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{EpochTrace, Request, WorkloadError};

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn write_trace(path: &Path, traces: &[EpochTrace]) -> Result<(), WorkloadError> {
    let file = BufWriter::new(File::create(path)?);
    let mut out: Box<dyn Write> = if is_gz(path) {
        Box::new(GzEncoder::new(file, Compression::default()))
    } else {
        Box::new(file)
    };
    for r in traces.iter().flat_map(|t| &t.requests) {
        serde_json::to_writer(&mut out, r).map_err(|e| WorkloadError::Io(e.into()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_requests(path: &Path) -> Result<Vec<Request>, WorkloadError> {
    let file = File::open(path)?;
    let input: Box<dyn Read> = if is_gz(path) {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let mut requests = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|source| WorkloadError::Parse {
            line: i + 1,
            source,
        })?;
        requests.push(r);
    }
    Ok(requests)
}

/// Buckets requests by `arrival_epoch` into `n_epochs` ordered traces.
pub fn group_into_epochs(requests: Vec<Request>, epoch_length_s: f64, n_epochs: u32) -> Vec<EpochTrace> {
    let mut traces: Vec<EpochTrace> = (0..n_epochs).map(|e| EpochTrace::empty(e, epoch_length_s)).collect();
    for r in requests {
        if let Some(t) = traces.get_mut(r.arrival_epoch as usize) {
            t.requests.push(r);
        }
    }
    for t in &mut traces {
        t.requests
            .sort_by(|a, b| a.arrival_offset_s.total_cmp(&b.arrival_offset_s).then(a.request_id.cmp(&b.request_id)));
    }
    traces
}
