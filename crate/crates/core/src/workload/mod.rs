//! LLM inference requests, synthetic traces and arrival prediction.

mod generator;
mod io;
mod predictor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generator::{generate_trace, synthesize_epoch, BucketDemand, TraceGenConfig};
pub use io::{group_into_epochs, read_requests, write_trace};
pub use predictor::{ArrivalPredictor, LinearFit, Prediction, PredictorConfig};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid trace configuration: {0}")]
    InvalidConfig(String),
    #[error("predictor needs {needed} epochs of history, has {have}")]
    InsufficientHistory { needed: usize, have: usize },
    #[error("observed counts have {got} streams, predictor tracks {expected}")]
    StreamMismatch { expected: usize, got: usize },
    #[error("request {request_id} references unknown region {region:?} or model {model:?}")]
    UnknownBucket {
        request_id: u64,
        region: String,
        model: String,
    },
    #[error("trace i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Memory and identity constants of one served LLM.
///
/// Default sizes shipped in the reference config are estimates (fp16
/// parameters, K and V per layer), not measured values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmModelSpec {
    pub model_id: String,
    pub param_count: u64,
    pub bytes_per_param: u8,
    /// KV-cache bytes added per generated token.
    pub kv_bytes_per_token: u64,
}

impl LlmModelSpec {
    /// Parameter memory shared by every request of this model on a node.
    pub fn param_memory(&self) -> u64 {
        self.param_count * u64::from(self.bytes_per_param)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !matches!(self.bytes_per_param, 1 | 2 | 4) {
            return Err("bytes_per_param must be 1, 2 or 4".into());
        }
        if self.param_count == 0 {
            return Err("param_count must be > 0".into());
        }
        if self.kv_bytes_per_token == 0 {
            return Err("kv_bytes_per_token must be > 0".into());
        }
        Ok(())
    }
}

/// One inference request as it appears in a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub request_id: u64,
    pub model_id: String,
    pub origin_region: String,
    pub arrival_epoch: u32,
    /// Seconds since the start of the arrival epoch.
    pub arrival_offset_s: f64,
    pub input_tokens: u32,
    pub output_tokens: u32,
}

impl Request {
    pub fn total_tokens(&self) -> u64 {
        u64::from(self.input_tokens) + u64::from(self.output_tokens)
    }
}

/// All requests arriving during one epoch, in arrival order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochTrace {
    pub epoch_index: u32,
    pub epoch_length_s: f64,
    pub requests: Vec<Request>,
}

impl EpochTrace {
    pub fn empty(epoch_index: u32, epoch_length_s: f64) -> Self {
        Self {
            epoch_index,
            epoch_length_s,
            requests: Vec::new(),
        }
    }

    pub fn is_ordered(&self) -> bool {
        self.requests.iter().all(|r| r.arrival_epoch == self.epoch_index)
            && self
                .requests
                .windows(2)
                .all(|w| w[0].arrival_offset_s <= w[1].arrival_offset_s)
    }
}

/// Bytes held by `request` after `generated_tokens` output tokens: the KV
/// cache so far plus the model's parameter memory.
///
/// `generated_tokens` must not exceed `request.output_tokens`; at
/// `generated_tokens == output_tokens` this is the request's peak footprint.
pub fn memory_footprint(request: &Request, model: &LlmModelSpec, generated_tokens: u32) -> u64 {
    debug_assert!(generated_tokens <= request.output_tokens);
    u64::from(generated_tokens) * model.kv_bytes_per_token + model.param_memory()
}

/// Peak footprint, i.e. [`memory_footprint`] at the last output token.
pub fn peak_footprint(request: &Request, model: &LlmModelSpec) -> u64 {
    memory_footprint(request, model, request.output_tokens)
}
