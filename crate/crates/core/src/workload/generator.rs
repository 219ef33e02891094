use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use super::{EpochTrace, Request, WorkloadError};

/// Parameters of the synthetic trace generator.
///
/// The expected request count of epoch `e` is
/// `base_requests_per_epoch * request_scale / delay_scale * diurnal(e) * burst(e)`:
/// halving the delay between requests doubles the arrival rate. Counts are
/// Poisson around that mean, and token counts are log-normal around the
/// configured means times `token_scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceGenConfig {
    pub epochs: u32,
    pub epoch_length_s: f64,
    pub base_requests_per_epoch: f64,
    /// Fraction of requests per model id; must sum to 1.
    pub model_shares: BTreeMap<String, f64>,
    /// Relative request weight per origin region.
    pub region_weights: BTreeMap<String, f64>,
    /// Relative swing of the daily cosine curve, in [0, 1].
    pub diurnal_amplitude: f64,
    pub peak_hour: f64,
    pub start_hour: f64,
    pub burst_probability: f64,
    /// A bursting epoch multiplies its rate by `1 + burst_amplitude`.
    pub burst_amplitude: f64,
    pub mean_input_tokens: f64,
    pub mean_output_tokens: f64,
    pub token_sigma: f64,
    pub max_tokens: u32,
    pub delay_scale: f64,
    pub token_scale: f64,
    pub request_scale: f64,
}

impl Default for TraceGenConfig {
    fn default() -> Self {
        Self {
            epochs: 96,
            epoch_length_s: 900.0,
            base_requests_per_epoch: 200.0,
            model_shares: BTreeMap::from([
                ("llama-70b".to_string(), 0.1),
                ("llama-7b".to_string(), 0.9),
            ]),
            region_weights: BTreeMap::from([
                ("east-asia".to_string(), 0.3),
                ("north-america".to_string(), 0.35),
                ("oceania".to_string(), 0.1),
                ("western-europe".to_string(), 0.25),
            ]),
            diurnal_amplitude: 0.5,
            peak_hour: 14.0,
            start_hour: 0.0,
            burst_probability: 0.1,
            burst_amplitude: 1.0,
            mean_input_tokens: 256.0,
            mean_output_tokens: 128.0,
            token_sigma: 0.8,
            max_tokens: 8192,
            delay_scale: 0.5,
            token_scale: 3.0,
            request_scale: 10.0,
        }
    }
}

impl TraceGenConfig {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |m: &str| Err(WorkloadError::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be > 0");
        }
        if self.model_shares.is_empty() {
            return bad("model_shares must not be empty");
        }
        if self.model_shares.values().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad("model shares must be finite and >= 0");
        }
        let total: f64 = self.model_shares.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad("model shares must sum to 1");
        }
        if self.region_weights.is_empty()
            || self.region_weights.values().any(|w| !(w.is_finite() && *w >= 0.0))
            || self.region_weights.values().sum::<f64>() <= 0.0
        {
            return bad("region_weights must be non-empty, >= 0 and not all zero");
        }
        if self.epoch_length_s.is_nan() || self.epoch_length_s <= 0.0 {
            return bad("epoch_length_s must be > 0");
        }
        if self.delay_scale.is_nan() || self.delay_scale <= 0.0 {
            return bad("delay_scale must be > 0");
        }
        if self.request_scale < 0.0 || self.base_requests_per_epoch < 0.0 {
            return bad("request rate must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.diurnal_amplitude) {
            return bad("diurnal_amplitude must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.burst_probability) || self.burst_amplitude < 0.0 {
            return bad("burst_probability must lie in [0, 1] and burst_amplitude >= 0");
        }
        if !(self.mean_input_tokens > 0.0 && self.mean_output_tokens > 0.0 && self.token_scale > 0.0)
        {
            return bad("token means and token_scale must be > 0");
        }
        if self.max_tokens == 0 || self.token_sigma < 0.0 {
            return bad("max_tokens must be > 0 and token_sigma >= 0");
        }
        Ok(())
    }

    /// Expected arrivals of epoch `epoch` before burst noise.
    pub fn base_rate(&self, epoch: u32) -> f64 {
        let hour = self.start_hour + f64::from(epoch) * self.epoch_length_s / 3600.0;
        let diurnal = 1.0 + self.diurnal_amplitude * (2.0 * PI * (hour - self.peak_hour) / 24.0).cos();
        self.base_requests_per_epoch * self.request_scale / self.delay_scale * diurnal
    }
}

/// Token-count sampler shared by trace generation and prediction
/// materialization.
struct TokenSampler {
    input: Option<LogNormal<f64>>,
    output: Option<LogNormal<f64>>,
    input_mean: f64,
    output_mean: f64,
    max: u32,
}

impl TokenSampler {
    fn new(cfg: &TraceGenConfig) -> Self {
        let input_mean = cfg.mean_input_tokens * cfg.token_scale;
        let output_mean = cfg.mean_output_tokens * cfg.token_scale;
        // Log-normal with the requested arithmetic mean.
        let mk = |mean: f64| {
            if cfg.token_sigma == 0.0 {
                None
            } else {
                let mu = mean.ln() - cfg.token_sigma * cfg.token_sigma / 2.0;
                LogNormal::new(mu, cfg.token_sigma).ok()
            }
        };
        Self {
            input: mk(input_mean),
            output: mk(output_mean),
            input_mean,
            output_mean,
            max: cfg.max_tokens,
        }
    }

    fn draw(&self, dist: &Option<LogNormal<f64>>, mean: f64, rng: &mut impl Rng) -> u32 {
        let v = match dist {
            Some(d) => d.sample(rng),
            None => mean,
        };
        (v.round() as u64).clamp(1, u64::from(self.max)) as u32
    }

    fn sample(&self, rng: &mut impl Rng) -> (u32, u32) {
        let i = self.draw(&self.input, self.input_mean, rng);
        let o = self.draw(&self.output, self.output_mean, rng);
        (i, o)
    }
}

fn pick<'a>(table: &'a [(String, f64)], total: f64, rng: &mut impl Rng) -> &'a str {
    let mut u = rng.random::<f64>() * total;
    for (k, w) in table {
        if u < *w {
            return k;
        }
        u -= w;
    }
    // Rounding at the top end: fall back to the last positive entry.
    &table.iter().rev().find(|(_, w)| *w > 0.0).unwrap_or(&table[0]).0
}

/// Generates `cfg.epochs` epochs of synthetic requests. Deterministic for a
/// fixed `(cfg, seed)`.
pub fn generate_trace(cfg: &TraceGenConfig, seed: u64) -> Result<Vec<EpochTrace>, WorkloadError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let models: Vec<(String, f64)> = cfg.model_shares.clone().into_iter().collect();
    let regions: Vec<(String, f64)> = cfg.region_weights.clone().into_iter().collect();
    let region_total: f64 = regions.iter().map(|r| r.1).sum();
    let tokens = TokenSampler::new(cfg);
    let mut next_id = 0u64;
    let mut traces = Vec::with_capacity(cfg.epochs as usize);
    for epoch in 0..cfg.epochs {
        let mut rate = cfg.base_rate(epoch);
        if rng.random::<f64>() < cfg.burst_probability {
            rate *= 1.0 + cfg.burst_amplitude;
        }
        let count = if rate > 0.0 {
            Poisson::new(rate).map(|p| p.sample(&mut rng) as u64).unwrap_or(0)
        } else {
            0
        };
        let mut requests: Vec<Request> = (0..count)
            .map(|_| {
                let model_id = pick(&models, 1.0, &mut rng).to_string();
                let origin_region = pick(&regions, region_total, &mut rng).to_string();
                let (input_tokens, output_tokens) = tokens.sample(&mut rng);
                Request {
                    request_id: 0,
                    model_id,
                    origin_region,
                    arrival_epoch: epoch,
                    arrival_offset_s: rng.random::<f64>() * cfg.epoch_length_s,
                    input_tokens,
                    output_tokens,
                }
            })
            .collect();
        requests.sort_by(|a, b| a.arrival_offset_s.total_cmp(&b.arrival_offset_s));
        for r in &mut requests {
            r.request_id = next_id;
            next_id += 1;
        }
        traces.push(EpochTrace {
            epoch_index: epoch,
            epoch_length_s: cfg.epoch_length_s,
            requests,
        });
    }
    Ok(traces)
}

/// Predicted request count of one (region, model) bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketDemand {
    pub region: String,
    pub model_id: String,
    pub count: u64,
}

/// Materializes predicted bucket counts into a synthetic epoch whose token
/// counts follow the configured distribution. Used to evaluate plans against
/// a prediction rather than the (not yet observed) real trace.
pub fn synthesize_epoch(
    demands: &[BucketDemand],
    cfg: &TraceGenConfig,
    epoch: u32,
    seed: u64,
) -> EpochTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tokens = TokenSampler::new(cfg);
    let mut requests = Vec::new();
    for d in demands {
        for _ in 0..d.count {
            let (input_tokens, output_tokens) = tokens.sample(&mut rng);
            requests.push(Request {
                request_id: 0,
                model_id: d.model_id.clone(),
                origin_region: d.region.clone(),
                arrival_epoch: epoch,
                arrival_offset_s: rng.random::<f64>() * cfg.epoch_length_s,
                input_tokens,
                output_tokens,
            });
        }
    }
    requests.sort_by(|a, b| a.arrival_offset_s.total_cmp(&b.arrival_offset_s));
    for (i, r) in requests.iter_mut().enumerate() {
        r.request_id = i as u64;
    }
    EpochTrace {
        epoch_index: epoch,
        epoch_length_s: cfg.epoch_length_s,
        requests,
    }
}
