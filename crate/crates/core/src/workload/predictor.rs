//! Trailing-window linear regression arrival predictor.
//!
//! Every stream (one per region/model bucket) keeps one least-squares line
//! per window length, fitted on the last `w` observed counts. Each fit's
//! one-step forecast is scored against the next observation; the forecast
//! used for a stream is the one from the window with the lowest mean
//! absolute error over the last `selection_horizon` scored epochs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::WorkloadError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictorConfig {
    pub window_lengths: Vec<usize>,
    pub selection_horizon: usize,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self {
            window_lengths: vec![1, 2, 4, 8, 16],
            selection_horizon: 4,
        }
    }
}

impl PredictorConfig {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let w = &self.window_lengths;
        if w.is_empty() || w[0] == 0 || w.windows(2).any(|p| p[0] >= p[1]) {
            return Err(WorkloadError::InvalidConfig(
                "window_lengths must be non-empty, positive and strictly increasing".into(),
            ));
        }
        if self.selection_horizon == 0 {
            return Err(WorkloadError::InvalidConfig("selection_horizon must be > 0".into()));
        }
        Ok(())
    }

    fn max_window(&self) -> usize {
        *self.window_lengths.last().unwrap()
    }

    /// Observed epochs required before [`ArrivalPredictor::predict_next_epoch`]
    /// is allowed.
    pub fn warm_up(&self) -> usize {
        self.window_lengths[0] + self.selection_horizon
    }
}

/// `y = intercept + slope * t`, with `t = 0` at the oldest point of the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub window: usize,
}

impl LinearFit {
    pub fn fit(ys: &[f64]) -> Self {
        let n = ys.len() as f64;
        let t_mean = (n - 1.0) / 2.0;
        let y_mean = ys.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (t, y) in ys.iter().enumerate() {
            let dt = t as f64 - t_mean;
            sxy += dt * (y - y_mean);
            sxx += dt * dt;
        }
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        Self {
            intercept: y_mean - slope * t_mean,
            slope,
            window: ys.len(),
        }
    }

    /// Forecast one step past the end of the fitted window.
    pub fn forecast(&self) -> f64 {
        self.intercept + self.slope * self.window as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Stream {
    history: VecDeque<f64>,
    fits: Vec<Option<LinearFit>>,
    errors: Vec<VecDeque<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalPredictor {
    config: PredictorConfig,
    streams: Vec<Stream>,
    observed_epochs: usize,
}

/// Rounded per-stream forecasts plus the window chosen for each stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub counts: Vec<u64>,
    pub selected_window: Vec<usize>,
}

impl ArrivalPredictor {
    pub fn new(config: PredictorConfig, n_streams: usize) -> Result<Self, WorkloadError> {
        config.validate()?;
        let k = config.window_lengths.len();
        let stream = Stream {
            history: VecDeque::new(),
            fits: vec![None; k],
            errors: vec![VecDeque::new(); k],
        };
        Ok(Self {
            config,
            streams: vec![stream; n_streams],
            observed_epochs: 0,
        })
    }

    pub fn config(&self) -> &PredictorConfig {
        &self.config
    }

    pub fn n_streams(&self) -> usize {
        self.streams.len()
    }

    pub fn history_len(&self) -> usize {
        self.observed_epochs
    }

    /// Returns the predictor after observing one more epoch of counts.
    pub fn update(&self, observed: &[u64]) -> Result<Self, WorkloadError> {
        let mut next = self.clone();
        next.observe(observed)?;
        Ok(next)
    }

    /// In-place form of [`ArrivalPredictor::update`].
    pub fn observe(&mut self, observed: &[u64]) -> Result<(), WorkloadError> {
        if observed.len() != self.streams.len() {
            return Err(WorkloadError::StreamMismatch {
                expected: self.streams.len(),
                got: observed.len(),
            });
        }
        let horizon = self.config.selection_horizon;
        let max_w = self.config.max_window();
        for (stream, &count) in self.streams.iter_mut().zip(observed) {
            let y = count as f64;
            for (fit, errs) in stream.fits.iter().zip(stream.errors.iter_mut()) {
                if let Some(f) = fit {
                    errs.push_back((f.forecast() - y).abs());
                    if errs.len() > horizon {
                        errs.pop_front();
                    }
                }
            }
            stream.history.push_back(y);
            if stream.history.len() > max_w {
                stream.history.pop_front();
            }
            let h = stream.history.make_contiguous();
            for (slot, &w) in stream.fits.iter_mut().zip(&self.config.window_lengths) {
                if h.len() >= w {
                    *slot = Some(LinearFit::fit(&h[h.len() - w..]));
                }
            }
        }
        self.observed_epochs += 1;
        Ok(())
    }

    /// Unrounded forecast of every window for `stream` (None until the
    /// window has enough history).
    pub fn window_forecasts(&self, stream: usize) -> Vec<Option<f64>> {
        self.streams[stream].fits.iter().map(|f| f.map(|f| f.forecast())).collect()
    }

    /// Mean absolute one-step error of each window over the last
    /// `selection_horizon` epochs; None until a full horizon is scored.
    pub fn trailing_mae(&self, stream: usize) -> Vec<Option<f64>> {
        let h = self.config.selection_horizon;
        self.streams[stream]
            .errors
            .iter()
            .map(|e| (e.len() == h).then(|| e.iter().sum::<f64>() / h as f64))
            .collect()
    }

    /// Index of the window with minimal trailing MAE for `stream`; ties go
    /// to the shorter window.
    pub fn best_fit(&self, stream: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, mae) in self.trailing_mae(stream).into_iter().enumerate() {
            if let Some(m) = mae {
                if best.is_none_or(|(_, b)| m < b) {
                    best = Some((i, m));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    pub fn predict_next_epoch(&self) -> Result<Prediction, WorkloadError> {
        let needed = self.config.warm_up();
        if self.observed_epochs < needed {
            return Err(WorkloadError::InsufficientHistory {
                needed,
                have: self.observed_epochs,
            });
        }
        let mut counts = Vec::with_capacity(self.streams.len());
        let mut selected_window = Vec::with_capacity(self.streams.len());
        for s in 0..self.streams.len() {
            let idx = self.best_fit(s).unwrap_or(0);
            let raw = self.streams[s].fits[idx].map(|f| f.forecast()).unwrap_or(0.0);
            counts.push(raw.max(0.0).round() as u64);
            selected_window.push(self.config.window_lengths[idx]);
        }
        Ok(Prediction {
            counts,
            selected_window,
        })
    }
}
