//! Arrival predictor: exact on constant series, beats the last-value
//! heuristic on ramps, and picks the window whose trailing MAE (recomputed
//! here from scratch) is minimal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slit_core::workload::{ArrivalPredictor, PredictorConfig};

use crate::common::ensure;

const SERIES: u64 = 200;
const MAE_TOL: f64 = 1e-9;

fn feed(p: &mut ArrivalPredictor, series: &[u64]) -> Result<(), String> {
    for &v in series {
        p.observe(&[v]).map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Least-squares line through `(t, ys[t])`, evaluated at `t = ys.len()`.
fn one_step(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() == 1 {
        return ys[0];
    }
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for (t, &y) in ys.iter().enumerate() {
        let t = t as f64;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    let intercept = (sy - slope * st) / n;
    intercept + slope * n
}

/// Mean absolute one-step error of window `w` over the last `h` points.
fn trailing_mae(series: &[f64], w: usize, h: usize) -> Option<f64> {
    let t_end = series.len();
    if t_end < h || t_end - h < w {
        return None;
    }
    let total: f64 = (t_end - h..t_end).map(|t| (one_step(&series[t - w..t]) - series[t]).abs()).sum();
    Some(total / h as f64)
}

fn constant() -> Result<(), String> {
    for value in [0u64, 1, 10, 977] {
        let mut p = ArrivalPredictor::new(PredictorConfig::default(), 1).map_err(|e| e.to_string())?;
        feed(&mut p, &[value; 24])?;
        let got = p.predict_next_epoch().map_err(|e| e.to_string())?.counts[0];
        ensure(got == value, || format!("constant {value}: predicted {got}"))?;
    }
    Ok(())
}

fn ramps() -> Result<(), String> {
    for (start, slope) in [(1u64, 1u64), (5, 3), (100, 7), (0, 20)] {
        let series: Vec<u64> = (0..20).map(|t| start + slope * t).collect();
        let next = (start + slope * 20) as f64;
        let mut p = ArrivalPredictor::new(PredictorConfig::default(), 1).map_err(|e| e.to_string())?;
        feed(&mut p, &series)?;
        let best = p.best_fit(0).ok_or("no eligible window")?;
        let forecast = p.window_forecasts(0)[best].ok_or("selected window has no fit")?;
        let err = (forecast - next).abs();
        let last_value_err = (*series.last().unwrap() as f64 - next).abs();
        ensure(err < last_value_err, || {
            format!("ramp {start}+{slope}t: error {err} not below last-value {last_value_err}")
        })?;
    }
    Ok(())
}

fn argmin_against_recomputation() -> Result<(), String> {
    let cfg = PredictorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for s in 0..SERIES {
        let len = rng.random_range(cfg.warm_up()..60);
        let series: Vec<u64> = (0..len).map(|_| rng.random_range(0..300)).collect();
        let mut p = ArrivalPredictor::new(cfg.clone(), 1).map_err(|e| e.to_string())?;
        feed(&mut p, &series)?;
        let ys: Vec<f64> = series.iter().map(|&v| v as f64).collect();
        let ours: Vec<Option<f64>> = cfg
            .window_lengths
            .iter()
            .map(|&w| trailing_mae(&ys, w, cfg.selection_horizon))
            .collect();
        for (k, (mine, theirs)) in ours.iter().zip(p.trailing_mae(0)).enumerate() {
            let agree = match (mine, theirs) {
                (Some(a), Some(b)) => (a - b).abs() <= MAE_TOL * a.max(1.0),
                (None, None) => true,
                _ => false,
            };
            ensure(agree, || format!("series {s}, window {}: {mine:?} vs {theirs:?}", cfg.window_lengths[k]))?;
        }
        let Some(best) = p.best_fit(0) else {
            return Err(format!("series {s}: no window selected"));
        };
        let chosen = ours[best].ok_or("selected window has no MAE")?;
        for (k, m) in ours.iter().enumerate() {
            if let Some(m) = m {
                ensure(chosen <= m + MAE_TOL * m.max(1.0), || {
                    format!("series {s}: chosen MAE {chosen} > window {} MAE {m}", cfg.window_lengths[k])
                })?;
            }
        }
    }
    Ok(())
}

pub fn run() -> Result<String, String> {
    constant()?;
    ramps()?;
    argmin_against_recomputation()?;
    Ok(format!("constant exact, ramps beat last-value, argmin verified on {SERIES} random series"))
}
