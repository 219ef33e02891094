use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

/// Per-(region, model) bucket probability distribution over datacenters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulingPlan {
    /// `assignment[bucket][location]`.
    pub assignment: Vec<Vec<f64>>,
}

pub const SUM_TOLERANCE: f64 = 1e-9;

impl SchedulingPlan {
    pub fn uniform(n_buckets: usize, n_locations: usize) -> Self {
        Self {
            assignment: vec![vec![1.0 / n_locations as f64; n_locations]; n_buckets],
        }
    }

    pub fn one_hot(n_buckets: usize, n_locations: usize, location: usize) -> Self {
        let mut row = vec![0.0; n_locations];
        row[location] = 1.0;
        Self {
            assignment: vec![row; n_buckets],
        }
    }

    /// Every bucket sent to its own location.
    pub fn from_targets(targets: &[usize], n_locations: usize) -> Self {
        Self {
            assignment: targets
                .iter()
                .map(|&t| {
                    let mut row = vec![0.0; n_locations];
                    row[t] = 1.0;
                    row
                })
                .collect(),
        }
    }

    /// Flat-Dirichlet random distributions.
    pub fn random(n_buckets: usize, n_locations: usize, rng: &mut impl Rng) -> Self {
        let assignment = (0..n_buckets)
            .map(|_| {
                let mut row: Vec<f64> = (0..n_locations).map(|_| Exp1.sample(rng)).collect();
                normalize(&mut row);
                row
            })
            .collect();
        Self { assignment }
    }

    pub fn n_buckets(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_locations(&self) -> usize {
        self.assignment.first().map_or(0, Vec::len)
    }

    pub fn validate(&self, n_buckets: usize, n_locations: usize) -> Result<(), String> {
        if self.assignment.len() != n_buckets {
            return Err(format!("plan has {} buckets, expected {n_buckets}", self.assignment.len()));
        }
        for (b, row) in self.assignment.iter().enumerate() {
            if row.len() != n_locations {
                return Err(format!("bucket {b} has {} locations, expected {n_locations}", row.len()));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(format!("bucket {b} has a negative or non-finite share"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > SUM_TOLERANCE {
                return Err(format!("bucket {b} sums to {s}"));
            }
        }
        Ok(())
    }

    /// Moves up to `mass` of bucket `b` from `from` to `to`.
    pub fn move_mass(&mut self, b: usize, from: usize, to: usize, mass: f64) {
        let row = &mut self.assignment[b];
        let m = mass.min(row[from]).max(0.0);
        row[from] -= m;
        row[to] += m;
        normalize(row);
    }

    /// Rounds every distribution to multiples of `quantum` (largest
    /// remainder, ties to the lowest location).
    pub fn snap(&mut self, quantum: f64) {
        let units = (1.0 / quantum).round() as usize;
        for row in &mut self.assignment {
            let raw: Vec<f64> = row.iter().map(|p| p * units as f64).collect();
            let mut k: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
            let rest = units.saturating_sub(k.iter().sum());
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
            for &l in order.iter().cycle().take(rest) {
                k[l] += 1;
            }
            for (p, &c) in row.iter_mut().zip(&k) {
                *p = c as f64 / units as f64;
            }
        }
    }

    /// Plan entries in bucket-major order followed by each location's share
    /// of the predicted request volume.
    pub fn features(&self, predicted: &[u64]) -> Vec<f64> {
        let n_loc = self.n_locations();
        let mut f: Vec<f64> = self.assignment.iter().flatten().copied().collect();
        let total: u64 = predicted.iter().sum();
        let mut load = vec![0.0; n_loc];
        if total > 0 {
            for (row, &c) in self.assignment.iter().zip(predicted) {
                for (l, p) in row.iter().enumerate() {
                    load[l] += p * c as f64 / total as f64;
                }
            }
        }
        f.extend(load);
        f
    }
}

pub(crate) fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    if s > 0.0 {
        for p in row.iter_mut() {
            *p /= s;
        }
    } else {
        let u = 1.0 / row.len() as f64;
        row.iter_mut().for_each(|p| *p = u);
    }
}
