use serde::{Deserialize, Serialize};

use super::SchedulingPlan;
use crate::sustainability::ObjectiveVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    /// Unique within one archive.
    pub id: u64,
    pub plan: SchedulingPlan,
    pub objectives: ObjectiveVector,
    #[serde(skip)]
    pub features: Vec<f64>,
}

/// Capped set of mutually non-dominated, truly evaluated plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
    capacity: usize,
    next_id: u64,
}

impl ParetoArchive {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: Vec::new(),
            capacity: capacity.max(1),
            next_id: 0,
        }
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, id: u64) -> Option<&ArchiveEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.objectives).collect()
    }

    /// Adds a candidate unless an entry dominates or equals it; removes the
    /// entries it dominates and evicts the most crowded entry on overflow.
    /// Returns whether the candidate was kept.
    pub fn insert(&mut self, plan: SchedulingPlan, objectives: ObjectiveVector, features: Vec<f64>) -> bool {
        if self
            .entries
            .iter()
            .any(|e| e.objectives.dominates(&objectives) || e.objectives == objectives)
        {
            return false;
        }
        self.entries.retain(|e| !objectives.dominates(&e.objectives));
        let id = self.next_id;
        self.next_id += 1;
        self.entries.push(ArchiveEntry {
            id,
            plan,
            objectives,
            features,
        });
        if self.entries.len() > self.capacity {
            let victim = self.most_crowded();
            self.entries.remove(victim);
        }
        self.entries.iter().any(|e| e.id == id)
    }

    /// Index of the entry with the smallest crowding distance, never one of
    /// the per-objective minima. Ties evict the newest entry.
    fn most_crowded(&self) -> usize {
        let objs = self.objectives();
        let crowd = crowding_distances(&objs);
        let mut protected = vec![false; objs.len()];
        for k in 0..4 {
            let best = (0..objs.len())
                .min_by(|&a, &b| objs[a].get(k).total_cmp(&objs[b].get(k)).then(a.cmp(&b)))
                .unwrap();
            protected[best] = true;
        }
        (0..objs.len())
            .filter(|&i| !protected[i])
            .min_by(|&a, &b| crowd[a].total_cmp(&crowd[b]).then(b.cmp(&a)))
            .unwrap_or(objs.len() - 1)
    }

    /// No entry dominates another.
    pub fn is_non_dominated(&self) -> bool {
        self.entries.iter().all(|a| {
            self.entries
                .iter()
                .all(|b| !a.objectives.dominates(&b.objectives))
        })
    }
}

/// Entries of `others` that `v` dominates minus those dominating `v`.
pub fn dominance_rank(v: &ObjectiveVector, others: &[ObjectiveVector]) -> i64 {
    others
        .iter()
        .map(|o| i64::from(v.dominates(o)) - i64::from(o.dominates(v)))
        .sum()
}

/// Crowding distance over min-max normalized objectives; boundary points of
/// every objective are infinite.
pub fn crowding_distances(objs: &[ObjectiveVector]) -> Vec<f64> {
    let n = objs.len();
    let mut d = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for k in 0..4 {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| objs[a].get(k).total_cmp(&objs[b].get(k)).then(a.cmp(&b)));
        let lo = objs[idx[0]].get(k);
        let hi = objs[idx[n - 1]].get(k);
        d[idx[0]] = f64::INFINITY;
        d[idx[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            d[idx[w]] += (objs[idx[w + 1]].get(k) - objs[idx[w - 1]].get(k)) / range;
        }
    }
    d
}

/// Min and max of every objective over `objs`.
pub fn objective_bounds(objs: &[ObjectiveVector]) -> ([f64; 4], [f64; 4]) {
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for o in objs {
        for k in 0..4 {
            lo[k] = lo[k].min(o.get(k));
            hi[k] = hi[k].max(o.get(k));
        }
    }
    (lo, hi)
}

/// Sum of min-max normalized objectives; a degenerate range contributes 0.
pub fn normalized_sum(v: &ObjectiveVector, bounds: &([f64; 4], [f64; 4])) -> f64 {
    (0..4)
        .map(|k| {
            let range = bounds.1[k] - bounds.0[k];
            if range > 0.0 {
                (v.get(k) - bounds.0[k]) / range
            } else {
                0.0
            }
        })
        .sum()
}

/// Exact hypervolume dominated by `points` (minimization) up to `reference`,
/// by slicing along the last dimension. Points not strictly better than the
/// reference in every dimension contribute nothing.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let pts: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
        .cloned()
        .collect();
    hv_rec(pts, reference)
}

fn hv_rec(mut pts: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    let d = reference.len();
    if pts.is_empty() {
        return 0.0;
    }
    if d == 1 {
        let best = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        return reference[0] - best;
    }
    pts.sort_by(|a, b| a[d - 1].total_cmp(&b[d - 1]));
    let sub_ref = &reference[..d - 1];
    let mut volume = 0.0;
    let mut front: Vec<Vec<f64>> = Vec::new();
    for i in 0..pts.len() {
        let p = &pts[i];
        let projected = p[..d - 1].to_vec();
        if !front.iter().any(|q| q.iter().zip(&projected).all(|(a, b)| a <= b)) {
            front.retain(|q| !projected.iter().zip(q).all(|(a, b)| a <= b));
            front.push(projected);
        }
        let upper = if i + 1 < pts.len() { pts[i + 1][d - 1] } else { reference[d - 1] };
        let depth = upper - p[d - 1];
        if depth > 0.0 {
            volume += depth * hv_rec(front.clone(), sub_ref);
        }
    }
    volume
}
