use rand::seq::SliceRandom;
use rand::Rng;

use super::archive::{dominance_rank, normalized_sum, objective_bounds, ArchiveEntry};
use super::{Evaluator, ObjectivePredictor, OptimizerParams, SchedulingPlan};
use crate::sustainability::ObjectiveVector;

/// A truly evaluated point visited during local search.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub features: Vec<f64>,
    pub objectives: ObjectiveVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub plan: SchedulingPlan,
    pub objectives: ObjectiveVector,
    pub features: Vec<f64>,
    pub trajectory: Vec<TrajectorySample>,
}

/// Moves `step` of one random bucket's mass from a random location that
/// holds some to another random location.
pub fn neighbor(plan: &SchedulingPlan, step: f64, quantum: Option<f64>, rng: &mut impl Rng) -> SchedulingPlan {
    let mut p = plan.clone();
    let n_loc = p.n_locations();
    if n_loc < 2 || p.n_buckets() == 0 {
        return p;
    }
    let b = rng.random_range(0..p.n_buckets());
    let sources: Vec<usize> = (0..n_loc).filter(|&l| p.assignment[b][l] > 0.0).collect();
    let from = sources[rng.random_range(0..sources.len())];
    let mut to = rng.random_range(0..n_loc - 1);
    if to >= from {
        to += 1;
    }
    p.move_mass(b, from, to, step);
    if let Some(q) = quantum {
        p.snap(q);
    }
    p
}

/// Shared inputs of every search step within one epoch.
pub struct SearchContext<'a> {
    pub params: &'a OptimizerParams,
    pub evaluator: &'a dyn Evaluator,
    pub surrogate: Option<&'a dyn ObjectivePredictor>,
    /// Predicted per-bucket counts, used for plan features.
    pub predicted: &'a [u64],
    /// True objectives of the archive when the step started.
    pub archive: &'a [ObjectiveVector],
}

impl SearchContext<'_> {
    pub fn truly_evaluated(&self) -> usize {
        let n = (self.params.guided_fraction * self.params.candidates_per_step as f64).ceil() as usize;
        n.clamp(1, self.params.candidates_per_step)
    }
}

/// Index of the best point: highest dominance rank against `archive`, then
/// lowest normalized sum over `points`, then lowest index.
fn best_by_rank(points: &[ObjectiveVector], archive: &[ObjectiveVector]) -> usize {
    let bounds = objective_bounds(points);
    let ranks: Vec<i64> = points.iter().map(|p| dominance_rank(p, archive)).collect();
    let sums: Vec<f64> = points.iter().map(|p| normalized_sum(p, &bounds)).collect();
    (0..points.len())
        .min_by(|&a, &b| ranks[b].cmp(&ranks[a]).then(sums[a].total_cmp(&sums[b])).then(a.cmp(&b)))
        .unwrap_or(0)
}

/// One ML-guided neighbourhood step from `start`. The surrogate (if any)
/// ranks `candidates_per_step` neighbours and the top `guided_fraction` are
/// truly evaluated; without a surrogate a random subset is. The result is
/// the best of the start and its evaluated neighbours.
pub fn local_search(start: &ArchiveEntry, ctx: &SearchContext<'_>, rng: &mut impl Rng) -> SearchResult {
    let p = ctx.params;
    let candidates: Vec<SchedulingPlan> = (0..p.candidates_per_step)
        .map(|_| neighbor(&start.plan, p.step, p.quantum, rng))
        .collect();
    let k = ctx.truly_evaluated();
    let chosen: Vec<usize> = match ctx.surrogate {
        Some(model) => {
            let predicted: Vec<ObjectiveVector> = candidates
                .iter()
                .map(|c| model.predict(&c.features(ctx.predicted)))
                .collect();
            let bounds = objective_bounds(&predicted);
            let mut order: Vec<usize> = (0..candidates.len()).collect();
            let ranks: Vec<i64> = predicted.iter().map(|v| dominance_rank(v, ctx.archive)).collect();
            let sums: Vec<f64> = predicted.iter().map(|v| normalized_sum(v, &bounds)).collect();
            order.sort_by(|&a, &b| ranks[b].cmp(&ranks[a]).then(sums[a].total_cmp(&sums[b])).then(a.cmp(&b)));
            order.truncate(k);
            order
        }
        None => {
            let mut order: Vec<usize> = (0..candidates.len()).collect();
            order.shuffle(rng);
            order.truncate(k);
            order.sort_unstable();
            order
        }
    };

    let mut trajectory = Vec::with_capacity(chosen.len());
    let mut pool = vec![start.objectives];
    for &i in &chosen {
        let objectives = ctx.evaluator.evaluate(&candidates[i]);
        trajectory.push(TrajectorySample {
            features: candidates[i].features(ctx.predicted),
            objectives,
        });
        pool.push(objectives);
    }
    let best = best_by_rank(&pool, ctx.archive);
    if best == 0 {
        SearchResult {
            plan: start.plan.clone(),
            objectives: start.objectives,
            features: start.plan.features(ctx.predicted),
            trajectory,
        }
    } else {
        let t = &trajectory[best - 1];
        SearchResult {
            plan: candidates[chosen[best - 1]].clone(),
            objectives: t.objectives,
            features: t.features.clone(),
            trajectory,
        }
    }
}

fn distance2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Greedy farthest-point clustering: the first center is point 0, each next
/// center the point farthest from all chosen centers. Returns the members of
/// each cluster (ties to the lowest center / index).
pub fn farthest_point_clusters(points: &[&[f64]], k: usize) -> Vec<Vec<usize>> {
    if points.is_empty() || k == 0 {
        return Vec::new();
    }
    let k = k.min(points.len());
    let mut centers = vec![0usize];
    let mut dist: Vec<f64> = points.iter().map(|p| distance2(p, points[0])).collect();
    while centers.len() < k {
        let next = (0..points.len())
            .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
            .unwrap();
        if dist[next] == 0.0 {
            break;
        }
        centers.push(next);
        for (i, p) in points.iter().enumerate() {
            dist[i] = dist[i].min(distance2(p, points[next]));
        }
    }
    let mut clusters = vec![Vec::new(); centers.len()];
    for (i, p) in points.iter().enumerate() {
        let c = (0..centers.len())
            .min_by(|&a, &b| {
                distance2(p, points[centers[a]])
                    .total_cmp(&distance2(p, points[centers[b]]))
                    .then(a.cmp(&b))
            })
            .unwrap();
        clusters[c].push(i);
    }
    clusters
}

/// Picks one start per cluster of the archive: the plan with the best
/// surrogate-predicted dominance rank, or a uniform random member before the
/// surrogate has been trained. Returns archive indices.
pub fn ml_select_starts(
    entries: &[ArchiveEntry],
    surrogate: Option<&dyn ObjectivePredictor>,
    cluster_count: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let feats: Vec<&[f64]> = entries.iter().map(|e| e.features.as_slice()).collect();
    let archive: Vec<ObjectiveVector> = entries.iter().map(|e| e.objectives).collect();
    farthest_point_clusters(&feats, cluster_count)
        .into_iter()
        .map(|members| match surrogate {
            Some(model) => {
                let predicted: Vec<ObjectiveVector> =
                    members.iter().map(|&i| model.predict(&entries[i].features)).collect();
                members[best_by_rank(&predicted, &archive)]
            }
            None => members[rng.random_range(0..members.len())],
        })
        .collect()
}
