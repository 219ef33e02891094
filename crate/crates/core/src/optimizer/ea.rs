use rand::Rng;

use super::{Evaluator, OptimizerParams, ParetoArchive, SchedulingPlan};
use crate::exec::Exec;

/// Each bucket's distribution is copied from one parent chosen uniformly.
pub fn crossover(a: &SchedulingPlan, b: &SchedulingPlan, rng: &mut impl Rng) -> SchedulingPlan {
    SchedulingPlan {
        assignment: a
            .assignment
            .iter()
            .zip(&b.assignment)
            .map(|(x, y)| if rng.random_bool(0.5) { x.clone() } else { y.clone() })
            .collect(),
    }
}

/// With probability `p_mut` per bucket, moves a random mass in (0, step]
/// between two distinct random locations.
pub fn mutate(plan: &mut SchedulingPlan, p_mut: f64, step: f64, quantum: Option<f64>, rng: &mut impl Rng) {
    let n_loc = plan.n_locations();
    for b in 0..plan.n_buckets() {
        if n_loc < 2 || !rng.random_bool(p_mut) {
            continue;
        }
        let sources: Vec<usize> = (0..n_loc).filter(|&l| plan.assignment[b][l] > 0.0).collect();
        let from = sources[rng.random_range(0..sources.len())];
        let mut to = rng.random_range(0..n_loc - 1);
        if to >= from {
            to += 1;
        }
        // (0, step] rather than [0, step)
        let mut mass = step * (1.0 - rng.random::<f64>());
        if let Some(q) = quantum {
            mass = (mass / q).ceil() * q;
        }
        plan.move_mass(b, from, to, mass);
    }
    if let Some(q) = quantum {
        plan.snap(q);
    }
}

/// One generation: `|archive|` children from random distinct parent pairs,
/// evaluated (possibly concurrently) and merged in feature order. Returns
/// the number of evaluations.
pub fn ea_step(
    archive: &mut ParetoArchive,
    params: &OptimizerParams,
    evaluator: &dyn Evaluator,
    predicted: &[u64],
    exec: Exec,
    rng: &mut impl Rng,
) -> usize {
    let n = archive.len();
    if n < 2 {
        return 0;
    }
    let children: Vec<SchedulingPlan> = (0..n)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let e = archive.entries();
            let mut child = crossover(&e[i].plan, &e[j].plan, rng);
            mutate(&mut child, params.p_mut, params.step, params.quantum, rng);
            child
        })
        .collect();
    let scored = exec.map(&children, |c| (evaluator.evaluate(c), c.features(predicted)));
    let mut merged: Vec<(SchedulingPlan, _, Vec<f64>)> =
        children.into_iter().zip(scored).map(|(c, (o, f))| (c, o, f)).collect();
    merged.sort_by(|a, b| super::cmp_features(&a.2, &b.2));
    for (plan, objectives, features) in merged {
        archive.insert(plan, objectives, features);
    }
    n
}
