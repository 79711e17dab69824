//! Brute-force reference computations and random instance families shared by
//! the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use tisched::model::{team_covers, Intervention, Technician};
use tisched::Instance;

/// Smallest technician subset covering `j`, by enumerating all subsets.
pub fn brute_mintec(instance: &Instance, j: usize) -> Option<usize> {
    let techs = instance.technicians();
    let job = instance.intervention(j);
    (0u32..1 << techs.len())
        .filter(|mask| team_covers(techs.iter().filter(|t| mask & (1 << t.id) != 0), job))
        .map(|mask| mask.count_ones() as usize)
        .min()
}

/// Largest total weight of a successor-closed, affordable set containing `forced`.
pub fn brute_knapsack(instance: &Instance, weights: &[u64], forced: &BTreeSet<usize>) -> Option<u64> {
    let n = instance.interventions().len();
    (0u32..1 << n)
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect::<BTreeSet<usize>>())
        .filter(|s| forced.is_subset(s) && instance.is_successor_closed(s) && instance.cost_of(s) <= instance.budget())
        .map(|s| s.iter().map(|&i| weights[i]).sum())
        .max()
}

/// Random skills and random cumulative requirements; some interventions may
/// be uncoverable.
pub fn random_cover_instance(seed: u64, max_techs: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domains = rng.gen_range(1..=5);
    let levels = rng.gen_range(1..=4u32);
    let m = rng.gen_range(1..=max_techs);
    let techs = (0..m)
        .map(|id| Technician::new(id, (0..domains).map(|_| rng.gen_range(0..=levels)).collect()))
        .collect();
    let jobs = (0..8)
        .map(|id| {
            let requirements = (0..domains)
                .map(|_| {
                    let mut row: Vec<u32> = (0..levels).map(|_| rng.gen_range(0..=3)).collect();
                    row.sort_unstable_by(|a, b| b.cmp(a));
                    row
                })
                .collect();
            Intervention { id, duration: 10, priority: 1, cost: 1, predecessors: BTreeSet::new(), requirements }
        })
        .collect();
    Instance::new(120, 0, domains, levels as usize, techs, jobs).unwrap()
}

/// Random DAG, costs (zero allowed), budget and weights for knapsack tests.
pub fn random_knapsack_instance(seed: u64, max_n: usize) -> (Instance, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let density = rng.gen_range(0.0..0.4);
    let jobs: Vec<Intervention> = (0..n)
        .map(|id| Intervention {
            id,
            duration: 10,
            priority: 1,
            cost: rng.gen_range(0..=10),
            predecessors: (0..id).filter(|_| rng.gen_bool(density)).collect(),
            requirements: vec![vec![1]],
        })
        .collect();
    let total: u64 = jobs.iter().map(|j| j.cost).sum();
    let budget = rng.gen_range(0..=total);
    let weights = (0..n).map(|_| if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..=50) }).collect();
    let instance = Instance::new(120, budget, 1, 1, vec![Technician::new(0, vec![1])], jobs).unwrap();
    (instance, weights)
}

/// Every intervention alone on its own day (topological order), at a random
/// start, worked by the whole workforce. Feasible when nobody has days off.
pub fn spread_schedule(instance: &Instance, seed: u64) -> tisched::Solution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let everyone: BTreeSet<usize> = (0..instance.technicians().len()).collect();
    let assignments = instance
        .topological_order()
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let slack = instance.hmax() - instance.intervention(j).duration;
            tisched::model::Assignment {
                intervention: j,
                day: k as u32 + 1,
                start: rng.gen_range(0..=slack),
                team: everyone.clone(),
            }
        })
        .collect();
    tisched::Solution::new(BTreeSet::new(), assignments)
}
