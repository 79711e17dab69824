mod common;

use std::collections::BTreeSet;

use common::{brute_knapsack, random_knapsack_instance};
use tisched::hire::{reduce_instance, select_hired, HireError};

#[test]
fn exact_plan_matches_enumeration() {
    for seed in 0..300 {
        let (inst, w) = random_knapsack_instance(seed, 15);
        let plan = select_hired(&inst, &w, &BTreeSet::new()).unwrap();
        assert!(plan.exact);
        assert!(inst.is_successor_closed(&plan.hired), "seed {seed}");
        assert!(plan.total_cost <= inst.budget());
        assert_eq!(plan.total_weight, plan.hired.iter().map(|&i| w[i]).sum::<u64>());
        assert_eq!(Some(plan.total_weight), brute_knapsack(&inst, &w, &BTreeSet::new()), "seed {seed}");
    }
}

#[test]
fn forced_items_are_respected() {
    for seed in 0..200 {
        let (inst, w) = random_knapsack_instance(seed + 10_000, 12);
        let forced: BTreeSet<usize> = [seed as usize % inst.interventions().len()].into();
        let closure = inst.successor_closure(forced.iter().copied());
        match select_hired(&inst, &w, &forced) {
            Ok(plan) => {
                assert!(closure.is_subset(&plan.hired));
                assert_eq!(Some(plan.total_weight), brute_knapsack(&inst, &w, &forced), "seed {seed}");
            }
            Err(HireError::InfeasibleMustHire { cost, .. }) => {
                assert!(cost > inst.budget());
                assert_eq!(brute_knapsack(&inst, &w, &forced), None);
            }
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn reduction_keeps_precedence_among_survivors() {
    for seed in 0..50 {
        let (inst, w) = random_knapsack_instance(seed, 15);
        let plan = select_hired(&inst, &w, &BTreeSet::new()).unwrap();
        let reduced = reduce_instance(&inst, &plan.hired).unwrap();
        assert_eq!(reduced.instance.interventions().len(), inst.interventions().len() - plan.hired.len());
        assert_eq!(reduced.instance.budget(), inst.budget() - plan.total_cost);
        for j in reduced.instance.interventions() {
            let original = inst.intervention(reduced.original[j.id]);
            let preds: BTreeSet<usize> = j.predecessors.iter().map(|&p| reduced.original[p]).collect();
            assert_eq!(preds, original.predecessors);
        }
    }
}
