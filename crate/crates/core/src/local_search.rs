//! Two-phase improvement of a feasible schedule.
//!
//! The critical-path phase tries to pull the last intervention of each
//! priority class earlier, together with the chain of predecessors that
//! holds it back; a move is kept only if the objective strictly drops. The
//! packing phase re-places interventions one at a time, keeping a move only
//! if no class ending time grows and the intervention itself ends earlier or
//! the schedule uses fewer technician-days.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::construct::{PlacementBounds, PlacementRule, Schedule};
use crate::model::{Instance, Solution, T4Mode, PRIORITIES};

fn expired(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

/// Removes `group` and `extra`, then reinserts `group` (topological order)
/// with `rule` followed by `extra` with `extra_rule`.
fn reinsert<'a>(
    s: &Schedule<'a>,
    group: &[usize],
    extra: Option<(usize, PlacementRule)>,
    rule: PlacementRule,
    max_day: Option<u32>,
) -> Option<Schedule<'a>> {
    let mut t = s.clone();
    for &g in group.iter().chain(extra.iter().map(|(o, _)| o)) {
        t.remove(g);
    }
    for &g in group {
        let bounds = PlacementBounds { max_day, latest_end: t.successor_deadline(g) };
        let p = t.find_placement(g, rule, bounds)?;
        t.apply(g, &p);
    }
    if let Some((o, extra_rule)) = extra {
        let bounds = PlacementBounds { max_day: None, latest_end: t.successor_deadline(o) };
        let p = t.find_placement(o, extra_rule, bounds)?;
        t.apply(o, &p);
    }
    Some(t)
}

/// First strictly improving critical-path move, if any.
fn critical_move<'a>(s: &Schedule<'a>, mode: T4Mode) -> Option<Schedule<'a>> {
    let instance = s.instance();
    let z0 = s.objective(mode).z;
    let topo_rank = {
        let mut rank = vec![0; instance.interventions().len()];
        for (k, &i) in instance.topological_order().iter().enumerate() {
            rank[i] = k;
        }
        rank
    };
    let improves = |t: &Schedule<'_>| t.objective(mode).z < z0;

    for class in 0..PRIORITIES {
        let Some(last) = s.last_of_class(class) else { continue };
        let mut critical: Vec<usize> = instance.ancestors(last).into_iter().collect();
        critical.push(last);
        critical.sort_by_key(|&i| topo_rank[i]);
        let critical_set: BTreeSet<usize> = critical.iter().copied().collect();

        // The last intervention alone, restricted to its day or earlier.
        for rule in [PlacementRule::EarliestStart, PlacementRule::FewestAdded] {
            if let Some(t) = reinsert(s, &[last], None, rule, s.day_of(last)) {
                if improves(&t) {
                    return Some(t);
                }
            }
        }

        // Each member together with its critical descendants, latest member first.
        for (k, &m) in critical.iter().enumerate().rev() {
            let descendants = instance.successor_closure([m]);
            let group: Vec<usize> =
                critical[k..].iter().copied().filter(|i| descendants.contains(i)).collect();
            if group.len() > 1 {
                if let Some(t) = reinsert(s, &group, None, PlacementRule::EarliestStart, None) {
                    if improves(&t) {
                        return Some(t);
                    }
                }
            }
            // Swap with a non-critical intervention sharing the day.
            let day = s.day_of(m).expect("critical members are placed");
            for o in s.on_day(day) {
                if critical_set.contains(&o) {
                    continue;
                }
                for extra_rule in [PlacementRule::FewestAdded, PlacementRule::EarliestStart] {
                    if let Some(t) = reinsert(s, &group, Some((o, extra_rule)), PlacementRule::EarliestStart, None) {
                        if improves(&t) {
                            return Some(t);
                        }
                    }
                }
            }
        }
    }
    None
}

fn critical_in_place(s: &mut Schedule<'_>, mode: T4Mode, deadline: Option<Instant>) -> bool {
    let mut improved = false;
    while let Some(next) = critical_move(s, mode) {
        *s = next;
        improved = true;
        if expired(deadline) {
            break;
        }
    }
    improved
}

fn pack_in_place(s: &mut Schedule<'_>, mode: T4Mode, deadline: Option<Instant>) -> bool {
    let mut changed_any = false;
    loop {
        let mut changed = false;
        let mut order: Vec<usize> = s.placed().collect();
        order.sort_by_key(|&i| (s.abs_start(i), i));
        for m in order {
            let before = s.objective(mode);
            let end = s.abs_end(m);
            let member_days = s.member_days();
            let day = s.day_of(m);
            let mut t = s.clone();
            t.remove(m);
            let bounds = PlacementBounds { max_day: day, latest_end: t.successor_deadline(m) };
            let Some(p) = t.find_placement(m, PlacementRule::FewestAdded, bounds) else { continue };
            t.apply(m, &p);
            let after = t.objective(mode);
            let new_end = t.abs_end(m);
            if after.dominated_by(&before)
                && (new_end < end || (new_end <= end && t.member_days() < member_days))
            {
                *s = t;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        changed_any = true;
        if expired(deadline) {
            break;
        }
    }
    changed_any
}

/// Alternates both phases until neither changes the schedule or `deadline` passes.
pub fn improve(s: &mut Schedule<'_>, mode: T4Mode, deadline: Option<Instant>) {
    loop {
        let cp = critical_in_place(s, mode, deadline);
        let pk = pack_in_place(s, mode, deadline);
        if !(cp || pk) || expired(deadline) {
            break;
        }
    }
}

fn on_schedule<F>(instance: &Instance, solution: &Solution, f: F) -> Solution
where
    F: FnOnce(&mut Schedule<'_>),
{
    match Schedule::from_solution(instance, solution) {
        Ok(mut s) => {
            f(&mut s);
            s.to_solution()
        }
        Err(e) => {
            log::warn!("local search skipped: {e}");
            solution.clone()
        }
    }
}

pub fn critical_path_phase(instance: &Instance, solution: &Solution, mode: T4Mode) -> Solution {
    on_schedule(instance, solution, |s| {
        critical_in_place(s, mode, None);
    })
}

pub fn packing_phase(instance: &Instance, solution: &Solution, mode: T4Mode) -> Solution {
    on_schedule(instance, solution, |s| {
        pack_in_place(s, mode, None);
    })
}

pub fn local_search(instance: &Instance, solution: &Solution, mode: T4Mode, deadline: Option<Instant>) -> Solution {
    on_schedule(instance, solution, |s| improve(s, mode, deadline))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{job, tech};
    use crate::model::{check, evaluate, Assignment};

    fn at(intervention: usize, day: u32, start: u64, team: &[usize]) -> Assignment {
        Assignment { intervention, day, start, team: team.iter().copied().collect() }
    }

    #[test]
    fn single_intervention_at_origin_is_a_fixpoint() {
        let inst = Instance::new(120, 0, 1, 1, vec![tech(0, &[1])], vec![job(0, 60, 1, &[], vec![vec![1]])]).unwrap();
        let sol = Solution::new(BTreeSet::new(), vec![at(0, 1, 0, &[0])]);
        assert_eq!(critical_path_phase(&inst, &sol, T4Mode::Priority), sol);
        assert_eq!(packing_phase(&inst, &sol, T4Mode::Priority), sol);
        assert_eq!(local_search(&inst, &sol, T4Mode::Priority, None), sol);
    }

    #[test]
    fn gap_before_last_priority_one_is_closed() {
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1])],
            vec![job(0, 30, 2, &[], vec![vec![1]]), job(1, 30, 1, &[], vec![vec![1]])],
        )
        .unwrap();
        let gapped = Solution::new(BTreeSet::new(), vec![at(0, 1, 0, &[0]), at(1, 1, 60, &[0])]);
        assert!(check(&inst, &gapped).is_empty());
        let z0 = evaluate(&inst, &gapped, T4Mode::Priority).z;
        let out = local_search(&inst, &gapped, T4Mode::Priority, None);
        assert!(check(&inst, &out).is_empty());
        assert!(evaluate(&inst, &out, T4Mode::Priority).z < z0);
    }

    #[test]
    fn swap_unblocks_critical_intervention() {
        // one technician; the priority-4 job sits in front of the priority-1 job
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1])],
            vec![job(0, 60, 4, &[], vec![vec![1]]), job(1, 60, 1, &[], vec![vec![1]])],
        )
        .unwrap();
        let sol = Solution::new(BTreeSet::new(), vec![at(0, 1, 0, &[0]), at(1, 1, 60, &[0])]);
        let z0 = evaluate(&inst, &sol, T4Mode::Priority).z;
        assert_eq!(z0, 28 * 120 + 60);
        let out = critical_path_phase(&inst, &sol, T4Mode::Priority);
        assert!(check(&inst, &out).is_empty());
        assert_eq!(evaluate(&inst, &out, T4Mode::Priority).z, 28 * 60 + 120);
    }

    #[test]
    fn idle_day_two_moves_to_day_one() {
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1]), tech(1, &[1])],
            vec![job(0, 60, 1, &[], vec![vec![1]]), job(1, 60, 3, &[], vec![vec![1]])],
        )
        .unwrap();
        let sol = Solution::new(BTreeSet::new(), vec![at(0, 1, 0, &[0]), at(1, 2, 0, &[1])]);
        let before = evaluate(&inst, &sol, T4Mode::Priority);
        let out = packing_phase(&inst, &sol, T4Mode::Priority);
        assert!(check(&inst, &out).is_empty());
        assert_eq!(out.assignment(1).unwrap().day, 1);
        let after = evaluate(&inst, &out, T4Mode::Priority);
        assert!(after.dominated_by(&before));
        assert!(after.z < before.z);
    }

    #[test]
    fn back_to_back_packing_is_a_fixpoint() {
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1])],
            vec![job(0, 60, 1, &[], vec![vec![1]]), job(1, 60, 1, &[0], vec![vec![1]])],
        )
        .unwrap();
        let sol = Solution::new(BTreeSet::new(), vec![at(0, 1, 0, &[0]), at(1, 1, 60, &[0])]);
        assert_eq!(packing_phase(&inst, &sol, T4Mode::Priority), sol);
    }
}
