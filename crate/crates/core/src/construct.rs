//! Criteria-driven greedy insertion.
//!
//! A [`Schedule`] holds, per day, a list of teams. A team is a fixed set of
//! technicians for the whole day plus the timeline of interventions it
//! performs. Adding technicians to a team applies to every intervention the
//! team does that day; coverage is monotone in the member set, so earlier
//! interventions stay covered.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    absolute_start, team_covers, Assignment, Instance, Objective, Solution, T4Mode, Technician, Time,
    PRIORITIES,
};
use crate::multicover::{min_cover, Demand};
use crate::order::PriorityPermutation;

/// Random stream used by every randomized step.
pub type SearchRng = ChaCha8Rng;

/// Default width of the restricted candidate list.
pub const DEFAULT_ALPHA: f64 = 0.15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("UNPLACEABLE: intervention {0} cannot be covered on any day")]
    Unplaceable(usize),
    #[error("solution does not describe a consistent day/team structure: {0}")]
    Inconsistent(String),
}

/// Per-intervention selection score; higher goes first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Criteria {
    values: Vec<u64>,
}

impl Criteria {
    pub fn new(values: Vec<u64>) -> Self {
        Self { values }
    }

    pub fn get(&self, intervention: usize) -> u64 {
        self.values[intervention]
    }

    pub fn add(&mut self, intervention: usize, amount: u64) {
        self.values[intervention] += amount;
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Each intervention starts with the weight its priority receives under `p`.
pub fn initial_criteria(instance: &Instance, p: &PriorityPermutation) -> Criteria {
    Criteria::new(instance.interventions().iter().map(|j| p.weight_of(j.priority)).collect())
}

/// How competing placements on the same day are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementRule {
    /// Fewest added technicians, then earliest start, then lowest team index.
    FewestAdded,
    /// Earliest start, then fewest added technicians, then lowest team index.
    EarliestStart,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlacementBounds {
    pub max_day: Option<u32>,
    /// Absolute time the intervention must have finished by.
    pub latest_end: Option<Time>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub day: u32,
    /// Existing team index, `None` for a new team.
    pub team: Option<usize>,
    pub added: Vec<usize>,
    pub start: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Job {
    start: Time,
    end: Time,
    intervention: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Team {
    members: BTreeSet<usize>,
    /// Sorted by start, pairwise disjoint.
    jobs: Vec<Job>,
}

impl Team {
    fn is_active(&self) -> bool {
        !self.jobs.is_empty()
    }

    /// Earliest start `>= from` where `duration` fits before `hmax`.
    fn earliest_fit(&self, from: Time, duration: Time, hmax: Time) -> Option<Time> {
        let mut t = from;
        for job in &self.jobs {
            if t + duration <= job.start {
                break;
            }
            t = t.max(job.end);
        }
        (t + duration <= hmax).then_some(t)
    }

    fn insert(&mut self, job: Job) {
        let at = self.jobs.partition_point(|j| j.start < job.start);
        self.jobs.insert(at, job);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct DayPlan {
    teams: Vec<Team>,
    team_of: Vec<Option<usize>>,
}

impl DayPlan {
    fn new(technicians: usize) -> Self {
        Self { teams: Vec::new(), team_of: vec![None; technicians] }
    }

    fn open_team(&mut self) -> usize {
        match self.teams.iter().position(|t| !t.is_active() && t.members.is_empty()) {
            Some(k) => k,
            None => {
                self.teams.push(Team::default());
                self.teams.len() - 1
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    day: u32,
    team: usize,
    start: Time,
}

/// A partial or complete schedule of one instance.
#[derive(Debug, Clone)]
pub struct Schedule<'a> {
    instance: &'a Instance,
    days: Vec<DayPlan>,
    slots: Vec<Option<Slot>>,
    hired: BTreeSet<usize>,
}

impl<'a> Schedule<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Self {
            instance,
            days: Vec::new(),
            slots: vec![None; instance.interventions().len()],
            hired: BTreeSet::new(),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    /// Rebuilds the day/team structure of a feasible solution.
    pub fn from_solution(instance: &'a Instance, solution: &Solution) -> Result<Self, ConstructError> {
        let mut schedule = Self::new(instance);
        schedule.hired = solution.hired.clone();
        let n = instance.interventions().len();
        let mut order: Vec<&Assignment> = solution.assignments.iter().collect();
        order.sort_by_key(|a| (a.day, a.start, a.intervention));
        for a in order {
            let id = a.intervention;
            if id >= n || a.day == 0 || schedule.slots[id].is_some() {
                return Err(ConstructError::Inconsistent(format!("bad assignment of intervention {id}")));
            }
            if a.team.iter().any(|&t| t >= instance.technicians().len()) {
                return Err(ConstructError::Inconsistent(format!("unknown technician for {id}")));
            }
            schedule.materialize(a.day);
            let day = &mut schedule.days[a.day as usize - 1];
            let existing = day
                .teams
                .iter()
                .position(|t| t.is_active() && !a.team.is_empty() && t.members == a.team);
            let k = match existing {
                Some(k) => k,
                None => {
                    if let Some(&t) = a.team.iter().find(|&&t| day.team_of[t].is_some()) {
                        return Err(ConstructError::Inconsistent(format!(
                            "technician {t} in two teams on day {}",
                            a.day
                        )));
                    }
                    day.teams.push(Team { members: a.team.clone(), jobs: Vec::new() });
                    let k = day.teams.len() - 1;
                    for &t in &a.team {
                        day.team_of[t] = Some(k);
                    }
                    k
                }
            };
            let end = a.start + instance.intervention(id).duration;
            day.teams[k].insert(Job { start: a.start, end, intervention: id });
            schedule.slots[id] = Some(Slot { day: a.day, team: k, start: a.start });
        }
        Ok(schedule)
    }

    pub fn to_solution(&self) -> Solution {
        let assignments = self
            .slots
            .iter()
            .enumerate()
            .filter_map(|(id, slot)| {
                slot.map(|s| Assignment {
                    intervention: id,
                    day: s.day,
                    start: s.start,
                    team: self.days[s.day as usize - 1].teams[s.team].members.clone(),
                })
            })
            .collect();
        Solution::new(self.hired.clone(), assignments)
    }

    fn materialize(&mut self, day: u32) {
        let techs = self.instance.technicians().len();
        while self.days.len() < day as usize {
            self.days.push(DayPlan::new(techs));
        }
    }

    pub fn is_placed(&self, id: usize) -> bool {
        self.slots[id].is_some()
    }

    pub fn placed(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().enumerate().filter(|(_, s)| s.is_some()).map(|(i, _)| i)
    }

    pub fn day_of(&self, id: usize) -> Option<u32> {
        self.slots[id].map(|s| s.day)
    }

    pub fn abs_start(&self, id: usize) -> Option<Time> {
        self.slots[id].map(|s| absolute_start(s.day, s.start, self.instance.hmax()))
    }

    pub fn abs_end(&self, id: usize) -> Option<Time> {
        self.abs_start(id).map(|s| s + self.instance.intervention(id).duration)
    }

    /// Latest predecessor end, `None` while a predecessor is unplaced.
    pub fn ready_time(&self, id: usize) -> Option<Time> {
        self.instance
            .intervention(id)
            .predecessors
            .iter()
            .try_fold(0, |acc, &p| self.abs_end(p).map(|e| acc.max(e)))
    }

    /// Earliest start among placed successors.
    pub fn successor_deadline(&self, id: usize) -> Option<Time> {
        self.instance.successors(id).iter().filter_map(|&s| self.abs_start(s)).min()
    }

    /// Interventions placed on `day`.
    pub fn on_day(&self, day: u32) -> Vec<usize> {
        self.placed().filter(|&i| self.day_of(i) == Some(day)).collect()
    }

    /// Technician-days used by all active teams.
    pub fn member_days(&self) -> usize {
        self.days
            .iter()
            .flat_map(|d| d.teams.iter())
            .filter(|t| t.is_active())
            .map(|t| t.members.len())
            .sum()
    }

    /// Latest-ending placed intervention of priority class `class` (0-based), lowest id on ties.
    pub fn last_of_class(&self, class: usize) -> Option<usize> {
        self.placed()
            .filter(|&i| self.instance.intervention(i).class() == class)
            .max_by_key(|&i| (self.abs_end(i).unwrap(), std::cmp::Reverse(i)))
    }

    pub fn objective(&self, mode: T4Mode) -> Objective {
        let mut class_ends = [0; PRIORITIES];
        let mut makespan = 0;
        for id in self.placed() {
            let end = self.abs_end(id).unwrap();
            let c = self.instance.intervention(id).class();
            class_ends[c] = class_ends[c].max(end);
            makespan = makespan.max(end);
        }
        Objective::from_class_ends(class_ends, makespan, mode)
    }

    fn free_technicians(&self, day: u32) -> Vec<&'a Technician> {
        let plan = self.days.get(day as usize - 1);
        self.instance
            .technicians()
            .iter()
            .filter(|t| t.is_available(day) && plan.is_none_or(|p| p.team_of[t.id].is_none()))
            .collect()
    }

    /// Earliest day, then per `rule` the best team and start for `id`.
    ///
    /// Predecessors must already be placed. Returns `None` when no day can
    /// host the intervention within `bounds`.
    pub fn find_placement(&self, id: usize, rule: PlacementRule, bounds: PlacementBounds) -> Option<Placement> {
        let hmax = self.instance.hmax();
        let duration = self.instance.intervention(id).duration;
        let ready = self.ready_time(id)?;
        let first_day = u32::try_from(ready / hmax).ok()? + 1;
        // Past every materialized day and every calendar entry all days look alike.
        let last_distinct = (self.days.len() as u32).max(self.instance.last_unavailable_day()) + 1;
        let stop = last_distinct.max(first_day);
        for day in first_day..=stop {
            if bounds.max_day.is_some_and(|max| day > max) {
                return None;
            }
            let min_start = if day == first_day { ready - Time::from(day - 1) * hmax } else { 0 };
            if bounds
                .latest_end
                .is_some_and(|le| absolute_start(day, min_start, hmax) + duration > le)
            {
                return None;
            }
            if min_start + duration > hmax {
                continue;
            }
            if let Some(p) = self.best_on_day(id, day, min_start, rule, bounds.latest_end) {
                return Some(p);
            }
        }
        None
    }

    fn best_on_day(
        &self,
        id: usize,
        day: u32,
        min_start: Time,
        rule: PlacementRule,
        latest_end: Option<Time>,
    ) -> Option<Placement> {
        let job = self.instance.intervention(id);
        let hmax = self.instance.hmax();
        let free = self.free_technicians(day);
        let fits_deadline =
            |start: Time| latest_end.is_none_or(|le| absolute_start(day, start, hmax) + job.duration <= le);
        let key = |added: usize, start: Time, team: usize| match rule {
            PlacementRule::FewestAdded => (added as u64, start, team),
            PlacementRule::EarliestStart => (start, added as u64, team),
        };
        let mut best: Option<((u64, u64, usize), Placement)> = None;
        let mut offer = |k: (u64, u64, usize), p: Placement| {
            if best.as_ref().is_none_or(|(bk, _)| k < *bk) {
                best = Some((k, p));
            }
        };

        if let Some(plan) = self.days.get(day as usize - 1) {
            for (k, team) in plan.teams.iter().enumerate().filter(|(_, t)| t.is_active()) {
                let Some(start) = team.earliest_fit(min_start, job.duration, hmax) else {
                    continue;
                };
                if !fits_deadline(start) {
                    continue;
                }
                let residual = Demand::residual(job, team.members.iter().map(|&t| self.instance.technician(t)));
                let Some(added) = min_cover(&residual, &free) else {
                    continue;
                };
                offer(key(added.len(), start, k), Placement { day, team: Some(k), added, start });
            }
        }
        if fits_deadline(min_start) {
            if let Some(added) = min_cover(&Demand::of(job), &free) {
                offer(key(added.len(), min_start, usize::MAX), Placement { day, team: None, added, start: min_start });
            }
        }
        best.map(|(_, p)| p)
    }

    pub fn apply(&mut self, id: usize, placement: &Placement) {
        debug_assert!(self.slots[id].is_none(), "intervention {id} placed twice");
        self.materialize(placement.day);
        let duration = self.instance.intervention(id).duration;
        let plan = &mut self.days[placement.day as usize - 1];
        let k = placement.team.unwrap_or_else(|| plan.open_team());
        for &t in &placement.added {
            debug_assert!(plan.team_of[t].is_none(), "technician {t} already busy");
            plan.team_of[t] = Some(k);
            plan.teams[k].members.insert(t);
        }
        let job = Job { start: placement.start, end: placement.start + duration, intervention: id };
        debug_assert!(plan.teams[k].jobs.iter().all(|j| j.end <= job.start || job.end <= j.start));
        plan.teams[k].insert(job);
        self.slots[id] = Some(Slot { day: placement.day, team: k, start: placement.start });
    }

    /// Unschedules `id`. The team drops members it no longer needs
    /// (highest id first) and dissolves when left without work.
    pub fn remove(&mut self, id: usize) {
        let Some(slot) = self.slots[id].take() else { return };
        let instance = self.instance;
        let plan = &mut self.days[slot.day as usize - 1];
        let team = &mut plan.teams[slot.team];
        team.jobs.retain(|j| j.intervention != id);
        if team.jobs.is_empty() {
            for &m in &team.members {
                plan.team_of[m] = None;
            }
            team.members.clear();
            return;
        }
        let members: Vec<usize> = team.members.iter().rev().copied().collect();
        for m in members {
            let without: Vec<&Technician> =
                team.members.iter().filter(|&&t| t != m).map(|&t| instance.technician(t)).collect();
            if team.jobs.iter().all(|j| team_covers(without.iter().copied(), instance.intervention(j.intervention))) {
                team.members.remove(&m);
                plan.team_of[m] = None;
            }
        }
    }
}

/// How the next intervention is picked among the ready ones.
pub enum Selection<'r> {
    /// Highest criteria, then larger tie weight, then lower id.
    Deterministic,
    /// Uniform over candidates within `alpha` of the best criteria.
    Randomized { rng: &'r mut SearchRng, alpha: f64 },
}

/// Builds a complete schedule by inserting ready interventions in criteria order.
pub fn greedy_schedule<'a>(
    instance: &'a Instance,
    criteria: &Criteria,
    tie_weights: &[u64],
    mut selection: Selection<'_>,
) -> Result<Schedule<'a>, ConstructError> {
    let n = instance.interventions().len();
    let mut waiting: Vec<usize> = instance.interventions().iter().map(|j| j.predecessors.len()).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| waiting[i] == 0).collect();
    let mut schedule = Schedule::new(instance);
    let best_of = |ready: &BTreeSet<usize>| {
        *ready
            .iter()
            .max_by_key(|&&i| (criteria.get(i), tie_weights[i], std::cmp::Reverse(i)))
            .expect("ready set is non-empty")
    };
    while !ready.is_empty() {
        let pick = match &mut selection {
            Selection::Randomized { rng, alpha } if *alpha > 0.0 => {
                let hi = ready.iter().map(|&i| criteria.get(i)).max().unwrap() as f64;
                let lo = ready.iter().map(|&i| criteria.get(i)).min().unwrap() as f64;
                let threshold = hi - *alpha * (hi - lo);
                let rcl: Vec<usize> =
                    ready.iter().copied().filter(|&i| criteria.get(i) as f64 >= threshold - 1e-9).collect();
                rcl[rng.gen_range(0..rcl.len())]
            }
            _ => best_of(&ready),
        };
        ready.remove(&pick);
        let placement = schedule
            .find_placement(pick, PlacementRule::FewestAdded, PlacementBounds::default())
            .ok_or(ConstructError::Unplaceable(pick))?;
        schedule.apply(pick, &placement);
        for &s in instance.successors(pick) {
            waiting[s] -= 1;
            if waiting[s] == 0 {
                ready.insert(s);
            }
        }
    }
    Ok(schedule)
}

pub fn run_greedy(
    instance: &Instance,
    criteria: &Criteria,
    tie_weights: &[u64],
    selection: Selection<'_>,
) -> Result<Solution, ConstructError> {
    greedy_schedule(instance, criteria, tie_weights, selection).map(|s| s.to_solution())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{job, tech};
    use crate::model::{check, evaluate};
    use rand::SeedableRng;

    #[test]
    fn origin_placement() {
        let inst = Instance::new(120, 0, 1, 1, vec![tech(0, &[1])], vec![job(0, 60, 1, &[], vec![vec![1]])]).unwrap();
        let s = Schedule::new(&inst);
        let p = s.find_placement(0, PlacementRule::FewestAdded, PlacementBounds::default()).unwrap();
        assert_eq!((p.day, p.start, p.team, p.added), (1, 0, None, vec![0]));
    }

    #[test]
    fn ready_time_crosses_days() {
        // predecessor ends at 165 on a 120-long day: day 2, start >= 45
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1]), tech(1, &[1])],
            vec![job(0, 45, 1, &[], vec![vec![1]]), job(1, 30, 1, &[0], vec![vec![1]])],
        )
        .unwrap();
        let mut s = Schedule::new(&inst);
        s.apply(0, &Placement { day: 2, team: None, added: vec![0], start: 0 });
        assert_eq!(s.abs_end(0), Some(165));
        let p = s.find_placement(1, PlacementRule::FewestAdded, PlacementBounds::default()).unwrap();
        assert_eq!(p.day, 2);
        assert!(p.start >= 45);
        s.apply(1, &p);
        assert!(check(&inst, &s.to_solution()).is_empty());
    }

    #[test]
    fn team_is_augmented_for_the_whole_day() {
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1]), tech(1, &[1])],
            vec![job(0, 60, 1, &[], vec![vec![1]]), job(1, 60, 1, &[], vec![vec![2]])],
        )
        .unwrap();
        let crit = Criteria::new(vec![2, 1]);
        let sol = run_greedy(&inst, &crit, &[0, 0], Selection::Deterministic).unwrap();
        let b = sol.assignment(1).unwrap();
        assert_eq!((b.day, b.start), (1, 60));
        assert_eq!(b.team, [0, 1].into());
        assert_eq!(sol.assignment(0).unwrap().team, [0, 1].into());
        assert!(check(&inst, &sol).is_empty());
        assert_eq!(evaluate(&inst, &sol, T4Mode::Priority).t[0], 120);
    }

    #[test]
    fn chain_spills_over_days() {
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1])],
            vec![
                job(0, 60, 1, &[], vec![vec![1]]),
                job(1, 60, 1, &[0], vec![vec![1]]),
                job(2, 60, 1, &[1], vec![vec![1]]),
            ],
        )
        .unwrap();
        let sol = run_greedy(&inst, &Criteria::new(vec![1; 3]), &[0; 3], Selection::Deterministic).unwrap();
        let ends: Vec<u64> = (0..3)
            .map(|i| {
                let a = sol.assignment(i).unwrap();
                absolute_start(a.day, a.start, 120) + 60
            })
            .collect();
        assert_eq!(ends, vec![60, 120, 180]);
        assert_eq!(sol.assignment(2).unwrap().day, 2);
    }

    #[test]
    fn empty_instance_gives_empty_solution() {
        let inst = Instance::new(120, 0, 1, 1, vec![tech(0, &[1])], vec![]).unwrap();
        let sol = run_greedy(&inst, &Criteria::new(vec![]), &[], Selection::Deterministic).unwrap();
        assert_eq!(sol, Solution::default());
    }

    #[test]
    fn uncoverable_is_unplaceable() {
        let inst = Instance::new(120, 0, 1, 1, vec![tech(0, &[1])], vec![job(0, 60, 1, &[], vec![vec![2]])]).unwrap();
        let err = run_greedy(&inst, &Criteria::new(vec![1]), &[0], Selection::Deterministic).unwrap_err();
        assert_eq!(err, ConstructError::Unplaceable(0));
    }

    #[test]
    fn calendars_push_work_to_available_days() {
        let mut t = tech(0, &[1]);
        t.unavailable_days.extend([1, 2]);
        let inst = Instance::new(120, 0, 1, 1, vec![t], vec![job(0, 60, 1, &[], vec![vec![1]])]).unwrap();
        let sol = run_greedy(&inst, &Criteria::new(vec![1]), &[0], Selection::Deterministic).unwrap();
        assert_eq!(sol.assignment(0).unwrap().day, 3);
        assert!(check(&inst, &sol).is_empty());
    }

    #[test]
    fn zero_alpha_matches_deterministic() {
        let jobs = (0..6).map(|i| job(i, 20 + 5 * i as u64, 1 + (i % 4) as u8, &[], vec![vec![1]])).collect();
        let inst = Instance::new(120, 0, 1, 1, vec![tech(0, &[1]), tech(1, &[1])], jobs).unwrap();
        let crit = Criteria::new(vec![5, 3, 5, 1, 2, 5]);
        let det = run_greedy(&inst, &crit, &[0; 6], Selection::Deterministic).unwrap();
        let mut rng = SearchRng::seed_from_u64(9);
        let rnd = run_greedy(&inst, &crit, &[0; 6], Selection::Randomized { rng: &mut rng, alpha: 0.0 }).unwrap();
        assert_eq!(det, rnd);
    }

    #[test]
    fn removal_shrinks_and_round_trips() {
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1]), tech(1, &[1])],
            vec![job(0, 60, 1, &[], vec![vec![1]]), job(1, 60, 1, &[], vec![vec![2]])],
        )
        .unwrap();
        let s = greedy_schedule(&inst, &Criteria::new(vec![2, 1]), &[0, 0], Selection::Deterministic).unwrap();
        assert_eq!(s.member_days(), 2);
        let mut t = s.clone();
        t.remove(1);
        assert_eq!(t.member_days(), 1);
        let rebuilt = Schedule::from_solution(&inst, &s.to_solution()).unwrap();
        assert_eq!(rebuilt.to_solution(), s.to_solution());
    }
}
