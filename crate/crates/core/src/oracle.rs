//! Exhaustive optimum for tiny instances.
//!
//! Every successor-closed, affordable hire set is tried. For each, schedules
//! are enumerated in non-decreasing `(day, start, id)` order. Each
//! intervention joins an existing team of its day or founds a new team from
//! the technicians still free that day. Its start is the left-shifted one:
//! the end of the team's previous intervention or of a same-day predecessor,
//! or 0. Any feasible schedule can be left-shifted this way without any
//! ending time growing, so the enumeration loses no optimum.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{absolute_start, check, evaluate, Assignment, Instance, Objective, Solution, T4Mode, Time, PRIORITIES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_interventions: usize,
    pub max_technicians: usize,
    pub max_days: u32,
    pub node_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_interventions: 6, max_technicians: 4, max_days: 4, node_budget: 50_000_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("LIMIT_EXCEEDED: {0}")]
    LimitExceeded(String),
    #[error("no feasible solution within {max_days} days")]
    Infeasible { max_days: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub objective: Objective,
    pub solution: Solution,
    pub nodes: u64,
}

#[derive(Clone, Copy)]
struct TeamState {
    members: u32,
    last_end: Time,
}

struct Search<'a> {
    instance: &'a Instance,
    mode: T4Mode,
    max_days: u32,
    calendars: bool,
    node_budget: u64,
    nodes: u64,
    /// Per technician: bitmask of available days (bit d-1 for day d).
    available: Vec<u32>,
    /// Interventions to schedule.
    todo: Vec<usize>,
    placed: Vec<Option<Assignment>>,
    remaining: usize,
    teams: Vec<Vec<TeamState>>,
    busy: Vec<u32>,
    best_z: u64,
    best: Option<Vec<Assignment>>,
}

impl<'a> Search<'a> {
    fn abs_end(&self, id: usize) -> Option<Time> {
        let a = self.placed[id].as_ref()?;
        Some(absolute_start(a.day, a.start, self.instance.hmax()) + self.instance.intervention(id).duration)
    }

    fn partial_bound(&self, day: u32, start: Time) -> u64 {
        let hmax = self.instance.hmax();
        let mut t = [0; PRIORITIES];
        let mut makespan = 0;
        for &j in &self.todo {
            let job = self.instance.intervention(j);
            let end = match self.abs_end(j) {
                Some(e) => e,
                None => {
                    let from = if start + job.duration <= hmax {
                        absolute_start(day, start, hmax)
                    } else {
                        absolute_start(day + 1, 0, hmax)
                    };
                    let after_preds =
                        job.predecessors.iter().filter_map(|&p| self.abs_end(p)).max().unwrap_or(0);
                    from.max(after_preds) + job.duration
                }
            };
            t[job.class()] = t[job.class()].max(end);
            makespan = makespan.max(end);
        }
        Objective::from_class_ends(t, makespan, self.mode).z
    }

    fn dfs(&mut self, cursor: (u32, Time, usize)) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Err(OracleError::LimitExceeded(format!("node budget {} exhausted", self.node_budget)));
        }
        if self.remaining == 0 {
            let assignments: Vec<Assignment> = self.placed.iter().flatten().cloned().collect();
            let z = evaluate(self.instance, &Solution::new(BTreeSet::new(), assignments.clone()), self.mode).z;
            if z < self.best_z {
                self.best_z = z;
                self.best = Some(assignments);
            }
            return Ok(());
        }
        let (cur_day, cur_start, _) = cursor;
        if self.partial_bound(cur_day, cur_start) >= self.best_z {
            return Ok(());
        }
        let hmax = self.instance.hmax();
        let started = self.remaining < self.todo.len();
        let last_day = if self.calendars {
            self.max_days
        } else if started {
            (cur_day + 1).min(self.max_days)
        } else {
            1
        };

        for k in 0..self.todo.len() {
            let j = self.todo[k];
            if self.placed[j].is_some() {
                continue;
            }
            let job = self.instance.intervention(j);
            if job.predecessors.iter().any(|&p| self.placed[p].is_none()) {
                continue;
            }
            for day in cur_day..=last_day {
                let day_ix = (day - 1) as usize;
                let day_open = absolute_start(day, 0, hmax);
                if job.predecessors.iter().any(|&p| self.abs_end(p).unwrap() > day_open + hmax - job.duration) {
                    continue;
                }
                let pred_floor = job
                    .predecessors
                    .iter()
                    .map(|&p| self.abs_end(p).unwrap().saturating_sub(day_open))
                    .max()
                    .unwrap_or(0);

                // existing teams
                for ti in 0..self.teams[day_ix].len() {
                    let team = self.teams[day_ix][ti];
                    let start = team.last_end.max(pred_floor);
                    if !self.admissible(cursor, (day, start, j), job.duration)
                        || !covers_mask(self.instance, team.members, j)
                    {
                        continue;
                    }
                    self.teams[day_ix][ti].last_end = start + job.duration;
                    self.place(j, day, start, team.members);
                    let r = self.dfs((day, start, j));
                    self.unplace(j);
                    self.teams[day_ix][ti] = team;
                    r?;
                }

                // new teams from the technicians free on this day
                let start = pred_floor;
                if !self.admissible(cursor, (day, start, j), job.duration) {
                    continue;
                }
                let free: u32 = (0..self.instance.technicians().len())
                    .filter(|&t| self.busy[day_ix] & (1 << t) == 0 && self.available[t] & (1 << day_ix) != 0)
                    .fold(0, |m, t| m | (1 << t));
                let mut sub = free;
                loop {
                    if covers_mask(self.instance, sub, j) {
                        if sub != 0 {
                            self.teams[day_ix].push(TeamState { members: sub, last_end: start + job.duration });
                            self.busy[day_ix] |= sub;
                        }
                        self.place(j, day, start, sub);
                        let r = self.dfs((day, start, j));
                        self.unplace(j);
                        if sub != 0 {
                            self.teams[day_ix].pop();
                            self.busy[day_ix] &= !sub;
                        }
                        r?;
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & free;
                }
            }
        }
        Ok(())
    }

    fn admissible(&self, cursor: (u32, Time, usize), next: (u32, Time, usize), duration: Time) -> bool {
        let started = self.remaining < self.todo.len();
        (!started || next > cursor) && next.1 + duration <= self.instance.hmax()
    }

    fn place(&mut self, j: usize, day: u32, start: Time, members: u32) {
        let team = (0..32).filter(|t| members & (1 << t) != 0).collect();
        self.placed[j] = Some(Assignment { intervention: j, day, start, team });
        self.remaining -= 1;
    }

    fn unplace(&mut self, j: usize) {
        self.placed[j] = None;
        self.remaining += 1;
    }
}

fn covers_mask(instance: &Instance, members: u32, j: usize) -> bool {
    let techs = instance.technicians().iter().filter(|t| members & (1 << t.id) != 0);
    crate::model::team_covers(techs, instance.intervention(j))
}

/// Minimum objective over all hire sets and left-shifted schedules within
/// `limits.max_days` days.
pub fn brute_force_optimal(instance: &Instance, limits: &OracleLimits, mode: T4Mode) -> Result<OracleResult, OracleError> {
    let n = instance.interventions().len();
    let m = instance.technicians().len();
    if n > limits.max_interventions || m > limits.max_technicians {
        return Err(OracleError::LimitExceeded(format!(
            "{n} interventions and {m} technicians exceed limits {} and {}",
            limits.max_interventions, limits.max_technicians
        )));
    }
    if limits.max_days == 0 || limits.max_days > 32 || n > 20 || m > 31 {
        return Err(OracleError::LimitExceeded("day or size limit outside the supported range".into()));
    }

    let mut hire_sets: Vec<BTreeSet<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect::<BTreeSet<usize>>())
        .filter(|set| instance.is_successor_closed(set) && instance.cost_of(set) <= instance.budget())
        .collect();
    // Large hire sets first: they tend to give small objectives early.
    hire_sets.sort_by_key(|s| std::cmp::Reverse(s.iter().map(|&i| instance.intervention(i).duration).sum::<Time>()));

    let available = instance
        .technicians()
        .iter()
        .map(|t| (1..=limits.max_days).filter(|&d| t.is_available(d)).fold(0u32, |acc, d| acc | (1 << (d - 1))))
        .collect();
    let mut search = Search {
        instance,
        mode,
        max_days: limits.max_days,
        calendars: instance.technicians().iter().any(|t| !t.unavailable_days.is_empty()),
        node_budget: limits.node_budget,
        nodes: 0,
        available,
        todo: Vec::new(),
        placed: vec![None; n],
        remaining: 0,
        teams: vec![Vec::new(); limits.max_days as usize],
        busy: vec![0; limits.max_days as usize],
        best_z: u64::MAX,
        best: None,
    };
    let mut best_hired = None;
    for hired in hire_sets {
        let todo: Vec<usize> = (0..n).filter(|i| !hired.contains(i)).collect();
        if todo.iter().any(|&j| !crate::model::team_covers(instance.technicians(), instance.intervention(j))) {
            continue;
        }
        search.remaining = todo.len();
        search.todo = todo;
        let before = search.best_z;
        search.dfs((1, 0, 0))?;
        if search.best_z < before {
            best_hired = Some(hired);
        }
    }
    let (Some(hired), Some(assignments)) = (best_hired, search.best) else {
        return Err(OracleError::Infeasible { max_days: limits.max_days });
    };
    let solution = Solution::new(hired, assignments);
    debug_assert!(check(instance, &solution).is_empty());
    let objective = evaluate(instance, &solution, mode);
    Ok(OracleResult { objective, solution, nodes: search.nodes })
}

/// Keeps every intervention's day, team and team order and moves it to its
/// earliest feasible start.
pub fn left_shift(instance: &Instance, solution: &Solution) -> Solution {
    let hmax = instance.hmax();
    let mut order: Vec<&Assignment> = solution.assignments.iter().collect();
    order.sort_by_key(|a| (absolute_start(a.day, a.start, hmax), a.intervention));
    let mut shifted: Vec<Assignment> = Vec::with_capacity(order.len());
    let mut end_of = vec![None; instance.interventions().len()];
    for a in order {
        let job = instance.intervention(a.intervention);
        let same_day_end = |b: &Assignment| (b.day == a.day).then(|| b.start + instance.intervention(b.intervention).duration);
        let team_floor = shifted
            .iter()
            .filter(|b| !b.team.is_disjoint(&a.team))
            .filter_map(same_day_end)
            .max()
            .unwrap_or(0);
        let pred_floor = job
            .predecessors
            .iter()
            .filter_map(|&p| end_of[p])
            .filter(|&(day, _)| day == a.day)
            .map(|(_, end)| end)
            .max()
            .unwrap_or(0);
        let start = team_floor.max(pred_floor);
        end_of[a.intervention] = Some((a.day, start + job.duration));
        shifted.push(Assignment { start, ..a.clone() });
    }
    Solution::new(solution.hired.clone(), shifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{job, tech};

    fn solve(inst: &Instance) -> OracleResult {
        brute_force_optimal(inst, &OracleLimits::default(), T4Mode::Priority).unwrap()
    }

    #[test]
    fn single_intervention() {
        let inst = Instance::new(120, 0, 1, 1, vec![tech(0, &[1])], vec![job(0, 60, 1, &[], vec![vec![1]])]).unwrap();
        assert_eq!(solve(&inst).objective.z, 1680);
    }

    #[test]
    fn chain_back_to_back_on_day_one() {
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1])],
            vec![job(0, 60, 1, &[], vec![vec![1]]), job(1, 60, 1, &[0], vec![vec![1]])],
        )
        .unwrap();
        let r = solve(&inst);
        assert_eq!(r.objective.z, 3360);
        assert!(r.solution.assignments.iter().all(|a| a.day == 1));
    }

    #[test]
    fn hiring_everything_gives_zero() {
        let inst = Instance::new(
            120,
            2,
            1,
            1,
            vec![tech(0, &[1])],
            vec![job(0, 60, 1, &[], vec![vec![1]]), job(1, 60, 2, &[0], vec![vec![1]])],
        )
        .unwrap();
        let r = solve(&inst);
        assert_eq!(r.objective.z, 0);
        assert_eq!(r.solution.hired, [0, 1].into());
    }

    #[test]
    fn limits_are_enforced() {
        let techs = (0..5).map(|t| tech(t, &[1])).collect();
        let inst = Instance::new(120, 0, 1, 1, techs, vec![job(0, 60, 1, &[], vec![vec![1]])]).unwrap();
        assert!(matches!(
            brute_force_optimal(&inst, &OracleLimits::default(), T4Mode::Priority),
            Err(OracleError::LimitExceeded(_))
        ));
        let inst = Instance::new(120, 0, 1, 1, vec![tech(0, &[1])], vec![job(0, 60, 1, &[], vec![vec![1]])]).unwrap();
        let tight = OracleLimits { node_budget: 1, ..Default::default() };
        assert!(matches!(brute_force_optimal(&inst, &tight, T4Mode::Priority), Err(OracleError::LimitExceeded(_))));
    }

    #[test]
    fn parallel_teams_beat_one_big_team() {
        // two single-skill jobs, two technicians: splitting the team runs both at once
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1]), tech(1, &[1])],
            vec![job(0, 60, 1, &[], vec![vec![1]]), job(1, 60, 1, &[], vec![vec![1]])],
        )
        .unwrap();
        assert_eq!(solve(&inst).objective.z, 28 * 60);
    }

    #[test]
    fn calendar_pushes_work_to_later_day() {
        let mut t = tech(0, &[1]);
        t.unavailable_days = [1].into();
        let inst = Instance::new(120, 0, 1, 1, vec![t], vec![job(0, 60, 2, &[], vec![vec![1]])]).unwrap();
        let r = solve(&inst);
        assert_eq!(r.objective.t[1], 180);
        assert_eq!(r.solution.assignments[0].day, 2);
    }

    #[test]
    fn left_shift_closes_gaps() {
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1])],
            vec![job(0, 30, 1, &[], vec![vec![1]]), job(1, 30, 2, &[0], vec![vec![1]])],
        )
        .unwrap();
        let at = |i, d, s| Assignment { intervention: i, day: d, start: s, team: [0].into() };
        let sol = Solution::new(BTreeSet::new(), vec![at(0, 1, 20), at(1, 1, 70)]);
        let out = left_shift(&inst, &sol);
        assert_eq!(out.assignments.iter().map(|a| a.start).collect::<Vec<_>>(), [0, 30]);
        assert!(check(&inst, &out).is_empty());
    }
}
