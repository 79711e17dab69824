//! Problem model: technicians, interventions, schedules and their evaluation.
//!
//! Time is a single integer axis spanning consecutive working days. A
//! placement on `day` (1-based) at within-day `start` occupies the absolute
//! interval `[(day - 1) * hmax + start, (day - 1) * hmax + start + duration)`.

mod check;

pub use check::{check, Violation, ViolationCode, ViolationReport};

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Integral time unit used for durations, starts and ending times.
pub type Time = u64;

/// Objective coefficients of `t1..t4`.
pub const PRIORITY_WEIGHTS: [u64; 4] = [28, 14, 4, 1];

/// Number of priority classes.
pub const PRIORITIES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("day length must be positive")]
    ZeroDayLength,
    #[error("{kind} ids must be dense: position {position} holds id {id}")]
    NonDenseIds { kind: &'static str, position: usize, id: usize },
    #[error("technician {id}: expected {expected} skill levels, found {found}")]
    SkillArity { id: usize, expected: usize, found: usize },
    #[error("technician {id}: skill level {level} in domain {domain} exceeds {levels}")]
    SkillOutOfRange { id: usize, domain: usize, level: u32, levels: usize },
    #[error("technician {id}: day 0 is not a valid day")]
    UnavailableDayZero { id: usize },
    #[error("intervention {id}: priority {priority} is not in 1..=4")]
    PriorityOutOfRange { id: usize, priority: u8 },
    #[error("intervention {id}: duration must be positive")]
    ZeroDuration { id: usize },
    #[error("intervention {id}: duration {duration} exceeds day length {hmax}")]
    DurationExceedsDay { id: usize, duration: Time, hmax: Time },
    #[error("intervention {id}: requirement matrix must be {domains}x{levels}")]
    RequirementShape { id: usize, domains: usize, levels: usize },
    #[error("intervention {id}: requirements in domain {domain} grow with the level")]
    NonCumulativeRequirements { id: usize, domain: usize },
    #[error("intervention {id}: unknown predecessor {predecessor}")]
    UnknownPredecessor { id: usize, predecessor: usize },
    #[error("cycle through interventions {0}")]
    PrecedenceCycle(String),
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PlacementError {
    #[error("days are numbered from 1")]
    DayZero,
    #[error("DAY_OVERRUN: start {start} + duration {duration} exceeds day length {hmax}")]
    DayOverrun { start: Time, duration: Time, hmax: Time },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Technician {
    pub id: usize,
    /// Skill level per domain, 0 meaning no competence.
    pub skills: Vec<u32>,
    pub unavailable_days: BTreeSet<u32>,
}

impl Technician {
    pub fn new(id: usize, skills: Vec<u32>) -> Self {
        Self { id, skills, unavailable_days: BTreeSet::new() }
    }

    pub fn is_available(&self, day: u32) -> bool {
        !self.unavailable_days.contains(&day)
    }

    /// Whether this technician counts towards the demand at `domain`, `level_index`.
    #[inline]
    pub fn qualifies(&self, domain: usize, level_index: usize) -> bool {
        self.skills[domain] as usize > level_index
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intervention {
    pub id: usize,
    pub duration: Time,
    /// 1 (most urgent) to 4.
    pub priority: u8,
    /// Price of outsourcing this intervention.
    pub cost: u64,
    pub predecessors: BTreeSet<usize>,
    /// `requirements[domain][n]` technicians with level `n + 1` or better.
    pub requirements: Vec<Vec<u32>>,
}

impl Intervention {
    pub fn has_requirements(&self) -> bool {
        self.requirements.iter().flatten().any(|&r| r > 0)
    }

    /// Zero-based priority class index.
    #[inline]
    pub fn class(&self) -> usize {
        usize::from(self.priority - 1)
    }
}

/// A validated problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    hmax: Time,
    budget: u64,
    domains: usize,
    levels: usize,
    technicians: Vec<Technician>,
    interventions: Vec<Intervention>,
    successors: Vec<Vec<usize>>,
    topological: Vec<usize>,
}

impl Instance {
    pub fn new(
        hmax: Time,
        budget: u64,
        domains: usize,
        levels: usize,
        technicians: Vec<Technician>,
        interventions: Vec<Intervention>,
    ) -> Result<Self, ModelError> {
        if hmax == 0 {
            return Err(ModelError::ZeroDayLength);
        }
        for (position, tech) in technicians.iter().enumerate() {
            if tech.id != position {
                return Err(ModelError::NonDenseIds { kind: "technician", position, id: tech.id });
            }
            if tech.skills.len() != domains {
                return Err(ModelError::SkillArity {
                    id: tech.id,
                    expected: domains,
                    found: tech.skills.len(),
                });
            }
            if let Some((domain, &level)) =
                tech.skills.iter().enumerate().find(|(_, &l)| l as usize > levels)
            {
                return Err(ModelError::SkillOutOfRange { id: tech.id, domain, level, levels });
            }
            if tech.unavailable_days.contains(&0) {
                return Err(ModelError::UnavailableDayZero { id: tech.id });
            }
        }
        let n = interventions.len();
        for (position, job) in interventions.iter().enumerate() {
            let id = job.id;
            if id != position {
                return Err(ModelError::NonDenseIds { kind: "intervention", position, id });
            }
            if !(1..=4).contains(&job.priority) {
                return Err(ModelError::PriorityOutOfRange { id, priority: job.priority });
            }
            if job.duration == 0 {
                return Err(ModelError::ZeroDuration { id });
            }
            if job.duration > hmax {
                return Err(ModelError::DurationExceedsDay { id, duration: job.duration, hmax });
            }
            if job.requirements.len() != domains
                || job.requirements.iter().any(|row| row.len() != levels)
            {
                return Err(ModelError::RequirementShape { id, domains, levels });
            }
            if let Some(domain) = job
                .requirements
                .iter()
                .position(|row| row.windows(2).any(|w| w[1] > w[0]))
            {
                return Err(ModelError::NonCumulativeRequirements { id, domain });
            }
            if let Some(&predecessor) = job.predecessors.iter().find(|&&p| p >= n) {
                return Err(ModelError::UnknownPredecessor { id, predecessor });
            }
        }

        let mut successors = vec![Vec::new(); n];
        for job in &interventions {
            for &p in &job.predecessors {
                successors[p].push(job.id);
            }
        }
        let topological = topological_order(&interventions, &successors)?;

        Ok(Self { hmax, budget, domains, levels, technicians, interventions, successors, topological })
    }

    pub fn hmax(&self) -> Time {
        self.hmax
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn domains(&self) -> usize {
        self.domains
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn technicians(&self) -> &[Technician] {
        &self.technicians
    }

    pub fn interventions(&self) -> &[Intervention] {
        &self.interventions
    }

    pub fn technician(&self, id: usize) -> &Technician {
        &self.technicians[id]
    }

    pub fn intervention(&self, id: usize) -> &Intervention {
        &self.interventions[id]
    }

    /// Direct successors of `id`.
    pub fn successors(&self, id: usize) -> &[usize] {
        &self.successors[id]
    }

    /// Intervention ids, every predecessor before its successors.
    pub fn topological_order(&self) -> &[usize] {
        &self.topological
    }

    /// Transitive predecessors of `id`, excluding `id`.
    pub fn ancestors(&self, id: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = self.interventions[id].predecessors.iter().copied().collect();
        while let Some(p) = stack.pop() {
            if seen.insert(p) {
                stack.extend(self.interventions[p].predecessors.iter().copied());
            }
        }
        seen
    }

    /// Smallest successor-closed set containing `seeds`.
    pub fn successor_closure<I: IntoIterator<Item = usize>>(&self, seeds: I) -> BTreeSet<usize> {
        let mut closed = BTreeSet::new();
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        while let Some(j) = stack.pop() {
            if closed.insert(j) {
                stack.extend(self.successors[j].iter().copied());
            }
        }
        closed
    }

    pub fn is_successor_closed(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().all(|&i| self.successors[i].iter().all(|j| set.contains(j)))
    }

    pub fn cost_of<'a, I: IntoIterator<Item = &'a usize>>(&self, ids: I) -> u64 {
        ids.into_iter().map(|&i| self.interventions[i].cost).sum()
    }

    /// Largest day index any technician is unavailable on, 0 when calendars are empty.
    pub fn last_unavailable_day(&self) -> u32 {
        self.technicians
            .iter()
            .filter_map(|t| t.unavailable_days.iter().next_back().copied())
            .max()
            .unwrap_or(0)
    }
}

fn topological_order(
    interventions: &[Intervention],
    successors: &[Vec<usize>],
) -> Result<Vec<usize>, ModelError> {
    let n = interventions.len();
    let mut indegree: Vec<usize> = interventions.iter().map(|j| j.predecessors.len()).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &j in &successors[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every remaining node has a remaining predecessor; walking predecessors
    // must revisit a node.
    let mut walk = vec![(0..n).find(|&i| indegree[i] > 0).expect("unsorted node")];
    loop {
        let cur = *walk.last().unwrap();
        let next = *interventions[cur]
            .predecessors
            .iter()
            .find(|&&p| indegree[p] > 0)
            .expect("remaining node keeps a remaining predecessor");
        if let Some(pos) = walk.iter().position(|&w| w == next) {
            let mut cycle: Vec<usize> = walk[pos..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            let text = cycle.iter().map(usize::to_string).collect::<Vec<_>>().join("→");
            return Err(ModelError::PrecedenceCycle(text));
        }
        walk.push(next);
    }
}

/// Absolute end of a placement on the cross-day time axis.
pub fn absolute_end(day: u32, start: Time, duration: Time, hmax: Time) -> Result<Time, PlacementError> {
    if day == 0 {
        return Err(PlacementError::DayZero);
    }
    if start + duration > hmax {
        return Err(PlacementError::DayOverrun { start, duration, hmax });
    }
    Ok(absolute_start(day, start, hmax) + duration)
}

#[inline]
pub fn absolute_start(day: u32, start: Time, hmax: Time) -> Time {
    Time::from(day.saturating_sub(1)) * hmax + start
}

/// Whether `team` meets every cumulative level demand of `intervention`.
pub fn team_covers<'a, I>(team: I, intervention: &Intervention) -> bool
where
    I: IntoIterator<Item = &'a Technician>,
{
    let members: Vec<&Technician> = team.into_iter().collect();
    intervention.requirements.iter().enumerate().all(|(domain, row)| {
        row.iter().enumerate().all(|(n, &need)| {
            need == 0 || members.iter().filter(|t| t.qualifies(domain, n)).count() >= need as usize
        })
    })
}

/// One scheduled intervention.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub intervention: usize,
    pub day: u32,
    pub start: Time,
    pub team: BTreeSet<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Solution {
    pub hired: BTreeSet<usize>,
    /// Sorted by intervention id.
    pub assignments: Vec<Assignment>,
}

impl Solution {
    pub fn new(hired: BTreeSet<usize>, mut assignments: Vec<Assignment>) -> Self {
        assignments.sort_by_key(|a| a.intervention);
        Self { hired, assignments }
    }

    pub fn assignment(&self, intervention: usize) -> Option<&Assignment> {
        self.assignments
            .binary_search_by_key(&intervention, |a| a.intervention)
            .ok()
            .map(|k| &self.assignments[k])
    }
}

/// How `t4` is derived.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum T4Mode {
    /// Ending time of the last priority-4 intervention.
    #[default]
    Priority,
    /// Ending time of the last intervention of any priority.
    Makespan,
}

impl std::str::FromStr for T4Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "priority" => Ok(Self::Priority),
            "makespan" => Ok(Self::Makespan),
            other => Err(format!("unknown t4 mode `{other}` (expected priority|makespan)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Objective {
    pub t: [Time; PRIORITIES],
    pub z: u64,
}

impl Objective {
    pub fn from_ends(t: [Time; PRIORITIES]) -> Self {
        let z = t.iter().zip(PRIORITY_WEIGHTS).map(|(&t, w)| t * w).sum();
        Self { t, z }
    }

    /// Builds the objective from per-class maxima and the overall maximum end.
    pub fn from_class_ends(class_ends: [Time; PRIORITIES], makespan: Time, mode: T4Mode) -> Self {
        let mut t = class_ends;
        if mode == T4Mode::Makespan {
            t[3] = makespan;
        }
        Self::from_ends(t)
    }

    /// Component-wise `self <= other` on the ending times.
    pub fn dominated_by(&self, other: &Objective) -> bool {
        self.t.iter().zip(other.t.iter()).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.t[0], self.t[1], self.t[2], self.t[3], self.z)
    }
}

/// Ending times per priority and the weighted objective of `solution`.
///
/// Assignments naming unknown interventions are ignored; classes without a
/// scheduled intervention contribute an ending time of 0.
pub fn evaluate(instance: &Instance, solution: &Solution, mode: T4Mode) -> Objective {
    let hmax = instance.hmax();
    let mut class_ends = [0; PRIORITIES];
    let mut makespan = 0;
    for a in &solution.assignments {
        let Some(job) = instance.interventions().get(a.intervention) else {
            continue;
        };
        let end = absolute_start(a.day, a.start, hmax) + job.duration;
        let c = job.class();
        class_ends[c] = class_ends[c].max(end);
        makespan = makespan.max(end);
    }
    Objective::from_class_ends(class_ends, makespan, mode)
}
