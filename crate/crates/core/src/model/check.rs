//! Feasibility checker. Never fails: every problem becomes a report entry.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{absolute_start, team_covers, Assignment, Instance, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    TeamChanged,
    Overlap,
    Precedence,
    DayOverrun,
    SkillShortfall,
    BudgetExceeded,
    TechDoubleBooked,
    TechUnavailable,
    MissingIntervention,
    HiredSuccessorScheduled,
    /// Unknown ids, duplicated assignments, day 0, or an intervention both hired and scheduled.
    MalformedAssignment,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TeamChanged => "TEAM_CHANGED",
            Self::Overlap => "OVERLAP",
            Self::Precedence => "PRECEDENCE",
            Self::DayOverrun => "DAY_OVERRUN",
            Self::SkillShortfall => "SKILL_SHORTFALL",
            Self::BudgetExceeded => "BUDGET_EXCEEDED",
            Self::TechDoubleBooked => "TECH_DOUBLE_BOOKED",
            Self::TechUnavailable => "TECH_UNAVAILABLE",
            Self::MissingIntervention => "MISSING_INTERVENTION",
            Self::HiredSuccessorScheduled => "HIRED_SUCCESSOR_SCHEDULED",
            Self::MalformedAssignment => "MALFORMED_ASSIGNMENT",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn codes(&self) -> BTreeSet<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    fn push(&mut self, code: ViolationCode, detail: String) {
        self.violations.push(Violation { code, detail });
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{} {}", v.code, v.detail)?;
        }
        Ok(())
    }
}

/// Checks every scheduling constraint, the outsourcing budget and the
/// successor-closure of the hired set.
pub fn check(instance: &Instance, solution: &Solution) -> ViolationReport {
    use ViolationCode::*;

    let mut report = ViolationReport::default();
    let n = instance.interventions().len();
    let hmax = instance.hmax();

    let mut hired = BTreeSet::new();
    for &h in &solution.hired {
        if h < n {
            hired.insert(h);
        } else {
            report.push(MalformedAssignment, format!("hired intervention {h} does not exist"));
        }
    }
    let spent = instance.cost_of(&hired);
    if spent > instance.budget() {
        report.push(BudgetExceeded, format!("hired cost {spent} exceeds budget {}", instance.budget()));
    }

    // First well-formed assignment per intervention.
    let mut placed: BTreeMap<usize, Assignment> = BTreeMap::new();
    for a in &solution.assignments {
        let id = a.intervention;
        if id >= n {
            report.push(MalformedAssignment, format!("intervention {id} does not exist"));
            continue;
        }
        if a.day == 0 {
            report.push(MalformedAssignment, format!("intervention {id} scheduled on day 0"));
            continue;
        }
        if placed.contains_key(&id) {
            report.push(MalformedAssignment, format!("intervention {id} assigned more than once"));
            continue;
        }
        if hired.contains(&id) {
            report.push(MalformedAssignment, format!("intervention {id} is both hired and scheduled"));
        }
        let mut clean = a.clone();
        let unknown: Vec<usize> =
            a.team.iter().copied().filter(|&t| t >= instance.technicians().len()).collect();
        for t in unknown {
            report.push(MalformedAssignment, format!("intervention {id}: technician {t} does not exist"));
            clean.team.remove(&t);
        }
        placed.insert(id, clean);
    }

    for id in 0..n {
        if !hired.contains(&id) && !placed.contains_key(&id) {
            report.push(MissingIntervention, format!("intervention {id} is neither hired nor scheduled"));
        }
    }

    for (&id, a) in &placed {
        let job = instance.intervention(id);
        if a.start + job.duration > hmax {
            report.push(
                DayOverrun,
                format!("intervention {id}: start {} + duration {} > {hmax}", a.start, job.duration),
            );
        }
        if !team_covers(a.team.iter().map(|&t| instance.technician(t)), job) {
            report.push(SkillShortfall, format!("intervention {id}: team {:?} lacks skills", a.team));
        }
        for &t in &a.team {
            if !instance.technician(t).is_available(a.day) {
                report.push(
                    TechUnavailable,
                    format!("intervention {id}: technician {t} unavailable on day {}", a.day),
                );
            }
        }
    }

    let mut by_day: BTreeMap<u32, Vec<&Assignment>> = BTreeMap::new();
    for a in placed.values() {
        by_day.entry(a.day).or_default().push(a);
    }
    for (&day, day_jobs) in &by_day {
        let teams: BTreeSet<&BTreeSet<usize>> = day_jobs.iter().map(|a| &a.team).collect();
        let teams: Vec<_> = teams.into_iter().collect();
        for (k, a) in teams.iter().enumerate() {
            for b in &teams[k + 1..] {
                if a.is_disjoint(b) {
                    continue;
                }
                if a.is_subset(b) || b.is_subset(a) {
                    report.push(TeamChanged, format!("day {day}: team {a:?} changes to {b:?}"));
                } else {
                    let shared: Vec<_> = a.intersection(b).collect();
                    report.push(
                        TechDoubleBooked,
                        format!("day {day}: technicians {shared:?} in teams {a:?} and {b:?}"),
                    );
                }
            }
        }
        for (k, a) in day_jobs.iter().enumerate() {
            let a_end = a.start + instance.intervention(a.intervention).duration;
            for b in &day_jobs[k + 1..] {
                let b_end = b.start + instance.intervention(b.intervention).duration;
                if !a.team.is_disjoint(&b.team) && a.start < b_end && b.start < a_end {
                    report.push(
                        Overlap,
                        format!(
                            "day {day}: interventions {} [{}, {a_end}) and {} [{}, {b_end}) share technicians",
                            a.intervention, a.start, b.intervention, b.start
                        ),
                    );
                }
            }
        }
    }

    for (&id, a) in &placed {
        let start = absolute_start(a.day, a.start, hmax);
        for &p in &instance.intervention(id).predecessors {
            if hired.contains(&p) {
                report.push(
                    HiredSuccessorScheduled,
                    format!("hired intervention {p} has scheduled successor {id}"),
                );
            } else if let Some(pa) = placed.get(&p) {
                let end = absolute_start(pa.day, pa.start, hmax) + instance.intervention(p).duration;
                if end > start {
                    report.push(
                        Precedence,
                        format!("intervention {p} ends at {end} after successor {id} starts at {start}"),
                    );
                }
            }
        }
    }

    report
}
