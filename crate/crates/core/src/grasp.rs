//! The adaptive search loop and the end-to-end solve pipeline.
//!
//! For each of the two seed permutations the loop repeats: randomized greedy
//! construction, local search when the construction beats the incumbent,
//! and a criteria update that promotes the last intervention of every
//! priority class and its predecessors.

use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use thiserror::Error;

use crate::construct::{greedy_schedule, initial_criteria, ConstructError, Criteria, SearchRng, Selection, DEFAULT_ALPHA};
use crate::hire::{reduce_instance, select_hired, HireError, HirePlan};
use crate::local_search;
use crate::model::{absolute_start, check, evaluate, Instance, Objective, Solution, T4Mode, Time, PRIORITIES};
use crate::order::{best_two_permutations, OrderSweep, PriorityPermutation};
use crate::preprocess;

/// Which predecessors share the criteria bonus of a class's last intervention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PredUpdate {
    #[default]
    Direct,
    Transitive,
}

impl FromStr for PredUpdate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Self::Direct),
            "transitive" => Ok(Self::Transitive),
            other => Err(format!("unknown predecessor update `{other}` (expected direct|transitive)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchBudget {
    WallClock(Duration),
    /// Fixed number of constructions, split over both permutations. Makes
    /// runs reproducible bit for bit.
    Iterations(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub budget: SearchBudget,
    pub seed: u64,
    pub alpha: f64,
    pub pred_update: PredUpdate,
    pub t4_mode: T4Mode,
    pub reset_criteria: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: SearchBudget::WallClock(Duration::from_secs(10)),
            seed: 0,
            alpha: DEFAULT_ALPHA,
            pred_update: PredUpdate::Direct,
            t4_mode: T4Mode::Priority,
            reset_criteria: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        match self.budget {
            SearchBudget::WallClock(d) if d.is_zero() => {
                return Err(SolveError::Config("time limit must be positive".into()))
            }
            SearchBudget::Iterations(0) => return Err(SolveError::Config("iterations must be positive".into())),
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(SolveError::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Hire(#[from] HireError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error("invalid search configuration: {0}")]
    Config(String),
}

/// When a single permutation run stops. The first iteration always runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stop {
    pub deadline: Option<Instant>,
    pub max_iterations: Option<u64>,
}

impl Stop {
    fn reached(&self, iterations: u64) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d) || self.max_iterations.is_some_and(|m| iterations >= m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incumbent {
    pub solution: Solution,
    pub objective: Objective,
    pub iterations: u64,
    /// Incumbent objective after each iteration.
    pub trace: Vec<u64>,
}

/// Adds the class weight of each class's last intervention to it and to its
/// predecessors.
pub fn update_criteria(
    criteria: &mut Criteria,
    instance: &Instance,
    solution: &Solution,
    p: &PriorityPermutation,
    mode: PredUpdate,
) {
    let hmax = instance.hmax();
    let mut last: [Option<(Time, usize)>; PRIORITIES] = [None; PRIORITIES];
    for a in &solution.assignments {
        let job = instance.intervention(a.intervention);
        let end = absolute_start(a.day, a.start, hmax) + job.duration;
        let slot = &mut last[job.class()];
        // latest end, lowest id on ties
        if slot.is_none_or(|(e, id)| end > e || (end == e && a.intervention < id)) {
            *slot = Some((end, a.intervention));
        }
    }
    for (_, id) in last.into_iter().flatten() {
        let bonus = p.weight_of(instance.intervention(id).priority);
        criteria.add(id, bonus);
        let preds: Vec<usize> = match mode {
            PredUpdate::Direct => instance.intervention(id).predecessors.iter().copied().collect(),
            PredUpdate::Transitive => instance.ancestors(id).into_iter().collect(),
        };
        for j in preds {
            criteria.add(j, bonus);
        }
    }
}

/// Resource-free bound: each class ends no earlier than its longest
/// predecessor chain packed into days.
pub fn lower_bound(instance: &Instance, mode: T4Mode) -> Objective {
    let hmax = instance.hmax();
    let mut finish = vec![0; instance.interventions().len()];
    let mut class_ends = [0; PRIORITIES];
    let mut makespan = 0;
    for &i in instance.topological_order() {
        let job = instance.intervention(i);
        let ready = job.predecessors.iter().map(|&p| finish[p]).max().unwrap_or(0);
        let within = ready % hmax;
        let start = if within + job.duration > hmax { ready - within + hmax } else { ready };
        finish[i] = start + job.duration;
        class_ends[job.class()] = class_ends[job.class()].max(finish[i]);
        makespan = makespan.max(finish[i]);
    }
    Objective::from_class_ends(class_ends, makespan, mode)
}

/// Iterates construction, local search and criteria updates for one permutation.
pub fn grasp_run(
    instance: &Instance,
    tie_weights: &[u64],
    p: PriorityPermutation,
    criteria: Criteria,
    config: &SearchConfig,
    stop: Stop,
    rng: &mut SearchRng,
) -> Result<Incumbent, ConstructError> {
    let mode = config.t4_mode;
    let bound = lower_bound(instance, mode).z;
    let initial = criteria.clone();
    let mut criteria = criteria;
    let mut best: Option<(Solution, Objective)> = None;
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut schedule = greedy_schedule(
            instance,
            &criteria,
            tie_weights,
            Selection::Randomized { rng: &mut *rng, alpha: config.alpha },
        )?;
        let greedy = schedule.to_solution();
        let greedy_z = schedule.objective(mode).z;
        let mut phase = "greedy";
        if best.as_ref().is_none_or(|(_, obj)| greedy_z < obj.z) {
            local_search::improve(&mut schedule, mode, stop.deadline);
            best = Some((schedule.to_solution(), schedule.objective(mode)));
            phase = "ls";
        }
        let best_z = best.as_ref().map(|(_, o)| o.z).unwrap();
        trace.push(best_z);
        log::debug!("iter={iterations} z={greedy_z} best={best_z} phase={phase}");

        if config.reset_criteria {
            criteria = initial.clone();
        } else {
            update_criteria(&mut criteria, instance, &greedy, &p, config.pred_update);
        }
        if best_z <= bound || stop.reached(iterations) {
            break;
        }
    }
    let (solution, objective) = best.unwrap();
    Ok(Incumbent { solution, objective, iterations, trace })
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Solution,
    pub objective: Objective,
    pub plan: HirePlan,
    /// Greedy sweep over the reduced instance.
    pub sweep: OrderSweep,
    pub runs: Vec<(PriorityPermutation, Incumbent)>,
}

/// Outsourcing, permutation sweep, then the adaptive search from the two
/// best permutations, each given half of the remaining budget.
pub fn solve(instance: &Instance, config: &SearchConfig) -> Result<SolveOutcome, SolveError> {
    config.validate()?;
    let started = Instant::now();
    let mode = config.t4_mode;

    let pre = preprocess::weights(instance);
    let plan = select_hired(instance, &pre.weight, &pre.uncoverable)?;
    let reduced = reduce_instance(instance, &plan.hired)?;
    let sub = &reduced.instance;
    let tie = reduced.project(&pre.weight);

    let sweep = best_two_permutations(sub, &tie, mode)?;
    let seed_run = sweep.run_for(sweep.best);
    let mut best = (seed_run.solution.clone(), evaluate(sub, &seed_run.solution, mode));
    let bound = lower_bound(sub, mode).z;

    let mut runs = Vec::new();
    for (k, p) in [sweep.best, sweep.second].into_iter().enumerate() {
        if k > 0 && best.1.z <= bound {
            break;
        }
        let stop = match config.budget {
            SearchBudget::WallClock(limit) => {
                let now = Instant::now();
                let remaining = (started + limit).saturating_duration_since(now);
                let share = if k == 0 { remaining / 2 } else { remaining };
                Stop { deadline: Some(now + share), max_iterations: None }
            }
            SearchBudget::Iterations(n) => {
                let share = if k == 0 { n.div_ceil(2) } else { n / 2 };
                Stop { deadline: None, max_iterations: Some(share.max(1)) }
            }
        };
        let mut rng = SearchRng::seed_from_u64(config.seed);
        rng.set_stream(k as u64);
        let incumbent = grasp_run(sub, &tie, p, initial_criteria(sub, &p), config, stop, &mut rng)?;
        log::info!(
            "permutation {p}: best z={} after {} iterations",
            incumbent.objective.z,
            incumbent.iterations
        );
        if incumbent.objective.z < best.1.z {
            best = (incumbent.solution.clone(), incumbent.objective);
        }
        runs.push((p, incumbent));
    }

    let solution = reduced.lift(&best.0, &plan.hired);
    let objective = evaluate(instance, &solution, mode);
    debug_assert!(check(instance, &solution).is_empty(), "{}", check(instance, &solution));
    Ok(SolveOutcome { solution, objective, plan, sweep, runs })
}
