//! Seeded random instances.
//!
//! Every intervention's requirements are derived from a randomly drawn
//! sub-team of the workforce, so the full workforce always covers it.
//! Precedence edges only run from lower to higher ids.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Instance, Intervention, Technician, Time};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub interventions: usize,
    pub technicians: usize,
    pub domains: usize,
    pub levels: usize,
    /// Probability of each lower-to-higher id precedence edge.
    pub density: f64,
    pub costs: RangeInclusive<u64>,
    pub durations: RangeInclusive<Time>,
    /// Relative frequency of priorities 1..=4.
    pub priority_weights: [u32; 4],
    pub hmax: Time,
    /// Budget as a fraction of the summed intervention costs.
    pub budget_fraction: f64,
    /// Largest sub-team a requirement matrix is drawn from.
    pub max_team_size: usize,
    /// Highest skill level any requirement asks for; `None` means `levels`.
    pub max_required_level: Option<usize>,
    /// Probability that a technician is off on each of days 1..=`calendar_days`.
    pub unavailability: f64,
    pub calendar_days: u32,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            interventions: 10,
            technicians: 5,
            domains: 3,
            levels: 2,
            density: 0.1,
            costs: 1..=10,
            durations: 15..=90,
            priority_weights: [1, 1, 1, 1],
            hmax: 120,
            budget_fraction: 0.2,
            max_team_size: 3,
            max_required_level: None,
            unavailability: 0.0,
            calendar_days: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("{0} must be positive")]
    ZeroCount(&'static str),
    #[error("{name} = {value} is outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("empty {0} range")]
    EmptyRange(&'static str),
    #[error("durations must lie in 1..={hmax}")]
    Duration { hmax: Time },
    #[error("priority weights are all zero")]
    PriorityWeights,
    #[error("requirements up to level {requested} exceed the {levels} available levels")]
    UncoverableLevel { requested: usize, levels: usize },
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GenerateError> {
        for (name, n) in [
            ("interventions", self.interventions),
            ("technicians", self.technicians),
            ("domains", self.domains),
            ("levels", self.levels),
            ("max_team_size", self.max_team_size),
        ] {
            if n == 0 {
                return Err(GenerateError::ZeroCount(name));
            }
        }
        if self.hmax == 0 {
            return Err(GenerateError::ZeroCount("hmax"));
        }
        for (name, value) in [
            ("density", self.density),
            ("budget_fraction", self.budget_fraction),
            ("unavailability", self.unavailability),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenerateError::Probability { name, value });
            }
        }
        if self.costs.is_empty() {
            return Err(GenerateError::EmptyRange("cost"));
        }
        if self.durations.is_empty() {
            return Err(GenerateError::EmptyRange("duration"));
        }
        if *self.durations.start() == 0 || *self.durations.end() > self.hmax {
            return Err(GenerateError::Duration { hmax: self.hmax });
        }
        if self.priority_weights.iter().all(|&w| w == 0) {
            return Err(GenerateError::PriorityWeights);
        }
        match self.max_required_level {
            Some(0) => Err(GenerateError::ZeroCount("max_required_level")),
            Some(k) if k > self.levels => Err(GenerateError::UncoverableLevel { requested: k, levels: self.levels }),
            _ => Ok(()),
        }
    }
}

pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance, GenerateError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (d, l) = (config.domains, config.levels);
    let top = config.max_required_level.unwrap_or(l) as u32;

    let technicians: Vec<Technician> = (0..config.technicians)
        .map(|id| {
            let mut skills: Vec<u32> = (0..d).map(|_| rng.gen_range(0..=l as u32)).collect();
            if skills.iter().all(|&s| s == 0) {
                skills[rng.gen_range(0..d)] = rng.gen_range(1..=l as u32);
            }
            let unavailable_days: BTreeSet<u32> =
                (1..=config.calendar_days).filter(|_| rng.gen_bool(config.unavailability)).collect();
            Technician { id, skills, unavailable_days }
        })
        .collect();

    let priorities = WeightedIndex::new(config.priority_weights).expect("validated weights");
    let mut interventions = Vec::with_capacity(config.interventions);
    for id in 0..config.interventions {
        let duration = rng.gen_range(config.durations.clone());
        let priority = priorities.sample(&mut rng) as u8 + 1;
        let cost = rng.gen_range(config.costs.clone());
        let predecessors: BTreeSet<usize> = (0..id).filter(|_| rng.gen_bool(config.density)).collect();

        let size = rng.gen_range(1..=config.max_team_size.min(config.technicians));
        let team = rand::seq::index::sample(&mut rng, config.technicians, size);
        let mut requirements = vec![vec![0u32; l]; d];
        for (k, t) in team.iter().enumerate() {
            let skills = &technicians[t].skills;
            for (domain, &skill) in skills.iter().enumerate() {
                let cap = skill.min(top);
                // The first member always contributes so that no matrix is empty.
                let forced = k == 0 && domain == skills.iter().position(|&s| s > 0).unwrap_or(0);
                if cap > 0 && (forced || rng.gen_bool(0.5)) {
                    let level = rng.gen_range(1..=cap) as usize;
                    for cell in &mut requirements[domain][..level] {
                        *cell += 1;
                    }
                }
            }
        }
        interventions.push(Intervention { id, duration, priority, cost, predecessors, requirements });
    }

    let total_cost: u64 = interventions.iter().map(|j| j.cost).sum();
    let budget = (total_cost as f64 * config.budget_fraction).floor() as u64;
    Ok(Instance::new(config.hmax, budget, d, l, technicians, interventions)
        .expect("generated instances satisfy the model invariants"))
}
