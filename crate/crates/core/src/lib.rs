//! Scheduling of technicians and interventions: teams are formed per day,
//! some interventions may be outsourced within a budget, and the weighted
//! ending times of the four priority classes are minimized.
//!
//! The solve pipeline runs [`preprocess`] → [`hire`] → [`order`] →
//! [`grasp`] (which uses [`construct`] and [`local_search`]).
//! [`oracle`] solves tiny instances exactly for verification.

pub mod bench;
pub mod construct;
pub mod generate;
pub mod grasp;
pub mod hire;
pub mod io;
pub mod local_search;
pub mod model;
pub mod multicover;
pub mod oracle;
pub mod order;
pub mod preprocess;

pub use grasp::{solve, PredUpdate, SearchBudget, SearchConfig, SolveError, SolveOutcome};
pub use model::{check, evaluate, Instance, Objective, Solution, T4Mode, ViolationCode, ViolationReport};
