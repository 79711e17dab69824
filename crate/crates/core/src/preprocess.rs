//! Minimum team sizes and the technician-time weights used to pick
//! interventions for outsourcing.

use std::collections::BTreeSet;

use crate::model::{Instance, Technician};
use crate::multicover::{min_cover, Demand};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessResult {
    /// Minimum technician count per intervention, `None` when even the whole
    /// workforce cannot cover it.
    pub mintec: Vec<Option<usize>>,
    /// `mintec * duration`, 0 for uncoverable interventions.
    pub weight: Vec<u64>,
    pub uncoverable: BTreeSet<usize>,
}

/// Exact minimum number of technicians able to perform `intervention`
/// together, ignoring time and calendars.
pub fn mintec(instance: &Instance, intervention: usize) -> Option<usize> {
    let pool: Vec<&Technician> = instance.technicians().iter().collect();
    min_cover(&Demand::of(instance.intervention(intervention)), &pool).map(|team| team.len())
}

pub fn weights(instance: &Instance) -> PreprocessResult {
    let mintec: Vec<Option<usize>> =
        (0..instance.interventions().len()).map(|i| mintec(instance, i)).collect();
    let weight = mintec
        .iter()
        .zip(instance.interventions())
        .map(|(m, job)| m.map_or(0, |m| m as u64 * job.duration))
        .collect();
    let uncoverable = mintec
        .iter()
        .enumerate()
        .filter(|(_, m)| m.is_none())
        .map(|(i, _)| i)
        .collect();
    PreprocessResult { mintec, weight, uncoverable }
}
