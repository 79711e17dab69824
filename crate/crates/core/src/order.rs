//! Priority permutations and the sweep that picks the two best insertion orders.

use std::fmt;
use std::str::FromStr;

use crate::construct::{initial_criteria, run_greedy, ConstructError, Selection};
use crate::model::{evaluate, Instance, Solution, T4Mode, PRIORITY_WEIGHTS};

/// An ordering of the four priorities. Position `k` receives the `k`-th
/// objective weight, so `(1,2,3,4)` maps priorities to `28,14,4,1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PriorityPermutation([u8; 4]);

impl PriorityPermutation {
    pub const IDENTITY: Self = Self([1, 2, 3, 4]);

    pub fn new(order: [u8; 4]) -> Option<Self> {
        let mut seen = [false; 4];
        for &p in &order {
            if !(1..=4).contains(&p) || std::mem::replace(&mut seen[usize::from(p - 1)], true) {
                return None;
            }
        }
        Some(Self(order))
    }

    pub fn order(&self) -> [u8; 4] {
        self.0
    }

    /// All 24 permutations in lexicographic order.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(24);
        for a in 1..=4u8 {
            for b in 1..=4u8 {
                for c in 1..=4u8 {
                    for d in 1..=4u8 {
                        if let Some(p) = Self::new([a, b, c, d]) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }

    /// Weight this permutation gives to interventions of `priority` (1..=4).
    pub fn weight_of(&self, priority: u8) -> u64 {
        let position = self.0.iter().position(|&p| p == priority).expect("priority in 1..=4");
        PRIORITY_WEIGHTS[position]
    }
}

impl Default for PriorityPermutation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl fmt::Display for PriorityPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a},{b},{c},{d})")
    }
}

impl FromStr for PriorityPermutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits: Vec<u8> = s
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|d| d.trim().parse::<u8>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let order: [u8; 4] = digits.try_into().map_err(|_| format!("`{s}` needs four priorities"))?;
        Self::new(order).ok_or_else(|| format!("`{s}` is not a permutation of 1..4"))
    }
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub permutation: PriorityPermutation,
    pub z: u64,
    pub solution: Solution,
}

/// Outcome of running the deterministic greedy under every permutation.
#[derive(Debug, Clone)]
pub struct OrderSweep {
    /// One run per permutation, in lexicographic permutation order.
    pub runs: Vec<SweepRun>,
    pub best: PriorityPermutation,
    pub second: PriorityPermutation,
}

impl OrderSweep {
    pub fn run_for(&self, p: PriorityPermutation) -> &SweepRun {
        self.runs.iter().find(|r| r.permutation == p).expect("every permutation is swept")
    }
}

/// Runs the deterministic greedy for all 24 permutations and keeps the two
/// with the smallest objective (ties: lexicographically smaller permutation).
pub fn best_two_permutations(
    instance: &Instance,
    tie_weights: &[u64],
    mode: T4Mode,
) -> Result<OrderSweep, ConstructError> {
    let mut runs = Vec::with_capacity(24);
    for p in PriorityPermutation::all() {
        let criteria = initial_criteria(instance, &p);
        let solution = run_greedy(instance, &criteria, tie_weights, Selection::Deterministic)?;
        let z = evaluate(instance, &solution, mode).z;
        log::info!("order {p} z={z}");
        runs.push(SweepRun { permutation: p, z, solution });
    }
    let mut ranked: Vec<(u64, PriorityPermutation)> = runs.iter().map(|r| (r.z, r.permutation)).collect();
    ranked.sort();
    Ok(OrderSweep { best: ranked[0].1, second: ranked[1].1, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{job, tech};

    #[test]
    fn identity_weights() {
        let p = PriorityPermutation::IDENTITY;
        assert_eq!([1, 2, 3, 4].map(|q| p.weight_of(q)), [28, 14, 4, 1]);
    }

    #[test]
    fn positional_weights() {
        let p = PriorityPermutation::new([3, 4, 1, 2]).unwrap();
        assert_eq!([3, 4, 1, 2].map(|q| p.weight_of(q)), [28, 14, 4, 1]);
        let p = PriorityPermutation::new([2, 3, 4, 1]).unwrap();
        assert_eq!(p.weight_of(1), 1);
    }

    #[test]
    fn all_permutations() {
        let all = PriorityPermutation::all();
        assert_eq!(all.len(), 24);
        assert_eq!(all[0], PriorityPermutation::IDENTITY);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for p in &all {
            assert_eq!((1..=4).map(|q| p.weight_of(q)).sum::<u64>(), 47);
        }
        assert!(PriorityPermutation::new([1, 1, 2, 3]).is_none());
        assert_eq!("(3,4,1,2)".parse::<PriorityPermutation>().unwrap().order(), [3, 4, 1, 2]);
    }

    #[test]
    fn total_tie_returns_lexicographic_pair() {
        let inst = Instance::new(
            120,
            0,
            1,
            1,
            vec![tech(0, &[1])],
            vec![job(0, 30, 1, &[], vec![vec![1]]), job(1, 30, 1, &[], vec![vec![1]])],
        )
        .unwrap();
        let sweep = best_two_permutations(&inst, &[30, 30], T4Mode::Priority).unwrap();
        assert_eq!(sweep.runs.len(), 24);
        assert_eq!(sweep.best, PriorityPermutation::IDENTITY);
        assert_eq!(sweep.second.order(), [1, 2, 4, 3]);
    }
}
