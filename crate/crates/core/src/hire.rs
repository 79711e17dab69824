//! Outsourcing selection as a precedence-constrained knapsack.
//!
//! Hiring an intervention forces hiring every successor, so a plan is always
//! successor-closed. The plan maximizes the hired technician-time weight
//! under the budget.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Instance, Intervention, Solution};

/// Above this many candidates the exact search gives way to the greedy.
pub const EXACT_CANDIDATE_LIMIT: usize = 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HireError {
    #[error("INFEASIBLE_MUST_HIRE: outsourcing uncoverable interventions {ids:?} costs {cost}, budget is {budget}")]
    InfeasibleMustHire { ids: BTreeSet<usize>, cost: u64, budget: u64 },
    #[error("hire plan is not successor-closed: {hired} is hired but its successor {successor} is not")]
    NotSuccessorClosed { hired: usize, successor: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HirePlan {
    pub hired: BTreeSet<usize>,
    pub total_cost: u64,
    pub total_weight: u64,
    /// Whether the plan is a proven optimum.
    pub exact: bool,
}

struct Knapsack<'a> {
    instance: &'a Instance,
    weights: &'a [u64],
    closures: Vec<BTreeSet<usize>>,
    ancestors: Vec<BTreeSet<usize>>,
    fixed: BTreeSet<usize>,
    budget: u64,
    /// Branching order: descending weight over closure cost.
    candidates: Vec<usize>,
    /// Bounding order: descending weight over own cost.
    by_item_ratio: Vec<usize>,
}

/// `a` is strictly better than `b` under weight desc, then cost asc.
fn better(a: (u64, u64), b: (u64, u64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Compares `w1 / c1` with `w2 / c2`, zero costs ranking above everything.
fn ratio_cmp(w1: u64, c1: u64, w2: u64, c2: u64) -> Ordering {
    match (c1, c2) {
        (0, 0) => w1.cmp(&w2),
        (0, _) => Ordering::Greater,
        (_, 0) => Ordering::Less,
        _ => (u128::from(w1) * u128::from(c2)).cmp(&(u128::from(w2) * u128::from(c1))),
    }
}

impl<'a> Knapsack<'a> {
    fn new(instance: &'a Instance, weights: &'a [u64], fixed: BTreeSet<usize>) -> Self {
        let n = instance.interventions().len();
        let closures: Vec<BTreeSet<usize>> = (0..n).map(|i| instance.successor_closure([i])).collect();
        let ancestors = (0..n).map(|i| instance.ancestors(i)).collect();
        let budget = instance.budget() - instance.cost_of(&fixed);
        let closure_cost = |i: usize| instance.cost_of(closures[i].difference(&fixed));
        let mut candidates: Vec<usize> = (0..n)
            .filter(|i| !fixed.contains(i) && weights[*i] > 0 && closure_cost(*i) <= budget)
            .collect();
        let closure_weight =
            |i: usize| closures[i].difference(&fixed).map(|&j| weights[j]).sum::<u64>();
        candidates.sort_by(|&a, &b| {
            ratio_cmp(closure_weight(b), closure_cost(b), closure_weight(a), closure_cost(a)).then(a.cmp(&b))
        });
        let cost = |i: usize| instance.intervention(i).cost;
        let mut by_item_ratio = candidates.clone();
        by_item_ratio
            .sort_by(|&a, &b| ratio_cmp(weights[b], cost(b), weights[a], cost(a)).then(a.cmp(&b)));
        Self { instance, weights, closures, ancestors, fixed, budget, candidates, by_item_ratio }
    }

    fn weight_of<'s, I: IntoIterator<Item = &'s usize>>(&self, ids: I) -> u64 {
        ids.into_iter().map(|&i| self.weights[i]).sum()
    }

    fn cost(&self, i: usize) -> u64 {
        self.instance.intervention(i).cost
    }

    /// Adds the best-ratio affordable closure until nothing fits.
    fn greedy_fill(&self, hired: &mut BTreeSet<usize>, spent: &mut u64) {
        loop {
            let mut pick: Option<(usize, u64, u64)> = None;
            for &i in &self.candidates {
                if hired.contains(&i) {
                    continue;
                }
                let added: Vec<usize> = self.closures[i].difference(hired).copied().collect();
                let c: u64 = added.iter().map(|&j| self.cost(j)).sum();
                let w = self.weight_of(&added);
                if w == 0 || *spent + c > self.budget {
                    continue;
                }
                let wins = match pick {
                    None => true,
                    Some((_, pw, pc)) => ratio_cmp(w, c, pw, pc).then(w.cmp(&pw)) == Ordering::Greater,
                };
                if wins {
                    pick = Some((i, w, c));
                }
            }
            let Some((i, _, c)) = pick else { return };
            hired.extend(self.closures[i].iter().copied());
            *spent += c;
        }
    }

    fn greedy(&self) -> (BTreeSet<usize>, u64) {
        let mut hired = self.fixed.clone();
        let mut spent = 0;
        self.greedy_fill(&mut hired, &mut spent);
        loop {
            let current = (self.weight_of(&hired), spent);
            let mut improved = None;
            for &r in hired.difference(&self.fixed) {
                let mut trial: BTreeSet<usize> = hired.clone();
                trial.remove(&r);
                for a in &self.ancestors[r] {
                    trial.remove(a);
                }
                let mut trial_spent = spent - self.instance.cost_of(hired.difference(&trial));
                self.greedy_fill(&mut trial, &mut trial_spent);
                if better((self.weight_of(&trial), trial_spent), current) {
                    improved = Some((trial, trial_spent));
                    break;
                }
            }
            match improved {
                Some((h, s)) => {
                    hired = h;
                    spent = s;
                }
                None => return (hired, spent),
            }
        }
    }

    fn exact(&self) -> (BTreeSet<usize>, u64) {
        let (seed, seed_spent) = self.greedy();
        let mut search = Exact {
            ks: self,
            best: seed,
            best_key: (0, seed_spent),
            hired: self.fixed.clone(),
            excluded: BTreeSet::new(),
        };
        search.best_key.0 = self.weight_of(&search.best);
        let base_weight = self.weight_of(&self.fixed);
        search.dfs(0, base_weight, 0);
        let spent = search.best_key.1;
        (search.best, spent)
    }
}

struct Exact<'k, 'a> {
    ks: &'k Knapsack<'a>,
    best: BTreeSet<usize>,
    best_key: (u64, u64),
    hired: BTreeSet<usize>,
    excluded: BTreeSet<usize>,
}

impl Exact<'_, '_> {
    /// Fractional knapsack over the undecided candidates, floored: completion
    /// weights are integral.
    fn upper_bound(&self, weight: u64, spent: u64) -> u64 {
        let mut room = self.ks.budget - spent;
        let mut bound = weight as f64;
        for &i in &self.ks.by_item_ratio {
            if self.hired.contains(&i) || self.excluded.contains(&i) {
                continue;
            }
            let c = self.ks.cost(i);
            let w = self.ks.weights[i];
            if c <= room {
                room -= c;
                bound += w as f64;
            } else {
                bound += w as f64 * room as f64 / c as f64;
                break;
            }
        }
        (bound + 1e-9).floor() as u64
    }

    fn dfs(&mut self, pos: usize, weight: u64, spent: u64) {
        let next = self.ks.candidates[pos..]
            .iter()
            .position(|i| !self.hired.contains(i) && !self.excluded.contains(i))
            .map(|off| pos + off);
        let Some(at) = next else {
            if better((weight, spent), self.best_key) {
                self.best_key = (weight, spent);
                self.best = self.hired.clone();
            }
            return;
        };
        let ub = self.upper_bound(weight, spent);
        if ub < self.best_key.0 || (ub == self.best_key.0 && spent >= self.best_key.1) {
            return;
        }
        let k = self.ks.candidates[at];

        let added: Vec<usize> = self.ks.closures[k].difference(&self.hired).copied().collect();
        if added.iter().all(|j| !self.excluded.contains(j)) {
            let c: u64 = added.iter().map(|&j| self.ks.cost(j)).sum();
            if spent + c <= self.ks.budget {
                let w = self.ks.weight_of(&added);
                self.hired.extend(added.iter().copied());
                self.dfs(at + 1, weight + w, spent + c);
                for j in &added {
                    self.hired.remove(j);
                }
            }
        }

        // Excluding k rules out every ancestor as well.
        let newly: Vec<usize> = std::iter::once(k)
            .chain(self.ks.ancestors[k].iter().copied())
            .filter(|j| !self.excluded.contains(j))
            .collect();
        self.excluded.extend(newly.iter().copied());
        self.dfs(at + 1, weight, spent);
        for j in &newly {
            self.excluded.remove(j);
        }
    }
}

/// Chooses the outsourced set. `forced` (typically the uncoverable
/// interventions) is hired together with its successor closure.
pub fn select_hired(
    instance: &Instance,
    weights: &[u64],
    forced: &BTreeSet<usize>,
) -> Result<HirePlan, HireError> {
    assert_eq!(weights.len(), instance.interventions().len(), "one weight per intervention");
    let fixed = instance.successor_closure(forced.iter().copied());
    let fixed_cost = instance.cost_of(&fixed);
    if fixed_cost > instance.budget() {
        return Err(HireError::InfeasibleMustHire {
            ids: fixed,
            cost: fixed_cost,
            budget: instance.budget(),
        });
    }
    let ks = Knapsack::new(instance, weights, fixed);
    let exact = ks.candidates.len() <= EXACT_CANDIDATE_LIMIT;
    let (hired, _) = if exact { ks.exact() } else { ks.greedy() };
    let total_cost = instance.cost_of(&hired);
    let total_weight = ks.weight_of(&hired);
    log::debug!(
        "hire plan: {} interventions, cost {total_cost}/{}, weight {total_weight}, exact={exact}",
        hired.len(),
        instance.budget()
    );
    Ok(HirePlan { hired, total_cost, total_weight, exact })
}

/// The sub-problem left after outsourcing, with dense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedInstance {
    pub instance: Instance,
    /// `original[new_id]` is the id in the full instance.
    pub original: Vec<usize>,
}

impl ReducedInstance {
    /// Maps a solution of the reduced instance back onto the full one.
    pub fn lift(&self, solution: &Solution, hired: &BTreeSet<usize>) -> Solution {
        let assignments = solution
            .assignments
            .iter()
            .map(|a| {
                let mut a = a.clone();
                a.intervention = self.original[a.intervention];
                a
            })
            .collect();
        let mut all_hired = hired.clone();
        all_hired.extend(solution.hired.iter().map(|&h| self.original[h]));
        Solution::new(all_hired, assignments)
    }

    /// Maps a per-intervention vector of the full instance onto the reduced one.
    pub fn project<T: Clone>(&self, values: &[T]) -> Vec<T> {
        self.original.iter().map(|&i| values[i].clone()).collect()
    }
}

/// Deletes the hired interventions. Remaining budget is what the plan left over.
pub fn reduce_instance(instance: &Instance, hired: &BTreeSet<usize>) -> Result<ReducedInstance, HireError> {
    for &h in hired {
        if let Some(&successor) = instance.successors(h).iter().find(|s| !hired.contains(s)) {
            return Err(HireError::NotSuccessorClosed { hired: h, successor });
        }
    }
    let n = instance.interventions().len();
    let original: Vec<usize> = (0..n).filter(|i| !hired.contains(i)).collect();
    let mut renumber = vec![usize::MAX; n];
    for (new, &old) in original.iter().enumerate() {
        renumber[old] = new;
    }
    let interventions: Vec<Intervention> = original
        .iter()
        .enumerate()
        .map(|(new, &old)| {
            let job = instance.intervention(old);
            Intervention {
                id: new,
                predecessors: job.predecessors.iter().map(|&p| renumber[p]).collect(),
                ..job.clone()
            }
        })
        .collect();
    let instance = Instance::new(
        instance.hmax(),
        instance.budget().saturating_sub(instance.cost_of(hired)),
        instance.domains(),
        instance.levels(),
        instance.technicians().to_vec(),
        interventions,
    )
    .expect("a successor-closed deletion keeps the instance valid");
    Ok(ReducedInstance { instance, original })
}
