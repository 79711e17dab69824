//! Minimum-cardinality multicover of cumulative skill demands.
//!
//! A demand lists `(domain, level index, need)` cells; a technician serves a
//! cell when its level in that domain is at least `level index + 1`. The
//! solver picks the fewest technicians from a pool such that every cell is
//! served `need` times. Technicians with identical cell profiles are
//! interchangeable, so the search branches on how many members of each
//! profile class to take.

use std::collections::BTreeMap;

use crate::model::{Intervention, Technician};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cell {
    domain: usize,
    level: usize,
    need: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Demand {
    cells: Vec<Cell>,
}

impl Demand {
    pub fn of(intervention: &Intervention) -> Self {
        let cells = intervention
            .requirements
            .iter()
            .enumerate()
            .flat_map(|(domain, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &need)| need > 0)
                    .map(move |(level, &need)| Cell { domain, level, need })
            })
            .collect();
        Self { cells }
    }

    /// What remains of `intervention`'s demand once `team` is counted.
    pub fn residual<'a, I>(intervention: &Intervention, team: I) -> Self
    where
        I: IntoIterator<Item = &'a Technician>,
    {
        let mut demand = Self::of(intervention);
        for tech in team {
            for cell in &mut demand.cells {
                if cell.need > 0 && tech.qualifies(cell.domain, cell.level) {
                    cell.need -= 1;
                }
            }
        }
        demand.cells.retain(|c| c.need > 0);
        demand
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Largest single-cell need; a trivial lower bound on any cover.
    pub fn max_need(&self) -> u32 {
        self.cells.iter().map(|c| c.need).max().unwrap_or(0)
    }

    fn profile(&self, tech: &Technician) -> Vec<bool> {
        self.cells.iter().map(|c| tech.qualifies(c.domain, c.level)).collect()
    }
}

struct Class {
    mask: Vec<bool>,
    ids: Vec<usize>,
}

struct Search<'a> {
    classes: &'a [Class],
    /// `capacity[k][c]`: technicians in classes `k..` serving cell `c`.
    capacity: Vec<Vec<u32>>,
    best: usize,
    best_take: Option<Vec<usize>>,
    take: Vec<usize>,
}

impl Search<'_> {
    fn lower_bound(&self, k: usize, residual: &[u32]) -> usize {
        let max_need = residual.iter().copied().max().unwrap_or(0) as usize;
        let total: u32 = residual.iter().sum();
        let widest = self.classes[k..]
            .iter()
            .map(|cls| cls.mask.iter().zip(residual).filter(|(&m, &r)| m && r > 0).count())
            .max()
            .unwrap_or(0);
        if total == 0 {
            return 0;
        }
        if widest == 0 {
            return usize::MAX;
        }
        max_need.max((total as usize).div_ceil(widest))
    }

    fn dfs(&mut self, k: usize, residual: &mut Vec<u32>, count: usize) {
        if residual.iter().all(|&r| r == 0) {
            if count < self.best {
                self.best = count;
                self.best_take = Some(self.take.clone());
            }
            return;
        }
        if k == self.classes.len() {
            return;
        }
        if residual.iter().zip(&self.capacity[k]).any(|(r, cap)| r > cap) {
            return;
        }
        let bound = self.lower_bound(k, residual);
        if bound == usize::MAX || count + bound >= self.best {
            return;
        }
        let class = &self.classes[k];
        let useful = class
            .mask
            .iter()
            .zip(residual.iter())
            .filter(|(&m, _)| m)
            .map(|(_, &r)| r as usize)
            .max()
            .unwrap_or(0);
        let most = class.ids.len().min(useful);
        for m in (0..=most).rev() {
            let saved = residual.clone();
            for (r, &served) in residual.iter_mut().zip(&class.mask) {
                if served {
                    *r = r.saturating_sub(m as u32);
                }
            }
            self.take[k] = m;
            self.dfs(k + 1, residual, count + m);
            *residual = saved;
        }
        self.take[k] = 0;
    }
}

/// Fewest technicians of `pool` meeting `demand`, as sorted ids, or `None`
/// when the whole pool falls short.
///
/// The first optimum found is returned; classes are explored widest profile
/// first and each class contributes its lowest ids.
pub fn min_cover(demand: &Demand, pool: &[&Technician]) -> Option<Vec<usize>> {
    if demand.is_empty() {
        return Some(Vec::new());
    }
    let mut grouped: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for tech in pool {
        let mask = demand.profile(tech);
        if mask.iter().any(|&m| m) {
            grouped.entry(mask).or_default().push(tech.id);
        }
    }
    let mut classes: Vec<Class> = grouped
        .into_iter()
        .map(|(mask, mut ids)| {
            ids.sort_unstable();
            Class { mask, ids }
        })
        .collect();
    classes.sort_by_key(|c| (std::cmp::Reverse(c.mask.iter().filter(|&&m| m).count()), c.ids[0]));

    let needs: Vec<u32> = demand.cells.iter().map(|c| c.need).collect();
    let cells = needs.len();
    let mut capacity = vec![vec![0u32; cells]; classes.len() + 1];
    for k in (0..classes.len()).rev() {
        let (row, below) = capacity.split_at_mut(k + 1);
        for ((cap, &under), &serves) in row[k].iter_mut().zip(&below[0]).zip(&classes[k].mask) {
            *cap = under + if serves { classes[k].ids.len() as u32 } else { 0 };
        }
    }
    if needs.iter().zip(&capacity[0]).any(|(n, cap)| n > cap) {
        return None;
    }

    let incumbent = greedy_cover(demand, pool)?;
    if incumbent.len() == demand.max_need() as usize {
        return Some(incumbent);
    }
    let mut search = Search {
        classes: &classes,
        capacity,
        best: incumbent.len(),
        best_take: None,
        take: vec![0; classes.len()],
    };
    let mut residual = needs;
    search.dfs(0, &mut residual, 0);
    match search.best_take {
        None => Some(incumbent),
        Some(take) => {
            let mut ids: Vec<usize> = classes
                .iter()
                .zip(take)
                .flat_map(|(cls, m)| cls.ids[..m].iter().copied())
                .collect();
            ids.sort_unstable();
            Some(ids)
        }
    }
}

/// Repeatedly adds the technician serving the most unmet cells (ties: lowest id).
pub fn greedy_cover(demand: &Demand, pool: &[&Technician]) -> Option<Vec<usize>> {
    let mut residual: Vec<u32> = demand.cells.iter().map(|c| c.need).collect();
    let mut remaining: Vec<&Technician> = pool.to_vec();
    remaining.sort_by_key(|t| t.id);
    let mut chosen = Vec::new();
    while residual.iter().any(|&r| r > 0) {
        let (pos, gain) = remaining
            .iter()
            .enumerate()
            .map(|(pos, t)| {
                let gain = demand
                    .cells
                    .iter()
                    .zip(&residual)
                    .filter(|(c, &r)| r > 0 && t.qualifies(c.domain, c.level))
                    .count();
                (pos, gain)
            })
            .fold((usize::MAX, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if gain == 0 {
            return None;
        }
        let tech = remaining.remove(pos);
        for (c, r) in demand.cells.iter().zip(residual.iter_mut()) {
            if *r > 0 && tech.qualifies(c.domain, c.level) {
                *r -= 1;
            }
        }
        chosen.push(tech.id);
    }
    chosen.sort_unstable();
    Some(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{job, tech};

    #[test]
    fn empty_demand_needs_nobody() {
        let j = job(0, 10, 1, &[], vec![vec![0, 0]]);
        assert_eq!(min_cover(&Demand::of(&j), &[]), Some(vec![]));
    }

    #[test]
    fn greedy_is_beaten_when_it_picks_the_wide_technician() {
        // cells: d0>=1 (need 1), d1>=1 (need 1), d2>=1 (need 1)
        // t0 serves d0,d1; t1 serves d2,d0; t2 serves d1,d2; t3 serves all three
        let j = job(0, 10, 1, &[], vec![vec![1], vec![1], vec![1]]);
        let techs = [tech(0, &[1, 1, 0]), tech(1, &[1, 0, 1]), tech(2, &[0, 1, 1]), tech(3, &[1, 1, 1])];
        let pool: Vec<&Technician> = techs.iter().collect();
        assert_eq!(min_cover(&Demand::of(&j), &pool), Some(vec![3]));

        // six single-level domains; the four-domain technician lures greedy into three picks
        let j = job(0, 10, 1, &[], vec![vec![1]; 6]);
        let techs = [tech(0, &[1, 1, 1, 0, 0, 0]), tech(1, &[0, 0, 0, 1, 1, 1]), tech(2, &[1, 1, 0, 1, 1, 0])];
        let pool: Vec<&Technician> = techs.iter().collect();
        assert_eq!(greedy_cover(&Demand::of(&j), &pool).unwrap().len(), 3);
        assert_eq!(min_cover(&Demand::of(&j), &pool), Some(vec![0, 1]));
    }

    #[test]
    fn shortfall_is_none() {
        let j = job(0, 10, 1, &[], vec![vec![3]]);
        let techs = [tech(0, &[1]), tech(1, &[1])];
        let pool: Vec<&Technician> = techs.iter().collect();
        assert_eq!(min_cover(&Demand::of(&j), &pool), None);
        assert_eq!(greedy_cover(&Demand::of(&j), &pool), None);
    }

    #[test]
    fn residual_subtracts_team() {
        let j = job(0, 10, 1, &[], vec![vec![2, 1]]);
        let t = [tech(0, &[2])];
        let r = Demand::residual(&j, &t);
        assert_eq!(r.max_need(), 1);
        let t = [tech(0, &[2]), tech(1, &[1])];
        assert!(Demand::residual(&j, &t).is_empty());
    }
}
