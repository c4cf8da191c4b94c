//! Enumeration of maximal candidate zones.
//!
//! Feasibility is hereditary (a subset of a feasible member set is feasible),
//! so maximal feasible sets are enumerated by extending known maximal sets
//! one outside element at a time. The search runs per connected
//! component of the pairwise-overlap graph. Components above
//! [`EXACT_COMPONENT_LIMIT`] fall back to a pairwise-seeded greedy growth.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::channel::Point3;

use super::{CandidateZone, CoverageModel, WitnessOutcome};

pub const EXACT_COMPONENT_LIMIT: usize = 25;

pub fn enumerate_zones(model: &CoverageModel) -> Vec<CandidateZone> {
    enumerate_zones_with_limit(model, EXACT_COMPONENT_LIMIT)
}

pub fn enumerate_zones_with_limit(model: &CoverageModel, exact_limit: usize) -> Vec<CandidateZone> {
    let n = model.len();
    let adjacency = pairwise_adjacency(model);
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for component in components(n, &adjacency) {
        if component.len() == 1 || model.feasible_point(&component, None).is_some() {
            sets.push(component);
        } else if component.len() <= exact_limit.min(31) {
            sets.extend(maximal_sets_exact(model, &component, &adjacency));
        } else {
            sets.extend(maximal_sets_greedy(model, &component, &adjacency));
        }
    }

    let mut zones: Vec<CandidateZone> = sets
        .par_iter()
        .filter_map(|members| finalize(model, members, &adjacency))
        .collect();
    zones.sort_by(|a, b| a.members.cmp(&b.members));
    zones.dedup_by(|a, b| a.members == b.members);
    let dominated: Vec<bool> = (0..zones.len())
        .map(|i| {
            zones.iter().enumerate().any(|(j, other)| {
                j != i && other.members.len() > zones[i].members.len() && is_subset(&zones[i].members, &other.members)
            })
        })
        .collect();
    zones.into_iter().zip(dominated).filter(|(_, d)| !d).map(|(z, _)| z).collect()
}

fn is_subset(small: &[usize], large: &[usize]) -> bool {
    small.iter().all(|x| large.binary_search(x).is_ok())
}

/// Slack-maximising witness, then absorb every UE of the same component
/// whose region also contains it so the member list is maximal for the witness.
fn finalize(model: &CoverageModel, members: &[usize], adjacency: &[Vec<bool>]) -> Option<CandidateZone> {
    let mut zone = model.zone(members)?;
    let first = zone.members[0];
    let extra: Vec<usize> = (0..model.len())
        .filter(|&j| (j == first || adjacency[first][j]) && zone.members.binary_search(&j).is_err())
        .filter(|&j| model.covers(j, zone.witness))
        .collect();
    if !extra.is_empty() {
        let mut grown = zone.members.clone();
        grown.extend(extra);
        grown.sort_unstable();
        let slack = -model.max_deficit(&grown, zone.witness);
        zone = match model.witness_from(&grown, Some(zone.witness)) {
            WitnessOutcome::Feasible { point, slack: s } if s >= slack => {
                CandidateZone { members: grown, witness: point, slack: s }
            }
            _ => CandidateZone { members: grown, witness: zone.witness, slack },
        };
    }
    Some(zone)
}

fn pairwise_adjacency(model: &CoverageModel) -> Vec<Vec<bool>> {
    let n = model.len();
    let rows: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j <= i {
                        return false;
                    }
                    let gap = (model.center(i) - model.center(j)).norm();
                    gap <= model.radius(i) + model.radius(j) && model.feasible_point(&[i, j], None).is_some()
                })
                .collect()
        })
        .collect();
    let mut adjacency = rows;
    for i in 0..n {
        for j in 0..i {
            adjacency[i][j] = adjacency[j][i];
        }
    }
    adjacency
}

fn components(n: usize, adjacency: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for (u, &adjacent) in adjacency[v].iter().enumerate() {
                if adjacent && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Memoised feasibility over member bitmasks local to one component.
struct MaskOracle<'a> {
    model: &'a CoverageModel,
    component: &'a [usize],
    neighbours: Vec<u32>,
    memo: HashMap<u32, Option<Point3>>,
}

impl MaskOracle<'_> {
    fn members(&self, mask: u32) -> Vec<usize> {
        (0..self.component.len()).filter(|b| mask & (1 << b) != 0).map(|b| self.component[b]).collect()
    }

    fn witness(&mut self, mask: u32) -> Option<Point3> {
        if let Some(hit) = self.memo.get(&mask) {
            return *hit;
        }
        let members = self.members(mask);
        let point = self.model.feasible_point(&members, None);
        self.memo.insert(mask, point);
        point
    }

    /// Infeasible subset of the infeasible `mask`: the members whose deficit is
    /// within a small tolerance of the worst at the minimax point.
    fn core(&mut self, mask: u32) -> u32 {
        let members = self.members(mask);
        let WitnessOutcome::Infeasible { best, deficit } = self.model.zone_witness(&members) else {
            return mask;
        };
        let tol = 1e-6 * (1.0 + deficit.abs());
        let core = (0..self.component.len())
            .filter(|&b| mask & (1 << b) != 0)
            .filter(|&b| self.model.deficit(self.component[b], best) >= deficit - tol)
            .fold(0u32, |m, b| m | (1 << b));
        if core != 0 && core != mask && self.witness(core).is_none() {
            core
        } else {
            mask
        }
    }

    /// Feasibility of `base | bit`, where `base` is known feasible.
    fn extends(&mut self, base: u32, bit: usize) -> bool {
        let mask = base | (1 << bit);
        if let Some(hit) = self.memo.get(&mask) {
            return hit.is_some();
        }
        if base & !self.neighbours[bit] != 0 {
            self.memo.insert(mask, None);
            return false;
        }
        if base != 0 {
            if let Some(Some(p)) = self.memo.get(&base) {
                let p = *p;
                if self.model.covers(self.component[bit], p) {
                    self.memo.insert(mask, Some(p));
                    return true;
                }
            }
        }
        let members = self.members(mask);
        let start = (base != 0).then(|| self.memo.get(&base).copied().flatten()).flatten();
        let point = self.model.feasible_point(&members, start);
        self.memo.insert(mask, point);
        point.is_some()
    }
}

/// Every maximal feasible subset of `component`.
///
/// Starting from one maximal set, each found set `S` and outside element `v`
/// yield the maximal feasible subsets of `S + v` containing `v`, each extended
/// greedily to a maximal set of the whole component. This reaches every
/// maximal set, and the work grows with their number rather than with the
/// number of feasible subsets.
fn maximal_sets_exact(model: &CoverageModel, component: &[usize], adjacency: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let k = component.len();
    let neighbours: Vec<u32> = (0..k)
        .map(|a| (0..k).filter(|&b| b != a && adjacency[component[a]][component[b]]).fold(0u32, |m, b| m | (1 << b)))
        .collect();
    let mut oracle = MaskOracle { model, component, neighbours: neighbours.clone(), memo: HashMap::new() };
    let universe = filter_bits((1u32 << k) - 1, |b| oracle.witness(1 << b).is_some());
    if universe == 0 {
        return Vec::new();
    }
    let mut found = vec![extend_greedily(&mut oracle, 0, universe)];
    let mut seen: HashSet<u32> = found.iter().copied().collect();
    let mut next = 0;
    while next < found.len() {
        let set = found[next];
        next += 1;
        let mut outside = universe & !set;
        while outside != 0 {
            let v = outside.trailing_zeros() as usize;
            outside &= outside - 1;
            let base = 1u32 << v;
            let candidates = filter_bits(set & neighbours[v], |u| oracle.extends(base, u));
            for t in restricted_maximal(&mut oracle, base, candidates) {
                let m = extend_greedily(&mut oracle, t, universe);
                if seen.insert(m) {
                    found.push(m);
                }
            }
        }
    }
    found.sort_unstable();
    found.into_iter().map(|mask| oracle.members(mask)).collect()
}

/// Add elements of `universe` to the feasible set `base` in index order.
fn extend_greedily(oracle: &mut MaskOracle, mut base: u32, universe: u32) -> u32 {
    let mut rest = universe & !base;
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if base == 0 {
            if oracle.witness(1 << u).is_some() {
                base = 1 << u;
            }
        } else if oracle.extends(base, u) {
            base |= 1 << u;
        }
    }
    base
}

/// Maximal feasible subsets of `base | candidates` that contain `base`.
///
/// An infeasible set has an infeasible core: the members active at its
/// minimax point. Every feasible subset misses at least one core member, so
/// branching on which one to drop reaches every maximal subset.
fn restricted_maximal(oracle: &mut MaskOracle, base: u32, candidates: u32) -> Vec<u32> {
    let mut visited = HashSet::new();
    let mut leaves: Vec<u32> = Vec::new();
    let mut stack = vec![base | candidates];
    while let Some(set) = stack.pop() {
        if !visited.insert(set) {
            continue;
        }
        if oracle.witness(set).is_some() {
            leaves.push(set);
            continue;
        }
        let core = oracle.core(set) & !base;
        let mut bits = core;
        while bits != 0 {
            let c = bits.trailing_zeros();
            bits &= bits - 1;
            stack.push(set & !(1 << c));
        }
    }
    leaves.sort_unstable();
    leaves.dedup();
    let maximal: Vec<u32> =
        leaves.iter().copied().filter(|&a| !leaves.iter().any(|&b| b != a && a & b == a)).collect();
    maximal
}

fn filter_bits(mut bits: u32, mut keep: impl FnMut(usize) -> bool) -> u32 {
    let mut out = 0;
    while bits != 0 {
        let b = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        if keep(b) {
            out |= 1 << b;
        }
    }
    out
}

/// Grow a zone from every overlapping pair not yet sharing a zone, adding
/// the nearest compatible UEs first.
fn maximal_sets_greedy(model: &CoverageModel, component: &[usize], adjacency: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for (a, &i) in component.iter().enumerate() {
        for &j in &component[a + 1..] {
            if !adjacency[i][j] || sets.iter().any(|s| s.binary_search(&i).is_ok() && s.binary_search(&j).is_ok()) {
                continue;
            }
            let mut members = vec![i, j];
            let mut point = match model.feasible_point(&members, None) {
                Some(p) => p,
                None => continue,
            };
            let mid = (model.center(i) + model.center(j)) * 0.5;
            let mut order: Vec<usize> =
                component.iter().copied().filter(|&u| u != i && u != j && adjacency[i][u] && adjacency[j][u]).collect();
            order.sort_by(|&u, &v| {
                let du = (model.center(u) - mid).norm();
                let dv = (model.center(v) - mid).norm();
                du.total_cmp(&dv).then(u.cmp(&v))
            });
            for u in order {
                if !members.iter().all(|&m| adjacency[m][u]) {
                    continue;
                }
                members.push(u);
                if model.covers(u, point) {
                    continue;
                }
                match model.feasible_point(&members, Some(point)) {
                    Some(p) => point = p,
                    None => {
                        members.pop();
                    }
                }
            }
            members.sort_unstable();
            sets.push(members);
        }
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::{CoverageSphere, FeasibleBox};

    fn model(points: &[(f64, f64)], radius: f64) -> CoverageModel {
        let spheres: Vec<CoverageSphere> = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| CoverageSphere { ue_index: i, center: Point3::new(x, y, 0.0), radius })
            .collect();
        let bounds = FeasibleBox::new([-200.0, 200.0], [-200.0, 200.0], [1.0, 20.0]).unwrap();
        CoverageModel::new(&spheres, bounds, None)
    }

    #[test]
    fn coincident_ues_form_one_zone() {
        let m = model(&[(5.0, 5.0); 6], 10.0);
        let zones = enumerate_zones(&m);
        assert_eq!(zones.len(), 1);
        assert_eq!(zones[0].members, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn separated_clusters_do_not_share_zones() {
        let m = model(&[(-100.0, 0.0), (-95.0, 0.0), (100.0, 0.0), (104.0, 3.0)], 20.0);
        let zones = enumerate_zones(&m);
        assert_eq!(zones.len(), 2);
        for z in &zones {
            let left = z.members.iter().all(|&i| i < 2);
            let right = z.members.iter().all(|&i| i >= 2);
            assert!(left || right);
        }
    }

    #[test]
    fn chain_gives_overlapping_pairs() {
        // each neighbour pair overlaps, no triple does
        let m = model(&[(0.0, 0.0), (30.0, 0.0), (60.0, 0.0), (90.0, 0.0)], 16.0);
        let zones = enumerate_zones(&m);
        let members: Vec<Vec<usize>> = zones.iter().map(|z| z.members.clone()).collect();
        assert_eq!(members, vec![vec![0, 1], vec![1, 2], vec![2, 3]]);
        for z in &zones {
            assert!(z.slack >= 0.0);
            for &i in &z.members {
                assert!(m.covers(i, z.witness));
            }
        }
    }

    #[test]
    fn greedy_growth_matches_exact_on_a_chain() {
        let m = model(&[(0.0, 0.0), (30.0, 0.0), (60.0, 0.0), (90.0, 0.0), (95.0, 5.0)], 16.0);
        let exact = enumerate_zones_with_limit(&m, 25);
        let greedy = enumerate_zones_with_limit(&m, 2);
        let e: Vec<_> = exact.iter().map(|z| z.members.clone()).collect();
        let g: Vec<_> = greedy.iter().map(|z| z.members.clone()).collect();
        assert_eq!(e, g);
    }
}
