//! Capacity-aware minimum zone cover.
//!
//! A chosen zone serves at most `capacity` of its members; the same zone may
//! be chosen more than once, which is how oversized zones get split. The
//! exact solver is a branch and bound over UE-to-group assignments where each
//! group remembers which zones still contain all of its members.

use serde::Serialize;

use super::{CandidateZone, CoverageError};

/// Zones left after dominance pruning above which only greedy runs.
pub const EXACT_ZONE_LIMIT: usize = 20;
const NODE_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverGroup {
    /// Index into the zone list the cover was solved over.
    pub zone: usize,
    /// UEs this group serves, sorted.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverSolution {
    pub groups: Vec<CoverGroup>,
    /// True when the branch and bound ran to completion.
    pub exact: bool,
    /// The greedy cover, kept for the solution pool.
    pub greedy: Vec<CoverGroup>,
}

impl CoverSolution {
    pub fn size(&self) -> usize {
        self.groups.len()
    }
}

/// Largest number of UEs whose bandwidths fit in `b_max`, taking the
/// narrowest allocations first.
pub fn max_ues_per_uav(bandwidths: &[f64], b_max: f64) -> usize {
    let mut sorted = bandwidths.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut n = 0;
    for b in sorted {
        total += b;
        if total > b_max {
            break;
        }
        n += 1;
    }
    n
}

pub fn minimal_zone_cover(zones: &[CandidateZone], n_ues: usize, capacity: usize) -> Result<CoverSolution, CoverageError> {
    let members: Vec<Vec<usize>> = zones.iter().map(|z| z.members.clone()).collect();
    let slacks: Vec<f64> = zones.iter().map(|z| z.slack).collect();
    solve_cover(&members, &slacks, n_ues, capacity)
}

/// Solve over raw member sets. `slacks` only breaks greedy ties.
pub fn solve_cover(
    zone_members: &[Vec<usize>],
    slacks: &[f64],
    n_ues: usize,
    capacity: usize,
) -> Result<CoverSolution, CoverageError> {
    assert_eq!(zone_members.len(), slacks.len());
    let capacity = capacity.max(1);
    let greedy = greedy_cover(zone_members, slacks, n_ues, capacity)?;
    match exact_cover(zone_members, n_ues, capacity, greedy.len()) {
        Some((groups, complete)) => {
            let groups = groups.unwrap_or_else(|| greedy.clone());
            Ok(CoverSolution { groups, exact: complete, greedy })
        }
        None => Ok(CoverSolution { groups: greedy.clone(), exact: false, greedy }),
    }
}

fn zones_per_ue(zone_members: &[Vec<usize>], n_ues: usize) -> Vec<usize> {
    let mut count = vec![0; n_ues];
    for members in zone_members {
        for &i in members {
            count[i] += 1;
        }
    }
    count
}

/// Largest-uncovered-first greedy; ties by larger slack, then lower index.
pub fn greedy_cover(
    zone_members: &[Vec<usize>],
    slacks: &[f64],
    n_ues: usize,
    capacity: usize,
) -> Result<Vec<CoverGroup>, CoverageError> {
    let popularity = zones_per_ue(zone_members, n_ues);
    let missing: Vec<usize> = (0..n_ues).filter(|&i| popularity[i] == 0).collect();
    if !missing.is_empty() {
        return Err(CoverageError::Uncoverable(missing));
    }
    let capacity = capacity.max(1);
    let mut covered = vec![false; n_ues];
    let mut remaining = n_ues;
    let mut groups = Vec::new();
    while remaining > 0 {
        let mut best: Option<(usize, usize)> = None;
        for (z, members) in zone_members.iter().enumerate() {
            let gain = members.iter().filter(|&&i| !covered[i]).count().min(capacity);
            let better = match best {
                None => gain > 0,
                Some((bz, bg)) => gain > bg || (gain == bg && slacks[z] > slacks[bz]),
            };
            if better {
                best = Some((z, gain));
            }
        }
        let (z, _) = best.expect("an uncovered UE always has a zone");
        let mut take: Vec<usize> = zone_members[z].iter().copied().filter(|&i| !covered[i]).collect();
        take.sort_by_key(|&i| (popularity[i], i));
        take.truncate(capacity);
        take.sort_unstable();
        for &i in &take {
            covered[i] = true;
        }
        remaining -= take.len();
        groups.push(CoverGroup { zone: z, members: take });
    }
    Ok(groups)
}

/// Zone indices whose member set is not a strict subset of (or a duplicate
/// of an earlier) zone.
fn undominated(zone_members: &[Vec<usize>]) -> Vec<usize> {
    let sets: Vec<Vec<usize>> = zone_members
        .iter()
        .map(|m| {
            let mut m = m.clone();
            m.sort_unstable();
            m.dedup();
            m
        })
        .collect();
    let subset = |a: &[usize], b: &[usize]| a.iter().all(|x| b.binary_search(x).is_ok());
    (0..sets.len())
        .filter(|&i| {
            !sets.iter().enumerate().any(|(j, other)| {
                j != i
                    && subset(&sets[i], other)
                    && (other.len() > sets[i].len() || j < i)
            })
        })
        .collect()
}

struct Search<'a> {
    order: Vec<usize>,
    zone_masks: &'a [u32],
    capacity: usize,
    lower_bound: usize,
    best_size: usize,
    best: Option<Vec<(u32, Vec<usize>)>>,
    groups: Vec<(u32, Vec<usize>)>,
    nodes: u64,
}

impl Search<'_> {
    fn run(&mut self, k: usize) {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET || self.best_size <= self.lower_bound {
            return;
        }
        if k == self.order.len() {
            if self.groups.len() < self.best_size {
                self.best_size = self.groups.len();
                self.best = Some(self.groups.clone());
            }
            return;
        }
        let ue = self.order[k];
        let mask = self.zone_masks[ue];
        for g in 0..self.groups.len() {
            let gmask = self.groups[g].0;
            if gmask & mask == 0 || self.groups[g].1.len() >= self.capacity {
                continue;
            }
            self.groups[g].0 = gmask & mask;
            self.groups[g].1.push(ue);
            self.run(k + 1);
            self.groups[g].1.pop();
            self.groups[g].0 = gmask;
        }
        if self.groups.len() + 1 < self.best_size {
            self.groups.push((mask, vec![ue]));
            self.run(k + 1);
            self.groups.pop();
        }
    }
}

/// Returns `None` when there are too many zones for the exact path.
/// Otherwise `(improved cover, completed)`; the cover is `None` when nothing
/// beats `incumbent`.
fn exact_cover(
    zone_members: &[Vec<usize>],
    n_ues: usize,
    capacity: usize,
    incumbent: usize,
) -> Option<(Option<Vec<CoverGroup>>, bool)> {
    let kept = undominated(zone_members);
    if kept.len() > EXACT_ZONE_LIMIT {
        return None;
    }
    let mut zone_masks = vec![0u32; n_ues];
    for (bit, &z) in kept.iter().enumerate() {
        for &i in &zone_members[z] {
            zone_masks[i] |= 1 << bit;
        }
    }
    let mut order: Vec<usize> = (0..n_ues).collect();
    order.sort_by_key(|&i| (zone_masks[i].count_ones(), i));
    let mut search = Search {
        order,
        zone_masks: &zone_masks,
        capacity,
        lower_bound: n_ues.div_ceil(capacity).max(usize::from(n_ues > 0)),
        best_size: incumbent,
        best: None,
        groups: Vec::new(),
        nodes: 0,
    };
    search.run(0);
    let complete = search.nodes <= NODE_BUDGET;
    let cover = search.best.map(|groups| {
        let mut out: Vec<CoverGroup> = groups
            .into_iter()
            .map(|(mask, mut members)| {
                members.sort_unstable();
                CoverGroup { zone: kept[mask.trailing_zeros() as usize], members }
            })
            .collect();
        out.sort_by(|a, b| a.members.cmp(&b.members));
        out
    });
    Some((cover, complete))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn covered(groups: &[CoverGroup], n: usize) -> bool {
        let mut seen = vec![0; n];
        for g in groups {
            for &i in &g.members {
                seen[i] += 1;
            }
        }
        seen.iter().all(|&c| c == 1)
    }

    #[test]
    fn singletons_need_one_zone_each() {
        let zones: Vec<Vec<usize>> = (0..5).map(|i| vec![i]).collect();
        let sol = solve_cover(&zones, &[0.0; 5], 5, 8).unwrap();
        assert_eq!(sol.size(), 5);
        assert!(sol.exact);
        assert!(covered(&sol.groups, 5));
    }

    #[test]
    fn one_big_zone() {
        let sol = solve_cover(&[vec![0, 1, 2, 3], vec![1, 2]], &[1.0, 2.0], 4, 8).unwrap();
        assert_eq!(sol.size(), 1);
        assert_eq!(sol.groups[0].members, vec![0, 1, 2, 3]);
    }

    #[test]
    fn capacity_forces_reuse_of_a_zone() {
        let all: Vec<usize> = (0..17).collect();
        let sol = solve_cover(&[all], &[1.0], 17, 8).unwrap();
        assert_eq!(sol.size(), 3);
        assert!(sol.groups.iter().all(|g| g.members.len() <= 8 && g.zone == 0));
        assert!(covered(&sol.groups, 17));
    }

    #[test]
    fn exact_beats_greedy_trap() {
        // greedy takes the big middle zone first and then needs two more
        let zones = vec![vec![0, 1, 2], vec![3, 4, 5], vec![1, 2, 3, 4]];
        let sol = solve_cover(&zones, &[0.0; 3], 6, 8).unwrap();
        assert_eq!(sol.greedy.len(), 3);
        assert_eq!(sol.size(), 2);
    }

    #[test]
    fn missing_ue_is_uncoverable() {
        let err = solve_cover(&[vec![0, 1]], &[0.0], 3, 8).unwrap_err();
        assert_eq!(err, CoverageError::Uncoverable(vec![2]));
    }

    #[test]
    fn max_ues_per_uav_counts_prefix() {
        assert_eq!(max_ues_per_uav(&[20e6; 20], 160e6), 8);
        assert_eq!(max_ues_per_uav(&[100e6, 50e6, 20e6], 160e6), 2);
        assert_eq!(max_ues_per_uav(&[200e6], 160e6), 0);
    }
}
