//! Reference implementations the integration tests compare against. They
//! share no code with the library beyond plain data types.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavplan::scenario::UserEquipment;
use uavplan::{BandwidthPolicy, FeasibleBox, Point3, Scenario};

/// Radio constants spelled out from the published tables, in their own units.
pub struct Radio {
    pub carrier_mhz: f64,
    pub tx_power_dbm: f64,
    pub noise_floor_dbm: f64,
    pub noise_bandwidth_mhz: f64,
    pub c1: f64,
    pub c2: f64,
    pub mu_los_db: f64,
    pub mu_nlos_db: f64,
}

pub const RADIO: Radio = Radio {
    carrier_mhz: 5250.0,
    tx_power_dbm: 20.0,
    noise_floor_dbm: -85.0,
    noise_bandwidth_mhz: 20.0,
    c1: 9.6,
    c2: 0.28,
    mu_los_db: 1.0,
    mu_nlos_db: 20.0,
};

impl Radio {
    pub fn tx_watts(&self) -> f64 {
        10f64.powf(self.tx_power_dbm / 10.0) / 1000.0
    }

    pub fn noise_w_per_hz(&self) -> f64 {
        10f64.powf(self.noise_floor_dbm / 10.0) / 1000.0 / (self.noise_bandwidth_mhz * 1e6)
    }

    pub fn elevation_deg(&self, ue: [f64; 3], uav: [f64; 3]) -> f64 {
        let horizontal = (uav[0] - ue[0]).hypot(uav[1] - ue[1]);
        (uav[2] - ue[2]).atan2(horizontal).to_degrees()
    }

    pub fn los(&self, theta_deg: f64) -> f64 {
        1.0 / (1.0 + self.c1 * (-self.c2 * (theta_deg - self.c1)).exp())
    }

    pub fn gain(&self, ue: [f64; 3], uav: [f64; 3]) -> f64 {
        let eps = self.los(self.elevation_deg(ue, uav));
        let d2 = (0..3).map(|k| (uav[k] - ue[k]).powi(2)).sum::<f64>();
        self.gain_at(d2.sqrt(), eps)
    }

    pub fn gain_at(&self, d: f64, eps: f64) -> f64 {
        let lambda = 299_792_458.0 / (self.carrier_mhz * 1e6);
        let free_space = (4.0 * std::f64::consts::PI * d / lambda).powi(2);
        let mu_l = 10f64.powf(self.mu_los_db / 10.0);
        let mu_n = 10f64.powf(self.mu_nlos_db / 10.0);
        1.0 / (free_space * (eps * mu_l + (1.0 - eps) * mu_n))
    }

    pub fn rate_for_gain(&self, gain: f64, bandwidth: f64) -> f64 {
        bandwidth * (1.0 + self.tx_watts() * gain / (self.noise_w_per_hz() * bandwidth)).log2()
    }

    pub fn rate(&self, ue: [f64; 3], uav: [f64; 3], bandwidth: f64) -> f64 {
        self.rate_for_gain(self.gain(ue, uav), bandwidth)
    }

    /// Distance where the rate at LoS probability `eps` falls to `demand`,
    /// by bisection on the decreasing rate curve.
    pub fn service_distance_bisect(&self, demand: f64, bandwidth: f64, eps: f64) -> f64 {
        let f = |d: f64| self.rate_for_gain(self.gain_at(d, eps), bandwidth) - demand;
        let (mut lo, mut hi) = (1e-6, 1.0);
        while f(hi) > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Elevation where the LoS probability reaches `eps`, by bisection.
    pub fn threshold_elevation_bisect(&self, eps: f64) -> f64 {
        let (mut lo, mut hi) = (-90.0, 90.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.los(mid) < eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn golden<F: FnMut(f64) -> f64>(lo: f64, hi: f64, iters: usize, mut f: F) -> f64 {
    if hi - lo <= 0.0 {
        return f(lo);
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.min(fd).min(f(lo)).min(f(hi));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
            best = best.min(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
            best = best.min(fd);
        }
    }
    best
}

/// Coverage regions (ball, optionally cut by an elevation cone) and the
/// UAV box, decided by nested golden-section search on the convex
/// worst-violation function.
pub struct RegionOracle {
    pub centers: Vec<[f64; 3]>,
    pub radii: Vec<f64>,
    /// Minimum elevation in degrees, if masked.
    pub min_elevation_deg: Option<f64>,
    pub bounds: [[f64; 2]; 3],
    memo: HashMap<u32, bool>,
}

impl RegionOracle {
    pub fn new(centers: Vec<[f64; 3]>, radii: Vec<f64>, min_elevation_deg: Option<f64>, bounds: [[f64; 2]; 3]) -> Self {
        Self { centers, radii, min_elevation_deg, bounds, memo: HashMap::new() }
    }

    /// Worst violation of point `p` over the members of `mask`, metres.
    pub fn violation(&self, mask: u32, p: [f64; 3]) -> f64 {
        let s = self.min_elevation_deg.map(|t| t.to_radians().sin());
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.centers.len() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let c = self.centers[i];
            let v = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
            let d = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            worst = worst.max(d - self.radii[i]);
            if let Some(s) = s {
                worst = worst.max(s * d - v[2]);
            }
        }
        worst
    }

    pub fn min_violation(&self, mask: u32) -> f64 {
        let [bx, by, bz] = self.bounds;
        golden(bx[0], bx[1], 60, |x| {
            golden(by[0], by[1], 60, |y| golden(bz[0], bz[1], 60, |z| self.violation(mask, [x, y, z])))
        })
    }

    /// Whether the members of `mask` share a point; memoised and pruned by
    /// checking every subset one smaller first.
    pub fn feasible(&mut self, mask: u32) -> bool {
        if mask == 0 {
            return true;
        }
        if let Some(&v) = self.memo.get(&mask) {
            return v;
        }
        let mut v = true;
        let mut rest = mask;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            if !self.feasible(mask ^ bit) {
                v = false;
                break;
            }
        }
        if v {
            v = self.min_violation(mask) <= 0.0;
        }
        self.memo.insert(mask, v);
        v
    }
}

/// Fewest blocks partitioning `0..n` with every block accepted by `ok`.
pub fn min_partition(n: usize, mut ok: impl FnMut(u32) -> bool) -> Option<usize> {
    let full = (1u32 << n) - 1;
    let mut best = vec![usize::MAX; (full + 1) as usize];
    best[0] = 0;
    let mut accepted: HashMap<u32, bool> = HashMap::new();
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // blocks containing the lowest element of `mask`
        let mut sub = rest;
        loop {
            let block = sub | low;
            let prev = best[(mask ^ block) as usize];
            if prev != usize::MAX && prev + 1 < best[mask as usize] {
                let good = *accepted.entry(block).or_insert_with(|| ok(block));
                if good {
                    best[mask as usize] = prev + 1;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    (best[full as usize] != usize::MAX).then_some(best[full as usize])
}

/// Smallest cover of `0..n` by `capacity`-limited pieces of the given sets,
/// found by trying every collection of sets in order of size.
pub fn exhaustive_cover_size(sets: &[Vec<usize>], n: usize, capacity: usize) -> Option<usize> {
    let masks: Vec<u32> = sets.iter().map(|s| s.iter().fold(0, |m, &i| m | 1 << i)).collect();
    let full = (1u32 << n) - 1;
    if capacity >= n {
        for k in 1..=masks.len() {
            if combinations(masks.len(), k).any(|c| c.iter().fold(0, |m, &z| m | masks[z]) == full) {
                return Some(k);
            }
        }
        return None;
    }
    // with a capacity a set may be used more than once, so enumerate
    // partitions of the UEs into pieces that fit inside some set instead
    min_partition(n, |block| block.count_ones() as usize <= capacity && masks.iter().any(|&m| block & !m == 0))
}

pub fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut done = k > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = idx.clone();
        let mut i = k;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

/// Ground UEs scattered over a square venue.
pub fn random_scenario(rng: &mut ChaCha8Rng, n: usize, side: f64, demands: &[f64]) -> Scenario {
    let ues = (0..n)
        .map(|_| UserEquipment {
            position: Point3::new(rng.random_range(0.0..=side), rng.random_range(0.0..=side), 0.0),
            demand_bps: demands[rng.random_range(0..demands.len())],
            bandwidth_hz: None,
        })
        .collect();
    Scenario {
        label: "random".into(),
        seed: rng.random(),
        venue: FeasibleBox { x: [0.0, side], y: [0.0, side], z: [10.0, 120.0] },
        ues,
        b_max_hz: 160e6,
        policy: BandwidthPolicy::DemandFit,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn arr(p: Point3) -> [f64; 3] {
    [p.x, p.y, p.z]
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}
