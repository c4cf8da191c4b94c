//! Witness search: minimise the worst coverage deficit over a member set.
//!
//! Each member contributes a ball constraint `|p - c| - r <= 0` and, when an
//! elevation mask is active, a cone constraint `s |p - c| - (p_z - c_z) <= 0`
//! with `s = sin(theta_min)`. Their maximum `f` is convex, so the central-cut
//! ellipsoid method finds its minimum over the box. Every objective cut also
//! gives a lower bound `f(c) - sqrt(g' E g)` on that minimum, which lets the
//! decision version stop as soon as either sign is certain.

use crate::channel::Point3;

use super::FeasibleBox;

const MAX_ITERATIONS: usize = 4000;
/// Absolute optimality gap at which the search stops, metres.
const GAP: f64 = 1e-8;

pub(crate) struct DeficitFn<'a> {
    pub centers: &'a [Point3],
    pub radii: &'a [f64],
    /// Sine of the minimum elevation angle; `None` disables the cone terms.
    pub elevation_sine: Option<f64>,
}

/// Best point found, its deficit, and a proven lower bound on the minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Minimum {
    pub point: Point3,
    pub value: f64,
    pub lower_bound: f64,
}

impl DeficitFn<'_> {
    pub fn exact(&self, p: Point3) -> f64 {
        self.value_and_subgradient(p).0
    }

    fn value_and_subgradient(&self, p: Point3) -> (f64, Point3) {
        let mut worst = f64::NEG_INFINITY;
        let mut grad = Point3::default();
        for (c, r) in self.centers.iter().zip(self.radii) {
            let v = p - *c;
            let d = v.norm();
            let u = if d > 0.0 { v * (1.0 / d) } else { Point3::default() };
            if d - r > worst {
                worst = d - r;
                grad = u;
            }
            if let Some(s) = self.elevation_sine {
                let g = s * d - v.z;
                if g > worst {
                    worst = g;
                    grad = u * s - Point3::new(0.0, 0.0, 1.0);
                }
            }
        }
        (worst, grad)
    }

    /// Minimise over `bounds`. `start` is evaluated first; with
    /// `stop_on_sign` the search returns once the sign of the minimum is known.
    pub fn minimize(&self, bounds: &FeasibleBox, start: Option<Point3>, stop_on_sign: bool) -> Minimum {
        let lo = bounds.min_corner().to_array();
        let hi = bounds.max_corner().to_array();
        let free: Vec<usize> = (0..3).filter(|&d| hi[d] > lo[d]).collect();

        let mut best = Minimum { point: bounds.center(), value: f64::INFINITY, lower_bound: f64::NEG_INFINITY };
        let offer = |p: Point3, best: &mut Minimum| {
            let v = self.exact(p);
            if v < best.value {
                best.point = p;
                best.value = v;
            }
        };
        if let Some(s) = start {
            offer(bounds.clamp(s), &mut best);
            if stop_on_sign && best.value <= 0.0 {
                return best;
            }
        }
        offer(bounds.center(), &mut best);
        let n = free.len();
        if n == 0 {
            best.lower_bound = best.value;
            return best;
        }

        // bounding ball of the free sub-box as the initial ellipsoid, kept
        // in square-root form E = A A' for stability on thin ridges
        let mut c = bounds.center().to_array();
        let radius: f64 = (free.iter().map(|&d| (0.5 * (hi[d] - lo[d])).powi(2)).sum::<f64>() * 1.0001).sqrt();
        let mut a = [[0.0; 3]; 3];
        for (k, row) in a.iter_mut().enumerate().take(n) {
            row[k] = radius;
        }
        let nf = n as f64;
        let scale = if n > 1 { nf / (nf * nf - 1.0).sqrt() } else { 0.5 };
        let squeeze = if n > 1 { 1.0 - ((nf - 1.0) / (nf + 1.0)).sqrt() } else { 0.0 };

        for _ in 0..MAX_ITERATIONS {
            let mut g = [0.0; 3];
            let mut objective_cut = None;
            if let Some(k) = free.iter().position(|&d| c[d] > hi[d] || c[d] < lo[d]) {
                g[k] = if c[free[k]] > hi[free[k]] { 1.0 } else { -1.0 };
            } else {
                let p = Point3::from_array(c);
                let (v, sub) = self.value_and_subgradient(p);
                if v < best.value {
                    best.point = p;
                    best.value = v;
                }
                let sub = sub.to_array();
                for (k, &d) in free.iter().enumerate() {
                    g[k] = sub[d];
                }
                objective_cut = Some(v);
            }

            // h = A' g, width = |h| = sqrt(g' E g)
            let mut h = [0.0; 3];
            for j in 0..n {
                h[j] = (0..n).map(|i| a[i][j] * g[i]).sum();
            }
            let width = (0..n).map(|j| h[j] * h[j]).sum::<f64>().sqrt();
            if let Some(fc) = objective_cut {
                best.lower_bound = best.lower_bound.max(fc - width);
            }
            if !(width > 0.0) {
                break;
            }
            if stop_on_sign && (best.value <= 0.0 || best.lower_bound > 0.0) {
                break;
            }
            if best.value - best.lower_bound <= GAP {
                break;
            }
            for v in h.iter_mut().take(n) {
                *v /= width;
            }
            let mut ah = [0.0; 3];
            for i in 0..n {
                ah[i] = (0..n).map(|j| a[i][j] * h[j]).sum();
            }
            for (k, &d) in free.iter().enumerate() {
                c[d] -= ah[k] / (nf + 1.0);
            }
            // A <- scale * A (I - squeeze h h'); for a segment, halve it
            for i in 0..n {
                for j in 0..n {
                    a[i][j] = scale * (a[i][j] - squeeze * ah[i] * h[j]);
                }
            }
        }
        best.lower_bound = best.lower_bound.min(best.value);
        best
    }
}
