use serde::{Deserialize, Serialize};

use super::pose::dist2;
use crate::Real;

/// Axis-aligned rectangular support surface, fixed in the world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surface<T> {
    pub name: String,
    pub center: [T; 2],
    pub half_extents: [T; 2],
    /// Top height in meters.
    pub height: T,
    /// Radius of the `agent-at` disc around the center.
    pub radius: T,
}

impl<T: Real> Surface<T> {
    pub fn new(name: &str, center: [T; 2], half_extents: [T; 2], height: T, radius: T) -> Self {
        Surface {
            name: name.to_string(),
            center,
            half_extents,
            height,
            radius,
        }
    }

    /// Lower and upper corners after shrinking every side by `margin`.
    pub fn bounds(&self, margin: T) -> ([T; 2], [T; 2]) {
        let lo = [
            self.center[0] - self.half_extents[0] + margin,
            self.center[1] - self.half_extents[1] + margin,
        ];
        let hi = [
            self.center[0] + self.half_extents[0] - margin,
            self.center[1] + self.half_extents[1] - margin,
        ];
        (lo, hi)
    }

    pub fn contains(&self, p: [T; 2], margin: T) -> bool {
        let (lo, hi) = self.bounds(margin);
        p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1]
    }

    /// Closest point of the shrunk rectangle.
    pub fn project(&self, p: [T; 2], margin: T) -> [T; 2] {
        let (lo, hi) = self.bounds(margin);
        [clamp(p[0], lo[0], hi[0]), clamp(p[1], lo[1], hi[1])]
    }

    /// Distance from `p` to the rectangle (zero inside).
    pub fn distance(&self, p: [T; 2]) -> T {
        dist2(p, self.project(p, T::zero()))
    }

    /// Standing point `offset` outside the edge nearest to `from`, on the
    /// ray from the center through the closest boundary point.
    pub fn standing_point(&self, from: [T; 2], offset: T) -> [T; 2] {
        let (lo, hi) = self.bounds(T::zero());
        let b = if self.contains(from, T::zero()) {
            // Inside: push out through the closest side.
            let d = [from[0] - lo[0], hi[0] - from[0], from[1] - lo[1], hi[1] - from[1]];
            let k = (0..4).fold(0, |k, i| if d[i] < d[k] { i } else { k });
            match k {
                0 => [lo[0], from[1]],
                1 => [hi[0], from[1]],
                2 => [from[0], lo[1]],
                _ => [from[0], hi[1]],
            }
        } else {
            self.project(from, T::zero())
        };
        let dir = if b[0] <= lo[0] {
            [-T::one(), T::zero()]
        } else if b[0] >= hi[0] {
            [T::one(), T::zero()]
        } else if b[1] <= lo[1] {
            [T::zero(), -T::one()]
        } else {
            [T::zero(), T::one()]
        };
        // Corner regions get a diagonal normal.
        let corner = (b[0] <= lo[0] || b[0] >= hi[0]) && (b[1] <= lo[1] || b[1] >= hi[1]);
        if corner && !self.contains(from, T::zero()) {
            let v = [from[0] - b[0], from[1] - b[1]];
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            if n > T::zero() {
                return [b[0] + offset * v[0] / n, b[1] + offset * v[1] / n];
            }
        }
        [b[0] + offset * dir[0], b[1] + offset * dir[1]]
    }

    /// Closest point to `query` inside the rectangle shrunk by `margin` that
    /// keeps at least `clearance` from every point of `occupied`.
    ///
    /// Exact: the minimizer is the unconstrained projection, a radial
    /// projection onto a clearance circle or an edge, or a vertex of the free
    /// region. All candidates are enumerated and the nearest feasible one is
    /// returned, ties broken by coordinates.
    pub fn closest_free_point(
        &self,
        query: [T; 2],
        occupied: &[[T; 2]],
        clearance: T,
        margin: T,
    ) -> Option<[T; 2]> {
        let (lo, hi) = self.bounds(margin);
        if lo[0] > hi[0] || lo[1] > hi[1] {
            return None;
        }
        let corners = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
        let edges: Vec<([T; 2], [T; 2])> = (0..4).map(|i| (corners[i], corners[(i + 1) % 4])).collect();

        let mut cand: Vec<[T; 2]> = Vec::new();
        cand.push(self.project(query, margin));
        cand.extend_from_slice(&corners);
        for &(a, b) in &edges {
            cand.push(project_segment(query, a, b));
        }
        for (i, c) in occupied.iter().enumerate() {
            let v = [query[0] - c[0], query[1] - c[1]];
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            if n > T::epsilon() {
                cand.push([c[0] + clearance * v[0] / n, c[1] + clearance * v[1] / n]);
            } else {
                for k in 0..16 {
                    let a = T::TAU() * T::lit(k as f64 / 16.0);
                    cand.push([c[0] + clearance * a.cos(), c[1] + clearance * a.sin()]);
                }
            }
            for &(a, b) in &edges {
                cand.extend(circle_segment(*c, clearance, a, b));
            }
            for d in &occupied[i + 1..] {
                cand.extend(circle_circle(*c, *d, clearance));
            }
        }

        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(16.0));
        let feasible = |p: &[T; 2]| {
            p[0] >= lo[0] - tol
                && p[0] <= hi[0] + tol
                && p[1] >= lo[1] - tol
                && p[1] <= hi[1] + tol
                && occupied.iter().all(|c| dist2(*p, *c) >= clearance - tol)
        };
        cand.into_iter()
            .filter(feasible)
            .map(|p| [clamp(p[0], lo[0], hi[0]), clamp(p[1], lo[1], hi[1])])
            .min_by(|a, b| {
                let da = dist2(*a, query);
                let db = dist2(*b, query);
                da.partial_cmp(&db)
                    .unwrap()
                    .then(a[0].partial_cmp(&b[0]).unwrap())
                    .then(a[1].partial_cmp(&b[1]).unwrap())
            })
    }
}

fn clamp<T: Real>(v: T, lo: T, hi: T) -> T {
    v.max(lo).min(hi)
}

fn project_segment<T: Real>(p: [T; 2], a: [T; 2], b: [T; 2]) -> [T; 2] {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 <= T::zero() {
        return a;
    }
    let s = clamp(((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2, T::zero(), T::one());
    [a[0] + s * d[0], a[1] + s * d[1]]
}

fn circle_segment<T: Real>(c: [T; 2], r: T, a: [T; 2], b: [T; 2]) -> Vec<[T; 2]> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let f = [a[0] - c[0], a[1] - c[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    if qa <= T::zero() {
        return Vec::new();
    }
    let qb = T::lit(2.0) * (f[0] * d[0] + f[1] * d[1]);
    let qc = f[0] * f[0] + f[1] * f[1] - r * r;
    let disc = qb * qb - T::lit(4.0) * qa * qc;
    if disc < T::zero() {
        return Vec::new();
    }
    let sq = disc.sqrt();
    [(-qb - sq) / (T::lit(2.0) * qa), (-qb + sq) / (T::lit(2.0) * qa)]
        .into_iter()
        .filter(|s| *s >= T::zero() && *s <= T::one())
        .map(|s| [a[0] + s * d[0], a[1] + s * d[1]])
        .collect()
}

fn circle_circle<T: Real>(c1: [T; 2], c2: [T; 2], r: T) -> Vec<[T; 2]> {
    let d = dist2(c1, c2);
    let two = T::lit(2.0);
    if d <= T::epsilon() || d > two * r {
        return Vec::new();
    }
    let m = [(c1[0] + c2[0]) / two, (c1[1] + c2[1]) / two];
    let h = (r * r - d * d / T::lit(4.0)).max(T::zero()).sqrt();
    let u = [(c2[0] - c1[0]) / d, (c2[1] - c1[1]) / d];
    vec![
        [m[0] - h * u[1], m[1] + h * u[0]],
        [m[0] + h * u[1], m[1] - h * u[0]],
    ]
}
