use super::problem::{Anchor, ConstraintKind, NlpProblem};
use super::TrajoptError;
use crate::kinematics::Pose2;
use crate::Real;

/// Sparse row of a Jacobian: `(variable index, value)` pairs.
pub type SparseRow<T> = Vec<(usize, T)>;

/// Residuals and analytic Jacobians at one point.
///
/// Variables are stacked as `[x_0, y_0, φ_0, x_1, ...]`. The objective is
/// `Σ_t w_v ‖(x_t − x_{t−1})/Δt‖² + w_a ‖(x_t − 2x_{t−1} + x_{t−2})/Δt²‖²`
/// over all waypoints, with the fixed start (and optional previous pose)
/// closing the differences at the beginning and heading differences wrapped.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    pub objective: T,
    /// Least-squares form of the objective: `objective = Σ r²`.
    pub cost_residuals: Vec<T>,
    pub cost_jacobian: Vec<SparseRow<T>>,
    /// Gradient of the objective.
    pub gradient: Vec<T>,
    /// Equality residuals, zero when satisfied.
    pub eq: Vec<T>,
    pub eq_jacobian: Vec<SparseRow<T>>,
    /// Inequality residuals, `≤ 0` when satisfied.
    pub ineq: Vec<T>,
    pub ineq_jacobian: Vec<SparseRow<T>>,
}

impl<T: Real> Evaluation<T> {
    pub fn max_eq(&self) -> T {
        self.eq.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest inequality value clipped below at zero.
    pub fn max_ineq_violation(&self) -> T {
        self.ineq.iter().fold(T::zero(), |m, v| m.max(*v))
    }
}

pub fn to_flat<T: Real>(w: &[Pose2<T>]) -> Vec<T> {
    w.iter().flat_map(|p| [p.x, p.y, p.phi]).collect()
}

pub fn from_flat<T: Real>(z: &[T]) -> Vec<Pose2<T>> {
    z.chunks_exact(3).map(|c| Pose2::new(c[0], c[1], c[2])).collect()
}

/// Pose at waypoint `i`, where `-1` is the start and `-2` the previous pose.
fn pose_at<T: Real>(p: &NlpProblem<T>, z: &[T], i: isize) -> Option<[T; 3]> {
    match i {
        -2 => p.prev.map(|q| [q.x, q.y, q.phi]),
        -1 => Some([p.start.x, p.start.y, p.start.phi]),
        _ => {
            let k = 3 * i as usize;
            Some([z[k], z[k + 1], z[k + 2]])
        }
    }
}

fn diff<T: Real>(a: [T; 3], b: [T; 3], c: usize) -> T {
    let d = a[c] - b[c];
    if c == 2 {
        d.wrap_angle()
    } else {
        d
    }
}

/// Anchor point of waypoint `i` and its derivatives by `(x, y, φ)`.
pub(crate) fn anchor_point<T: Real>(p: &NlpProblem<T>, z: &[T], i: usize, anchor: Anchor) -> ([T; 2], [[T; 3]; 2]) {
    let (x, y, phi) = (z[3 * i], z[3 * i + 1], z[3 * i + 2]);
    match anchor {
        Anchor::Base => ([x, y], [[T::one(), T::zero(), T::zero()], [T::zero(), T::one(), T::zero()]]),
        Anchor::Gripper => {
            let (s, c) = phi.sin_cos();
            let [ox, oy] = p.gripper_offset;
            (
                [x + c * ox - s * oy, y + s * ox + c * oy],
                [
                    [T::one(), T::zero(), -s * ox - c * oy],
                    [T::zero(), T::one(), c * ox - s * oy],
                ],
            )
        }
    }
}

fn row<T: Real>(i: usize, d: [T; 3], scale: T) -> SparseRow<T> {
    (0..3).map(|c| (3 * i + c, d[c] * scale)).filter(|(_, v)| *v != T::zero()).collect()
}

/// Objective, constraint residuals and analytic Jacobians at `waypoints`.
pub fn evaluate<T: Real>(p: &NlpProblem<T>, waypoints: &[Pose2<T>]) -> Result<Evaluation<T>, TrajoptError> {
    if waypoints.len() != p.steps {
        return Err(TrajoptError::DimensionMismatch {
            expected: p.steps,
            got: waypoints.len(),
        });
    }
    Ok(evaluate_flat(p, &to_flat(waypoints)))
}

/// Objective alone, without residual vectors or derivatives.
pub fn objective<T: Real>(p: &NlpProblem<T>, waypoints: &[Pose2<T>]) -> Result<T, TrajoptError> {
    if waypoints.len() != p.steps {
        return Err(TrajoptError::DimensionMismatch {
            expected: p.steps,
            got: waypoints.len(),
        });
    }
    let z = to_flat(waypoints);
    let sv = p.params.w_v.sqrt() / p.params.dt;
    let sa = p.params.w_a.sqrt() / (p.params.dt * p.params.dt);
    let mut total = T::zero();
    for i in 0..p.steps as isize {
        let xi = pose_at(p, &z, i).expect("waypoint");
        let xm = pose_at(p, &z, i - 1).expect("start pose");
        let xmm = pose_at(p, &z, i - 2);
        for c in 0..3 {
            let v = sv * diff(xi, xm, c);
            total += v * v;
        }
        if let Some(xmm) = xmm {
            for c in 0..3 {
                let a = sa * (diff(xi, xm, c) - diff(xm, xmm, c));
                total += a * a;
            }
        }
    }
    Ok(total)
}

pub(crate) fn evaluate_flat<T: Real>(p: &NlpProblem<T>, z: &[T]) -> Evaluation<T> {
    let n = p.steps as isize;
    let sv = p.params.w_v.sqrt() / p.params.dt;
    let sa = p.params.w_a.sqrt() / (p.params.dt * p.params.dt);
    let mut res = Vec::with_capacity(6 * p.steps);
    let mut jac: Vec<SparseRow<T>> = Vec::with_capacity(6 * p.steps);

    for i in 0..n {
        let xi = pose_at(p, z, i).expect("waypoint");
        let xm = pose_at(p, z, i - 1).expect("start pose");
        for c in 0..3 {
            res.push(sv * diff(xi, xm, c));
            let mut r = vec![(3 * i as usize + c, sv)];
            if i >= 1 {
                r.push((3 * (i - 1) as usize + c, -sv));
            }
            jac.push(r);
        }
        if let Some(xmm) = pose_at(p, z, i - 2) {
            for c in 0..3 {
                res.push(sa * (diff(xi, xm, c) - diff(xm, xmm, c)));
                let mut r = vec![(3 * i as usize + c, sa)];
                if i >= 1 {
                    r.push((3 * (i - 1) as usize + c, -T::lit(2.0) * sa));
                }
                if i >= 2 {
                    r.push((3 * (i - 2) as usize + c, sa));
                }
                jac.push(r);
            }
        }
    }
    let objective = res.iter().map(|r| *r * *r).sum();
    let mut gradient = vec![T::zero(); z.len()];
    for (r, row) in res.iter().zip(&jac) {
        for &(j, v) in row {
            gradient[j] += T::lit(2.0) * *r * v;
        }
    }

    let mut eq = Vec::new();
    let mut eq_jacobian = Vec::new();
    let mut ineq = Vec::new();
    let mut ineq_jacobian = Vec::new();
    let two = T::lit(2.0);
    for con in &p.constraints {
        let (pt, d) = anchor_point(p, z, con.step, con.anchor);
        let i = con.step;
        match con.kind {
            ConstraintKind::Reach { target } => {
                for k in 0..2 {
                    eq.push(pt[k] - target[k]);
                    eq_jacobian.push(row(i, d[k], T::one()));
                }
            }
            ConstraintKind::Clearance { center, radius } => {
                let v = [pt[0] - center[0], pt[1] - center[1]];
                ineq.push(radius * radius - v[0] * v[0] - v[1] * v[1]);
                let g: [T; 3] = std::array::from_fn(|c| -two * (v[0] * d[0][c] + v[1] * d[1][c]));
                ineq_jacobian.push(row(i, g, T::one()));
            }
            ConstraintKind::Within { center, radius } => {
                let v = [pt[0] - center[0], pt[1] - center[1]];
                ineq.push(v[0] * v[0] + v[1] * v[1] - radius * radius);
                let g: [T; 3] = std::array::from_fn(|c| two * (v[0] * d[0][c] + v[1] * d[1][c]));
                ineq_jacobian.push(row(i, g, T::one()));
            }
            ConstraintKind::Inside { lo, hi } => {
                for k in 0..2 {
                    ineq.push(lo[k] - pt[k]);
                    ineq_jacobian.push(row(i, d[k], -T::one()));
                    ineq.push(pt[k] - hi[k]);
                    ineq_jacobian.push(row(i, d[k], T::one()));
                }
            }
        }
    }
    Evaluation {
        objective,
        cost_residuals: res,
        cost_jacobian: jac,
        gradient,
        eq,
        eq_jacobian,
        ineq,
        ineq_jacobian,
    }
}
