// SPDX-License-Identifier: Apache-2.0

//! Quaternion and rotation helpers shared by the kinematics and optimizer code.
//!
//! Quaternions are stored as nalgebra [`Quaternion`]s and exchanged with files
//! as `[w, x, y, z]` arrays. Conversions to rotation matrices normalize first,
//! and the matching backward passes differentiate through that normalization.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Quat = Quaternion<f64>;

pub fn identity_quat() -> Quat {
    Quat::new(1.0, 0.0, 0.0, 0.0)
}

pub fn quat_from_wxyz(q: [f64; 4]) -> Quat {
    Quat::new(q[0], q[1], q[2], q[3])
}

pub fn quat_to_wxyz(q: &Quat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

pub fn quat_dot(a: &Quat, b: &Quat) -> f64 {
    a.w * b.w + a.i * b.i + a.j * b.j + a.k * b.k
}

/// Rotation matrix of `q / |q|`.
pub fn quat_to_matrix(q: &Quat) -> Mat3 {
    let n = q.norm();
    let (w, x, y, z) = (q.w / n, q.i / n, q.j / n, q.k / n);
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Pulls `dL/dR` back to `dL/dq` for `R = quat_to_matrix(q)`.
pub fn quat_to_matrix_backward(q: &Quat, grad: &Mat3) -> Quat {
    let n = q.norm();
    let (w, x, y, z) = (q.w / n, q.i / n, q.j / n, q.k / n);
    let g = |r: usize, c: usize| grad[(r, c)];
    // dR/dw, dR/dx, dR/dy, dR/dz contracted with grad (all carry a factor 2).
    let dw =
        2.0 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) + x * g(2, 1));
    let dx = 2.0
        * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - 2.0 * x * g(1, 1) - w * g(1, 2)
            + z * g(2, 0)
            + w * g(2, 1)
            - 2.0 * x * g(2, 2));
    let dy = 2.0
        * (-2.0 * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) + x * g(1, 0) + z * g(1, 2)
            - w * g(2, 0)
            + z * g(2, 1)
            - 2.0 * y * g(2, 2));
    let dz = 2.0
        * (-2.0 * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) + w * g(1, 0) - 2.0 * z * g(1, 1)
            + y * g(1, 2)
            + x * g(2, 0)
            + y * g(2, 1));
    normalize_backward(&Quat::new(w, x, y, z), n, &Quat::new(dw, dx, dy, dz))
}

/// Gradient through `q -> q / |q|`: `(g - q̂ (q̂·g)) / |q|`.
fn normalize_backward(unit: &Quat, norm: f64, g: &Quat) -> Quat {
    let d = quat_dot(unit, g);
    Quat::new(
        (g.w - unit.w * d) / norm,
        (g.i - unit.i * d) / norm,
        (g.j - unit.j * d) / norm,
        (g.k - unit.k * d) / norm,
    )
}

/// `acos(x) / sqrt(1 - x²)` for `x ∈ [0, 1]`, continuous at `x = 1`.
fn acos_over_sin(x: f64) -> f64 {
    let e = 1.0 - x;
    if e < 1e-10 {
        1.0 + e / 3.0
    } else {
        x.acos() / (1.0 - x * x).sqrt()
    }
}

/// Angle of the relative rotation between two (not necessarily unit) quaternions.
pub fn geodesic_angle(a: &Quat, b: &Quat) -> f64 {
    let d = quat_dot(a, b) / (a.norm() * b.norm());
    2.0 * d.abs().min(1.0).acos()
}

/// `geodesic_angle(a, b)²` and its gradients with respect to `a` and `b`.
pub fn geodesic_sq_with_grad(a: &Quat, b: &Quat) -> (f64, Quat, Quat) {
    let (na, nb) = (a.norm(), b.norm());
    let (ua, ub) = (a / na, b / nb);
    let d = quat_dot(&ua, &ub);
    let x = d.abs().min(1.0);
    let theta = x.acos();
    let value = 4.0 * theta * theta;
    // d(4 acos(x)²)/dx = -8 acos(x)/sqrt(1-x²); dx/dd = sign(d).
    let dd = -8.0 * acos_over_sin(x) * d.signum();
    let ga = normalize_backward(&ua, na, &(ub * dd));
    let gb = normalize_backward(&ub, nb, &(ua * dd));
    (value, ga, gb)
}

/// Rotation angle of `q` (geodesic distance to the identity).
pub fn rotation_angle(q: &Quat) -> f64 {
    geodesic_angle(q, &identity_quat())
}

/// `Rz(z) · Ry(y) · Rx(x)`, angles in radians.
pub fn quat_from_euler_xyz(x: f64, y: f64, z: f64) -> Quat {
    let r = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), z)
        * UnitQuaternion::from_axis_angle(&Vector3::y_axis(), y)
        * UnitQuaternion::from_axis_angle(&Vector3::x_axis(), x);
    r.into_inner()
}

pub fn quat_from_axis_angle(axis: &Vec3, angle: f64) -> Quat {
    UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), angle).into_inner()
}

/// Spherical interpolation along the shorter arc.
pub fn slerp(a: &Quat, b: &Quat, t: f64) -> Quat {
    let ua = UnitQuaternion::new_normalize(*a);
    let mut ub = UnitQuaternion::new_normalize(*b);
    if quat_dot(ua.as_ref(), ub.as_ref()) < 0.0 {
        ub = UnitQuaternion::new_unchecked(-ub.into_inner());
    }
    ua.try_slerp(&ub, t, 1e-12).unwrap_or(ua).into_inner()
}

/// Scales the rotation of `q` down so its angle is at most `max_angle`.
pub fn clamp_rotation(q: &Quat, max_angle: f64) -> Quat {
    let u = UnitQuaternion::new_normalize(*q);
    match u.axis_angle() {
        Some((axis, angle)) if angle > max_angle => {
            UnitQuaternion::from_axis_angle(&axis, max_angle).into_inner()
        }
        _ => u.into_inner(),
    }
}

pub fn normalize_quat(q: &Quat) -> Quat {
    let n = q.norm();
    if n > 0.0 {
        q / n
    } else {
        identity_quat()
    }
}

/// Closest point on segment `ab` to `p`; a degenerate segment collapses to `a`.
pub fn closest_point_on_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> Vec3 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Exact at the endpoints, where the projection may round off the segment.
pub fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    (p - closest_point_on_segment(p, a, b))
        .norm()
        .min((p - a).norm())
        .min((p - b).norm())
}
