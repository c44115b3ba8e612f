//! Minimal 3-vector helpers; everything in the crate lives on S² ⊂ R³.

use crate::error::{invalid_argument, Result};

pub type Vec3 = [f64; 3];

pub const E1: Vec3 = [1.0, 0.0, 0.0];
pub const E2: Vec3 = [0.0, 1.0, 0.0];
pub const E3: Vec3 = [0.0, 0.0, 1.0];

/// Slack allowed on |x| = 1 for caller-supplied unit vectors.
pub const UNIT_TOL: f64 = 1e-12;

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn neg(a: &Vec3) -> Vec3 {
    [-a[0], -a[1], -a[2]]
}

pub fn normalize(a: &Vec3) -> Result<Vec3> {
    let n = norm(a);
    if !(n > 0.0) || !n.is_finite() {
        return Err(invalid_argument(format!("cannot normalize vector {a:?}")));
    }
    Ok(scale(a, 1.0 / n))
}

/// Checks |x| = 1 within [`UNIT_TOL`].
pub fn check_unit(x: &Vec3) -> Result<()> {
    let n = norm(x);
    if (n - 1.0).abs() > UNIT_TOL || !n.is_finite() {
        return Err(invalid_argument(format!(
            "expected a unit vector, got {x:?} with norm {n}"
        )));
    }
    Ok(())
}
