use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A point of the upper half-plane `{x + iy : y > 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    /// The fixed origin `o = i`. Disk-chart angles are measured from here.
    pub const ORIGIN: HPoint = HPoint { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return domain(format!("non-finite point ({x}, {y})"));
        }
        if y <= 0.0 {
            return domain(format!("point ({x}, {y}) is not in the upper half-plane"));
        }
        Ok(Self { x, y })
    }

    /// Builds a point without validation. Callers guarantee `y > 0`.
    pub const fn new_unchecked(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.y > 0.0
    }

    /// Euclidean modulus of `x + iy`.
    pub fn abs(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// A point of the ideal boundary: the extended real line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HBoundary {
    Real(f64),
    Infinity,
}

impl HBoundary {
    pub fn is_infinite(&self) -> bool {
        matches!(self, HBoundary::Infinity)
    }

    /// Angle in `[0, 2π)` of the boundary point in the disk chart centered at `p`.
    ///
    /// The chart is `z ↦ (z' − i)/(z' + i)` applied after the affine map
    /// `z' = (z − p.x)/p.y` that moves `p` to `i`; `∞` sits at angle 0.
    pub fn angle_at(&self, p: HPoint) -> f64 {
        match *self {
            HBoundary::Infinity => 0.0,
            HBoundary::Real(r) => {
                let r = (r - p.x) / p.y;
                normalize_angle((-2.0 * r).atan2(r * r - 1.0))
            }
        }
    }

    /// Inverse of [`HBoundary::angle_at`].
    pub fn from_angle_at(p: HPoint, theta: f64) -> Self {
        let theta = normalize_angle(theta);
        if theta == 0.0 {
            return HBoundary::Infinity;
        }
        if theta == PI {
            return HBoundary::Real(p.x);
        }
        let half = 0.5 * theta;
        let r = -half.cos() / half.sin();
        HBoundary::Real(p.x + p.y * r)
    }

    /// Angle in the disk chart centered at the origin `o = i`.
    pub fn angle(&self) -> f64 {
        self.angle_at(HPoint::ORIGIN)
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::from_angle_at(HPoint::ORIGIN, theta)
    }

    /// Equality with relative tolerance on finite values.
    pub fn approx_eq(&self, other: &HBoundary, rel_tol: f64) -> bool {
        match (*self, *other) {
            (HBoundary::Infinity, HBoundary::Infinity) => true,
            (HBoundary::Real(a), HBoundary::Real(b)) => {
                (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(1.0)
            }
            _ => false,
        }
    }
}

impl From<f64> for HBoundary {
    fn from(value: f64) -> Self {
        if value.is_infinite() {
            HBoundary::Infinity
        } else {
            HBoundary::Real(value)
        }
    }
}

/// Maps an angle into `[0, 2π)`, sending `-0.0` to `0.0`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t == 0.0 || t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed difference `a − b` wrapped into `(−π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// An oriented bi-infinite geodesic, given by its ideal endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub neg: HBoundary,
    pub pos: HBoundary,
}

impl Geodesic {
    pub fn new(neg: HBoundary, pos: HBoundary) -> Result<Self> {
        if let HBoundary::Real(v) = neg {
            if !v.is_finite() {
                return domain("non-finite geodesic endpoint");
            }
        }
        if let HBoundary::Real(v) = pos {
            if !v.is_finite() {
                return domain("non-finite geodesic endpoint");
            }
        }
        if neg == pos {
            return domain("geodesic endpoints coincide");
        }
        Ok(Self { neg, pos })
    }

    pub fn reversed(&self) -> Self {
        Self {
            neg: self.pos,
            pos: self.neg,
        }
    }

    pub fn has_endpoint(&self, zeta: &HBoundary, rel_tol: f64) -> bool {
        self.neg.approx_eq(zeta, rel_tol) || self.pos.approx_eq(zeta, rel_tol)
    }
}

/// A unit tangent vector, stored as its basepoint and forward ideal endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitTangent {
    pub base: HPoint,
    pub forward: HBoundary,
}

impl UnitTangent {
    pub fn new(base: HPoint, forward: HBoundary) -> Self {
        Self { base, forward }
    }

    /// Direction angle at the basepoint, in the disk chart centered there.
    pub fn angle(&self) -> f64 {
        self.forward.angle_at(self.base)
    }

    pub fn from_angle(base: HPoint, theta: f64) -> Self {
        Self {
            base,
            forward: HBoundary::from_angle_at(base, theta),
        }
    }

    /// The opposite vector `−u`.
    pub fn reversed(&self) -> Self {
        Self::from_angle(self.base, self.angle() + PI)
    }
}
