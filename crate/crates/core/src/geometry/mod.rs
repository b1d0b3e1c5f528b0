//! Closed-form geometry of the hyperbolic plane in the upper half-plane model.
//!
//! Everything here is a pure function of immutable value types. Closed forms
//! are obtained by moving the configuration with an isometry to a standard
//! position (geodesic on the imaginary axis, basepoint at `i`) and reading off
//! the answer there.

mod frame;
mod isometry;
pub mod limits;
mod point;

pub use frame::{AxisCoords, AxisFrame, Side};
pub use isometry::{Act, Isometry, IsometryKind};
pub use point::{angle_diff, normalize_angle, Geodesic, HBoundary, HPoint, UnitTangent};

use crate::error::{domain, Result};

/// Hyperbolic distance, `2 asinh(|p − q| / (2 sqrt(p.y q.y)))`.
pub fn dist(p: HPoint, q: HPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    2.0 * (dx.hypot(dy) / (2.0 * (p.y * q.y).sqrt())).asinh()
}

/// Busemann cocycle `β(ζ, p, q) = lim d(ζ_t, p) − d(ζ_t, q)`.
///
/// Horocycles at a real point `ξ` are the level sets of `y / |z − ξ|²`; at
/// `∞` they are the horizontal lines.
pub fn busemann(zeta: HBoundary, p: HPoint, q: HPoint) -> f64 {
    let base = (q.y / p.y).ln();
    match zeta {
        HBoundary::Infinity => base,
        HBoundary::Real(xi) => {
            let sp = (p.x - xi).powi(2) + p.y * p.y;
            let sq = (q.x - xi).powi(2) + q.y * q.y;
            base + (sp / sq).ln()
        }
    }
}

/// Gromov product `(ζ|η)_x` of two boundary points seen from `x`.
pub fn gromov_product(x: HPoint, zeta: HBoundary, eta: HBoundary) -> f64 {
    -visual_dist(x, zeta, eta).ln()
}

/// Visual distance `d_x(ζ, η) = e^{−(ζ|η)_x}`, equal to `sin(θ/2)` for the
/// angle `θ` between the two directions at `x`.
pub fn visual_dist(x: HPoint, zeta: HBoundary, eta: HBoundary) -> f64 {
    match (zeta, eta) {
        (HBoundary::Infinity, HBoundary::Infinity) => 0.0,
        (HBoundary::Infinity, HBoundary::Real(r)) | (HBoundary::Real(r), HBoundary::Infinity) => {
            x.y / (r - x.x).hypot(x.y)
        }
        (HBoundary::Real(r), HBoundary::Real(s)) => {
            if r == s {
                return 0.0;
            }
            (r - s).abs() * x.y / ((r - x.x).hypot(x.y) * (s - x.x).hypot(x.y))
        }
    }
}

/// Foot of the perpendicular from `p` to `l`, and the distance to `l`.
pub fn project(l: &Geodesic, p: HPoint) -> Result<(HPoint, f64)> {
    let frame = AxisFrame::new(l)?;
    let w = frame.to_std.act(p);
    let foot = frame.from_std.act(HPoint::new_unchecked(0.0, w.abs()));
    Ok((foot, (w.x.abs() / w.y).asinh()))
}

/// Continuous extension of the projection to boundary points off `l`.
pub fn project_boundary(l: &Geodesic, zeta: HBoundary) -> Result<HPoint> {
    if l.has_endpoint(&zeta, 1e-12) {
        return domain("boundary point is an endpoint of the geodesic");
    }
    let frame = AxisFrame::new(l)?;
    match frame.to_std.act(zeta) {
        HBoundary::Real(r) if r != 0.0 && r.is_finite() => {
            Ok(frame.from_std.act(HPoint::new_unchecked(0.0, r.abs())))
        }
        _ => domain("boundary point is an endpoint of the geodesic"),
    }
}

/// Target of a tangent: an interior point or an ideal point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Point(HPoint),
    Boundary(HBoundary),
}

impl From<HPoint> for Target {
    fn from(p: HPoint) -> Self {
        Target::Point(p)
    }
}

impl From<HBoundary> for Target {
    fn from(z: HBoundary) -> Self {
        Target::Boundary(z)
    }
}

/// Unit tangent at `p` pointing toward `target`.
pub fn tangent(p: HPoint, target: impl Into<Target>) -> Result<UnitTangent> {
    match target.into() {
        Target::Boundary(zeta) => Ok(UnitTangent::new(p, zeta)),
        Target::Point(q) => {
            if q == p {
                return domain("tangent toward the basepoint itself");
            }
            // Move p to i; the direction of q' there is arg((q' - i)/(q' + i)).
            let u = (q.x - p.x) / p.y;
            let v = q.y / p.y;
            let theta = (-2.0 * u).atan2(u * u + v * v - 1.0);
            Ok(UnitTangent::from_angle(p, theta))
        }
    }
}

/// Geodesic flow for time `t`; the forward endpoint is unchanged.
pub fn flow(u: &UnitTangent, t: f64) -> UnitTangent {
    if t == 0.0 {
        return *u;
    }
    let frame = Isometry::ray_frame(u);
    UnitTangent {
        base: frame.act(HPoint::new_unchecked(0.0, t.exp())),
        forward: u.forward,
    }
}

/// The point at distance `t` along the ray `[p, ζ)`.
pub fn ray_point(p: HPoint, zeta: HBoundary, t: f64) -> HPoint {
    flow(&UnitTangent::new(p, zeta), t).base
}

/// The geodesic through two distinct interior points, oriented from `p` to `q`.
pub fn geodesic_through(p: HPoint, q: HPoint) -> Result<Geodesic> {
    let fwd = tangent(p, q)?;
    let back = tangent(q, p)?;
    Geodesic::new(back.forward, fwd.forward)
}

/// Distance from a point to a geodesic.
pub fn dist_to_geodesic(l: &Geodesic, p: HPoint) -> Result<f64> {
    project(l, p).map(|(_, d)| d)
}
