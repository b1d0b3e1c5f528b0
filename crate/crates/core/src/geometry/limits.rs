//! Truncated-limit evaluations of the boundary quantities.
//!
//! These follow the limit definitions directly (points far out along rays and
//! plain distances) and share no code with the closed forms, so they serve as
//! oracles for them.

use super::point::{HBoundary, HPoint};
use super::{dist, ray_point};

/// `d(ζ_t, p) − d(ζ_t, q)` with `ζ_t` at distance `t` along `[p, ζ)`.
pub fn busemann_truncated(zeta: HBoundary, p: HPoint, q: HPoint, t: f64) -> f64 {
    let zt = ray_point(p, zeta, t);
    dist(zt, p) - dist(zt, q)
}

/// `exp(½ (d(ζ_t, η_t) − d(x, ζ_t) − d(x, η_t)))` along rays from `x`.
pub fn visual_dist_truncated(x: HPoint, zeta: HBoundary, eta: HBoundary, t: f64) -> f64 {
    let zt = ray_point(x, zeta, t);
    let et = ray_point(x, eta, t);
    (0.5 * (dist(zt, et) - dist(x, zt) - dist(x, et))).exp()
}
