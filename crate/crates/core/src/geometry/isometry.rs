use std::ops::Mul;

use serde::{Deserialize, Serialize};

use super::point::{Geodesic, HBoundary, HPoint, UnitTangent};
use crate::error::{domain, Result};

/// Entries below this magnitude are skipped when fixing the overall sign.
const SIGN_EPS: f64 = 1e-12;

/// An orientation-preserving isometry `z ↦ (az + b)/(cz + d)` with `ad − bc = 1`,
/// stored in canonical sign (the first entry of magnitude above `1e-12`, in
/// row-major order, is positive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsometryKind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Validates unit determinant (relative tolerance `1e-9`) and canonicalizes the sign.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return domain("non-finite matrix entry");
        }
        let det = a * d - b * c;
        let scale = (a * d).abs().max((b * c).abs()).max(1.0);
        if (det - 1.0).abs() > 1e-9 * scale {
            return domain(format!("determinant {det} is not 1"));
        }
        Ok(Self { a, b, c, d }.canonical())
    }

    /// Rescales an arbitrary matrix with positive determinant into `SL(2, R)`.
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return domain(format!(
                "matrix with determinant {det} is not orientation preserving"
            ));
        }
        let s = det.sqrt().recip();
        Ok(Self {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        }
        .canonical())
    }

    pub fn from_array(m: [f64; 4]) -> Result<Self> {
        Self::new(m[0], m[1], m[2], m[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// `z ↦ λ² z`, written as `diag(λ, 1/λ)`.
    pub fn diag(lambda: f64) -> Self {
        Self {
            a: lambda,
            b: 0.0,
            c: 0.0,
            d: lambda.recip(),
        }
        .canonical()
    }

    /// Translation by hyperbolic length `t` along the imaginary axis toward `∞`.
    pub fn translation_up(t: f64) -> Self {
        Self::diag((0.5 * t).exp())
    }

    /// Rotation about `i` carrying the boundary point at chart angle 0 (`∞`)
    /// to the boundary point at chart angle `phi`.
    pub fn rotation_about_i(phi: f64) -> Self {
        let (s, c) = (0.5 * phi).sin_cos();
        Self {
            a: c,
            b: s,
            c: -s,
            d: c,
        }
        .canonical()
    }

    /// `z ↦ y z + x`, the isometry carrying `i` to `p`.
    pub fn from_origin_to(p: HPoint) -> Self {
        let r = p.y.sqrt();
        Self {
            a: r,
            b: p.x / r,
            c: 0.0,
            d: r.recip(),
        }
    }

    /// The isometry `R` with `R(i) = u.base` and `R(∞) = u.forward`.
    pub fn ray_frame(u: &UnitTangent) -> Self {
        Self::from_origin_to(u.base) * Self::rotation_about_i(u.angle())
    }

    pub fn canonical(self) -> Self {
        let lead = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|v| v.abs() > SIGN_EPS)
            .unwrap_or(1.0);
        if lead < 0.0 {
            self.negated()
        } else {
            self
        }
    }

    pub fn negated(self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
        .canonical()
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    pub fn kind(&self) -> IsometryKind {
        let t = self.trace().abs();
        if (t - 2.0).abs() <= 1e-9 {
            if self.approx_eq(&Self::IDENTITY, 1e-9) {
                IsometryKind::Identity
            } else {
                IsometryKind::Parabolic
            }
        } else if t < 2.0 {
            IsometryKind::Elliptic
        } else {
            IsometryKind::Hyperbolic
        }
    }

    /// Translation length `2 arccosh(|tr|/2)`; zero for non-hyperbolic elements.
    pub fn translation_length(&self) -> f64 {
        let t = 0.5 * self.trace().abs();
        if t <= 1.0 {
            0.0
        } else {
            2.0 * t.acosh()
        }
    }

    /// Equality modulo sign with tolerance relative to the larger norm.
    pub fn approx_eq(&self, other: &Isometry, rel_tol: f64) -> bool {
        let scale = self.norm().max(other.norm());
        let tol = rel_tol * scale;
        let close = |s: f64| {
            (self.a - s * other.a).abs() <= tol
                && (self.b - s * other.b).abs() <= tol
                && (self.c - s * other.c).abs() <= tol
                && (self.d - s * other.d).abs() <= tol
        };
        close(1.0) || close(-1.0)
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut acc = Self::IDENTITY;
        let mut sq = base;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * sq;
            }
            sq = sq * sq;
            k >>= 1;
        }
        acc
    }

    /// Fixed points on the boundary of a hyperbolic element, as `(repelling, attracting)`.
    pub fn fixed_points(&self) -> Result<(HBoundary, HBoundary)> {
        if self.kind() != IsometryKind::Hyperbolic {
            return domain("fixed points requested for a non-hyperbolic isometry");
        }
        // Work with positive trace so that "attracting" is read off consistently.
        let m = if self.trace() < 0.0 {
            self.negated()
        } else {
            *self
        };
        let (a, b, c, d) = (m.a, m.b, m.c, m.d);
        if c.abs() <= 1e-300 {
            let finite = HBoundary::Real(b / (d - a));
            return Ok(if a.abs() > d.abs() {
                (finite, HBoundary::Infinity)
            } else {
                (HBoundary::Infinity, finite)
            });
        }
        // c z^2 + (d - a) z - b = 0; the attracting point has derivative 1/(cz+d)^2 < 1.
        let tr = a + d;
        let disc = (tr * tr - 4.0).sqrt();
        let z1 = (a - d + disc) / (2.0 * c);
        let z2 = (a - d - disc) / (2.0 * c);
        let deriv = |z: f64| (c * z + d).powi(2).recip();
        Ok(if deriv(z1) < deriv(z2) {
            (HBoundary::Real(z2), HBoundary::Real(z1))
        } else {
            (HBoundary::Real(z1), HBoundary::Real(z2))
        })
    }
}

impl Mul for Isometry {
    type Output = Isometry;

    fn mul(self, r: Isometry) -> Isometry {
        Isometry {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
        .canonical()
    }
}

/// The Möbius action on points, boundary points, tangents and geodesics.
pub trait Act<T> {
    fn act(&self, target: T) -> T;
}

impl Act<HPoint> for Isometry {
    fn act(&self, p: HPoint) -> HPoint {
        // (az + b)/(cz + d) with the imaginary part written as y/|cz + d|^2,
        // which keeps full relative precision near the boundary.
        let nr = self.a * p.x + self.b;
        let ni = self.a * p.y;
        let dr = self.c * p.x + self.d;
        let di = self.c * p.y;
        let den = dr * dr + di * di;
        HPoint {
            x: (nr * dr + ni * di) / den,
            y: p.y * self.det() / den,
        }
    }
}

impl Act<HBoundary> for Isometry {
    fn act(&self, zeta: HBoundary) -> HBoundary {
        match zeta {
            HBoundary::Infinity => {
                if self.c == 0.0 {
                    HBoundary::Infinity
                } else {
                    HBoundary::Real(self.a / self.c)
                }
            }
            HBoundary::Real(r) => {
                let den = self.c * r + self.d;
                if den == 0.0 {
                    HBoundary::Infinity
                } else {
                    HBoundary::Real((self.a * r + self.b) / den)
                }
            }
        }
    }
}

impl Act<UnitTangent> for Isometry {
    fn act(&self, u: UnitTangent) -> UnitTangent {
        UnitTangent {
            base: self.act(u.base),
            forward: self.act(u.forward),
        }
    }
}

impl Act<Geodesic> for Isometry {
    fn act(&self, l: Geodesic) -> Geodesic {
        Geodesic {
            neg: self.act(l.neg),
            pos: self.act(l.pos),
        }
    }
}
