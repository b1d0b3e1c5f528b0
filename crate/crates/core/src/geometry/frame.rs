use serde::{Deserialize, Serialize};

use super::isometry::{Act, Isometry};
use super::point::{Geodesic, HBoundary, HPoint};
use crate::error::Result;

/// Side of an oriented geodesic, looking from `neg` toward `pos`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Position of a point relative to a framed geodesic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisCoords {
    /// Signed arclength along the geodesic from the frame anchor to the foot.
    pub s: f64,
    /// Distance from the point to the geodesic.
    pub depth: f64,
    /// `None` when the point lies on the geodesic.
    pub side: Option<Side>,
}

/// An isometry normalizing a geodesic to the imaginary axis, `neg ↦ 0`, `pos ↦ ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisFrame {
    pub geodesic: Geodesic,
    pub to_std: Isometry,
    pub from_std: Isometry,
}

impl AxisFrame {
    pub fn new(l: &Geodesic) -> Result<Self> {
        let l = Geodesic::new(l.neg, l.pos)?;
        let to_std = match (l.neg, l.pos) {
            (HBoundary::Real(a), HBoundary::Infinity) => Isometry::new(1.0, -a, 0.0, 1.0)?,
            (HBoundary::Infinity, HBoundary::Real(b)) => Isometry::new(0.0, -1.0, 1.0, -b)?,
            (HBoundary::Real(a), HBoundary::Real(b)) => {
                if a > b {
                    Isometry::normalized(1.0, -a, 1.0, -b)?
                } else {
                    Isometry::normalized(-1.0, a, 1.0, -b)?
                }
            }
            (HBoundary::Infinity, HBoundary::Infinity) => unreachable!("rejected by Geodesic::new"),
        };
        Ok(Self {
            geodesic: l,
            to_std,
            from_std: to_std.inverse(),
        })
    }

    /// Frame whose arclength origin is the foot of the perpendicular from `anchor`.
    pub fn anchored(l: &Geodesic, anchor: HPoint) -> Result<Self> {
        let raw = Self::new(l)?;
        let w = raw.to_std.act(anchor);
        let scale = Isometry::diag(w.abs().sqrt().recip());
        let to_std = scale * raw.to_std;
        Ok(Self {
            geodesic: raw.geodesic,
            to_std,
            from_std: to_std.inverse(),
        })
    }

    pub fn coords(&self, p: HPoint) -> AxisCoords {
        let w = self.to_std.act(p);
        let side = if w.x > 0.0 {
            Some(Side::Right)
        } else if w.x < 0.0 {
            Some(Side::Left)
        } else {
            None
        };
        AxisCoords {
            s: w.abs().ln(),
            depth: (w.x.abs() / w.y).asinh(),
            side,
        }
    }

    /// Arclength coordinate of the perpendicular foot of a boundary point
    /// that is not an endpoint of the geodesic.
    pub fn boundary_coord(&self, zeta: HBoundary) -> Option<(f64, Side)> {
        match self.to_std.act(zeta) {
            HBoundary::Real(r) if r != 0.0 && r.is_finite() => {
                let side = if r > 0.0 { Side::Right } else { Side::Left };
                Some((r.abs().ln(), side))
            }
            _ => None,
        }
    }

    /// The point of the geodesic at arclength `s` from the anchor.
    pub fn point_at(&self, s: f64) -> HPoint {
        self.from_std.act(HPoint::new_unchecked(0.0, s.exp()))
    }

    /// Endpoint of the perpendicular leaving the geodesic at `s` toward `side`.
    pub fn normal_endpoint(&self, s: f64, side: Side) -> HBoundary {
        self.from_std.act(HBoundary::Real(side.sign() * s.exp()))
    }
}
