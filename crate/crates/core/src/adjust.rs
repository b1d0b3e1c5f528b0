//! Adjustment functions on the unit normal bundle of an axis and on the unit
//! circle at a basepoint, the adjusted height of a coset, and the residual of
//! the two-term expansion of `d(gx, γ·gy)`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{
    busemann, dist, flow, project, Act, Geodesic, HPoint, Isometry, Side, UnitTangent,
};
use crate::group::ConjClass;

/// Depth below which the residual expansion is not expected to hold.
pub const ASYMPTOTIC_DEPTH: f64 = 2.0;

/// A unit vector perpendicular to the axis, at signed arclength `axis_param`
/// from `y₀`, pointing to `side`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalVector {
    pub axis_param: f64,
    pub side: Side,
}

impl NormalVector {
    pub fn new(axis_param: f64, side: Side) -> Self {
        Self { axis_param, side }
    }

    pub fn to_tangent(&self, c: &ConjClass) -> UnitTangent {
        UnitTangent::new(
            c.frame.point_at(self.axis_param),
            c.frame.normal_endpoint(self.axis_param, self.side),
        )
    }

    /// The same vector moved by `γ̂^n`.
    pub fn shifted(&self, c: &ConjClass, n: i64) -> Self {
        Self {
            axis_param: self.axis_param + n as f64 * c.root_length,
            side: self.side,
        }
    }

    /// Representative with `axis_param` in `[0, ℓ(γ̂))`.
    pub fn wrapped(&self, c: &ConjClass) -> Self {
        Self {
            axis_param: self.axis_param.rem_euclid(c.root_length),
            side: self.side,
        }
    }
}

/// `F₁(v) = β(v⁺, p, π(v)) + β(γv⁺, p, γπ(v))` with `p` the projection of
/// `o` onto the geodesic `(v⁺, γv⁺)`.
pub fn eval_f1(c: &ConjClass, v: &NormalVector, o: HPoint) -> Result<f64> {
    let u = v.to_tangent(c);
    let g = c.gamma.mat;
    let zeta = u.forward;
    let gzeta = g.act(zeta);
    let (p, _) = project(&Geodesic::new(zeta, gzeta)?, o)?;
    Ok(busemann(zeta, p, u.base) + busemann(gzeta, p, g.act(u.base)))
}

/// `d(π(v_t), γ·π(v_t)) − 2t` at `t = t_max`, the defining limit of `F₁`.
pub fn eval_f1_limit(c: &ConjClass, v: &NormalVector, t_max: f64) -> f64 {
    let p = flow(&v.to_tangent(c), t_max).base;
    dist(p, c.gamma.mat.act(p)) - 2.0 * t_max
}

/// `F₂(v) = β(v⁺, y, x)` for `v` based at `x`.
pub fn eval_f2(v: &UnitTangent, x: HPoint, y: HPoint) -> Result<f64> {
    if dist(v.base, x) > 1e-9 {
        return domain(format!("tangent based at {:?}, expected {x:?}", v.base));
    }
    Ok(busemann(v.forward, y, x))
}

pub type F1Fn = Arc<dyn Fn(&NormalVector) -> f64 + Send + Sync>;
pub type F2Fn = Arc<dyn Fn(&UnitTangent) -> f64 + Send + Sync>;

/// A pair `(F₁, F₂)` with bounds on their absolute values.
#[derive(Clone)]
pub struct AdjustmentPair {
    pub label: String,
    pub f1: F1Fn,
    pub f2: F2Fn,
    pub sup_f1: f64,
    pub sup_f2: f64,
}

impl fmt::Debug for AdjustmentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdjustmentPair")
            .field("label", &self.label)
            .field("sup_f1", &self.sup_f1)
            .field("sup_f2", &self.sup_f2)
            .finish()
    }
}

impl AdjustmentPair {
    pub fn zero() -> Self {
        Self::constant(0.0, 0.0)
    }

    pub fn constant(c1: f64, c2: f64) -> Self {
        Self {
            label: if c1 == 0.0 && c2 == 0.0 {
                "zero".into()
            } else {
                format!("constant({c1}, {c2})")
            },
            f1: Arc::new(move |_| c1),
            f2: Arc::new(move |_| c2),
            sup_f1: c1.abs(),
            sup_f2: c2.abs(),
        }
    }

    /// `(−F₁/2, −F₂/2)`, the pair that turns `d(gx, γ·gy)/2` into an adjusted height.
    pub fn theorem_a(c: Arc<ConjClass>, x: HPoint, y: HPoint) -> Result<Self> {
        let o = HPoint::ORIGIN;
        // Bound |F₁| from a dense sample; F₁ is continuous and periodic.
        let mut sup = 0.0f64;
        for k in 0..256 {
            for side in [Side::Left, Side::Right] {
                let v = NormalVector::new(k as f64 * c.root_length / 256.0, side);
                sup = sup.max(eval_f1(&c, &v, o)?.abs());
            }
        }
        let cc = c.clone();
        Ok(Self {
            label: "theorem-a".into(),
            f1: Arc::new(move |v| -0.5 * eval_f1(&cc, v, o).unwrap_or(f64::NAN)),
            f2: Arc::new(move |u| -0.5 * busemann(u.forward, y, x)),
            sup_f1: 0.5 * sup + 0.5,
            sup_f2: 0.5 * dist(x, y),
        })
    }

    /// Nonconstant trigonometric pair of amplitude `a`: `F₁` is periodic in the
    /// axis parameter with period `ℓ(γ̂)`, `F₂` is a function of the direction
    /// angle at the basepoint.
    pub fn smooth(root_length: f64, a: f64) -> Self {
        let w = TAU / root_length;
        Self {
            label: format!("smooth({a})"),
            f1: Arc::new(move |v| {
                let t = w * v.axis_param;
                a * t.cos() + 0.5 * a * v.side.sign() * t.sin()
            }),
            f2: Arc::new(move |u| {
                let th = u.angle();
                a * th.cos() + 0.5 * a * (2.0 * th).sin()
            }),
            sup_f1: 1.5 * a.abs(),
            sup_f2: 1.5 * a.abs(),
        }
    }
}

/// Perpendicular data of `g·x` relative to the axis.
#[derive(Clone, Copy, Debug)]
pub struct Perpendicular {
    pub gx: HPoint,
    pub depth: f64,
    /// `v₁(g)`: at the foot, pointing toward `g·x`.
    pub v1: NormalVector,
    /// `g⁻¹·v₂(g)`: at `x`, the pullback of the tangent at `g·x` toward the foot.
    pub v2_pulled: UnitTangent,
}

pub fn perpendicular(c: &ConjClass, g: &Isometry, x: HPoint) -> Result<Perpendicular> {
    let gx = g.act(x);
    let coords = c.frame.coords(gx);
    let side = match coords.side {
        Some(s) if coords.depth > 1e-12 => s,
        _ => return Err(Error::Degenerate(format!("g·x = {gx:?} lies on the axis"))),
    };
    let toward_axis = c.frame.normal_endpoint(coords.s, side.opposite());
    Ok(Perpendicular {
        gx,
        depth: coords.depth,
        v1: NormalVector::new(coords.s, side).wrapped(c),
        v2_pulled: UnitTangent::new(x, g.inverse().act(toward_axis)),
    })
}

/// `h(g) = d(gx, L) − F₁(v₁(g)) − F₂(g⁻¹·v₂(g))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdjustedHeight {
    pub d_to_axis: f64,
    pub f1_val: f64,
    pub f2_val: f64,
    pub h: f64,
}

pub fn adjusted_height(
    c: &ConjClass,
    pair: &AdjustmentPair,
    g: &Isometry,
    x: HPoint,
) -> Result<AdjustedHeight> {
    let p = perpendicular(c, g, x)?;
    let f1_val = (pair.f1)(&p.v1);
    let f2_val = (pair.f2)(&p.v2_pulled);
    Ok(AdjustedHeight {
        d_to_axis: p.depth,
        f1_val,
        f2_val,
        h: p.depth - f1_val - f2_val,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub residual: f64,
    pub depth: f64,
    /// `depth ≥ 2`; shallower samples carry no decay claim.
    pub asymptotic: bool,
}

/// `R(g) = d(gx, γ·gy) − 2d(gx, L) − F₁(v₁(g)) − F₂(g⁻¹·v₂(g))`.
pub fn reduction_residual(c: &ConjClass, g: &Isometry, x: HPoint, y: HPoint) -> Result<Residual> {
    let p = perpendicular(c, g, x)?;
    let gy = g.act(y);
    let f1 = eval_f1(c, &p.v1, HPoint::ORIGIN)?;
    let f2 = eval_f2(&p.v2_pulled, x, y)?;
    let residual = dist(p.gx, c.gamma.mat.act(gy)) - 2.0 * p.depth - f1 - f2;
    Ok(Residual {
        residual,
        depth: p.depth,
        asymptotic: p.depth >= ASYMPTOTIC_DEPTH,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tangent;
    use crate::group::GroupSpec;

    fn cyclic_class() -> ConjClass {
        let g = GroupSpec::builtin("cyclic-demo").unwrap();
        ConjClass::from_word(&g, &[0]).unwrap()
    }

    #[test]
    fn f1_is_periodic_and_side_symmetric() {
        let c = cyclic_class();
        let o = HPoint::ORIGIN;
        for k in 0..10 {
            let s = 0.37 * k as f64 - 1.0;
            let v = NormalVector::new(s, Side::Right);
            let a = eval_f1(&c, &v, o).unwrap();
            let b = eval_f1(&c, &v.shifted(&c, 3), o).unwrap();
            assert!((a - b).abs() < 1e-9);
            let l = eval_f1(&c, &NormalVector::new(s, Side::Left), o).unwrap();
            assert!((a - l).abs() < 1e-9);
        }
    }

    #[test]
    fn f1_matches_its_limit() {
        let c = cyclic_class();
        let v = NormalVector::new(0.0, Side::Right);
        let exact = eval_f1(&c, &v, HPoint::ORIGIN).unwrap();
        let lim = eval_f1_limit(&c, &v, 30.0);
        assert!((exact - lim).abs() < 1e-6, "{exact} {lim}");
        // In constant curvature the value is 2 ln sinh(ℓ/2).
        assert!((exact - 2.0 * 1f64.sinh().ln()).abs() < 1e-9);
    }

    #[test]
    fn f2_examples() {
        let x = HPoint::new(0.3, 0.9).unwrap();
        let y = HPoint::new(-0.5, 2.0).unwrap();
        let u = UnitTangent::from_angle(x, 1.3);
        assert_eq!(eval_f2(&u, x, x).unwrap(), 0.0);
        let toward = tangent(x, y).unwrap();
        assert!((eval_f2(&toward, x, y).unwrap() + dist(x, y)).abs() < 1e-12);
        let away = toward.reversed();
        assert!((eval_f2(&away, x, y).unwrap() - dist(x, y)).abs() < 1e-9);
        assert!(eval_f2(&UnitTangent::from_angle(y, 0.2), x, y).is_err());
    }

    #[test]
    fn height_with_zero_and_constant_pairs() {
        let c = cyclic_class();
        let x = HPoint::new(1.0, 1.0).unwrap();
        let g = Isometry::diag(1f64.exp()).pow(2);
        let h0 = adjusted_height(&c, &AdjustmentPair::zero(), &g, x).unwrap();
        assert!((h0.h - 1f64.asinh()).abs() < 1e-12);
        let hc = adjusted_height(&c, &AdjustmentPair::constant(0.25, -0.5), &g, x).unwrap();
        assert_eq!(hc.h, h0.d_to_axis - 0.25 + 0.5);
    }

    #[test]
    fn point_on_axis_is_degenerate() {
        let c = cyclic_class();
        let r = adjusted_height(
            &c,
            &AdjustmentPair::zero(),
            &Isometry::IDENTITY,
            HPoint::ORIGIN,
        );
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn residual_small_far_from_axis() {
        let c = cyclic_class();
        // x at depth 10 on the perpendicular through i.
        let x = HPoint::new(10f64.tanh(), 10f64.cosh().recip()).unwrap();
        let r = reduction_residual(&c, &Isometry::IDENTITY, x, x).unwrap();
        assert!((r.depth - 10.0).abs() < 1e-9);
        assert!(r.residual.abs() < 1e-3, "{r:?}");
        let g = c.root_pow(1);
        let r2 = reduction_residual(&c, &g, x, x).unwrap();
        assert!((r.residual - r2.residual).abs() < 1e-9);
    }
}
