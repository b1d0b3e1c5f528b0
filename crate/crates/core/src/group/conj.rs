use serde::Serialize;

use super::enumerate::{enumerate_ball, GroupElement};
use super::spec::GroupSpec;
use crate::error::{domain, Result};
use crate::geometry::{dist, project, Act, AxisFrame, Geodesic, HPoint, Isometry, IsometryKind};

/// Default largest power tried when looking for a primitive root.
pub const DEFAULT_ROOT_BOUND: u32 = 12;
/// Axis coordinates this close to a window wall are snapped onto it, so every
/// member of a coset picks the same representative.
const WALL_EPS: f64 = 1e-9;

/// Conjugacy data of a hyperbolic element `γ = γ̂^k`.
#[derive(Clone, Debug, Serialize)]
pub struct ConjClass {
    pub gamma: GroupElement,
    pub primitive_root: GroupElement,
    pub power: u32,
    /// Oriented from the repelling to the attracting fixed point.
    pub axis: Geodesic,
    /// `ℓ(γ)`.
    pub translation_length: f64,
    /// `ℓ(γ̂)`, the period of every `⟨γ̂⟩`-invariant quantity along the axis.
    pub root_length: f64,
    /// `y₀ = P_L(o)`, the reference point on the axis.
    pub anchor: HPoint,
    /// Frame of the axis with arclength origin at `y₀`.
    pub frame: AxisFrame,
}

impl ConjClass {
    pub fn from_word(g: &GroupSpec, word: &[usize]) -> Result<Self> {
        conj_data(g, &GroupElement::from_word(g, word)?, DEFAULT_ROOT_BOUND)
    }

    /// `γ̂^n` as a matrix.
    pub fn root_pow(&self, n: i64) -> Isometry {
        self.primitive_root.mat.pow(n)
    }

    /// Signed arclength from `y₀` to the foot of `p` on the axis.
    pub fn axis_coordinate(&self, p: HPoint) -> f64 {
        self.frame.coords(p).s
    }
}

/// Axis, translation length and primitive root of a hyperbolic element.
///
/// Candidate `k`-th roots are the translations along the same axis by
/// `ℓ(γ)/k`; each is looked up in a small ball of the group.
pub fn conj_data(g: &GroupSpec, gamma: &GroupElement, root_bound: u32) -> Result<ConjClass> {
    match gamma.mat.kind() {
        IsometryKind::Hyperbolic => {}
        kind => {
            return domain(format!(
                "conjugacy data needs a hyperbolic element, got {kind:?}"
            ))
        }
    }
    let (rep, att) = gamma.mat.fixed_points()?;
    let axis = Geodesic::new(rep, att)?;
    let o = HPoint::ORIGIN;
    let (anchor, _) = project(&axis, o)?;
    let frame = AxisFrame::anchored(&axis, o)?;
    let ell = gamma.mat.translation_length();

    let candidate =
        |k: u32| frame.from_std * Isometry::translation_up(ell / k as f64) * frame.to_std;
    let mut root = gamma.clone();
    let mut power = 1;
    if root_bound >= 2 {
        let radius = dist(o, candidate(2).act(o)) + 1e-6;
        let cap = if g.prune_slack.is_some() {
            64
        } else {
            gamma.word.len().max(2)
        };
        let ball = enumerate_ball(g, o, o, radius, cap)?;
        'search: for k in (2..=root_bound).rev() {
            let r = candidate(k);
            for e in &ball.elements {
                if e.mat.approx_eq(&r, 1e-6) {
                    root = e.clone();
                    power = k;
                    break 'search;
                }
            }
        }
    }
    let root_length = root.mat.translation_length();
    Ok(ConjClass {
        gamma: gamma.clone(),
        primitive_root: root,
        power,
        axis,
        translation_length: ell,
        root_length,
        anchor,
        frame,
    })
}

/// The representative of `⟨γ̂⟩·g` whose `g·x` projects into `[y₀, γ̂·y₀)`.
#[derive(Clone, Debug, Serialize)]
pub struct CosetRep {
    pub g: GroupElement,
    /// Axis coordinate of `P_L(g·x)`, in `[0, ℓ(γ̂))`.
    pub axis_coordinate: f64,
    /// The `n` with `g = γ̂^n · input`.
    pub shift: i64,
}

/// Matrix-only canonicalization: returns `(n, γ̂^n·m, coordinate)`.
pub fn canonical_shift(c: &ConjClass, m: &Isometry, x: HPoint) -> (i64, Isometry, f64) {
    let ell = c.root_length;
    let s = c.axis_coordinate(m.act(x));
    let mut n = -((s + WALL_EPS) / ell).floor() as i64;
    let mut rep = c.root_pow(n) * *m;
    let mut s_rep = c.axis_coordinate(rep.act(x));
    for _ in 0..8 {
        if s_rep < -WALL_EPS {
            n += 1;
        } else if s_rep >= ell - WALL_EPS {
            n -= 1;
        } else {
            break;
        }
        rep = c.root_pow(n) * *m;
        s_rep = c.axis_coordinate(rep.act(x));
    }
    (n, rep, s_rep.max(0.0))
}

pub fn coset_canonicalize(
    g: &GroupSpec,
    c: &ConjClass,
    elem: &GroupElement,
    x: HPoint,
) -> CosetRep {
    let (n, mat, s) = canonical_shift(c, &elem.mat, x);
    let shift = c.primitive_root.pow(g, n);
    CosetRep {
        g: GroupElement {
            mat,
            word: g.concat_reduced(&shift.word, &elem.word),
        },
        axis_coordinate: s,
        shift: n,
    }
}
