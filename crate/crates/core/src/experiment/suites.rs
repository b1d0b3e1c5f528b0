//! Seeded property suites for the geometry, the adjustment functions and the
//! reduction residual. Every suite draws from one generator, in a fixed order.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adjust::{eval_f1, eval_f1_limit, eval_f2, reduction_residual, NormalVector};
use crate::counting::collect_cosets;
use crate::error::{Error, Result};
use crate::geometry::limits::{busemann_truncated, visual_dist_truncated};
use crate::geometry::{
    busemann, dist, dist_to_geodesic, project, project_boundary, ray_point, visual_dist, Act,
    AxisFrame, Geodesic, HBoundary, HPoint, Side, UnitTangent,
};
use crate::group::{ConjClass, GroupSpec};

pub const SUITES: [&str; 10] = [
    "busemann",
    "visual",
    "oracle",
    "projection",
    "convergence",
    "busemann-approx",
    "regularity",
    "midpoint",
    "f1",
    "residual",
];

/// Truncation time of the limit oracles.
const ORACLE_T: f64 = 30.0;
/// Basepoint and target used by the residual suite.
const RESIDUAL_X: [f64; 2] = [0.2, 1.1];
const RESIDUAL_Y: [f64; 2] = [0.5, 0.8];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

/// Outcome of one property: a statistic compared with a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub statistic: f64,
    pub bound: f64,
    pub comparison: Comparison,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_case: Option<String>,
}

impl CheckResult {
    pub fn at_most(suite: &str, name: &str, statistic: f64, bound: f64, samples: usize) -> Self {
        Self {
            suite: suite.into(),
            name: name.into(),
            passed: statistic <= bound,
            statistic,
            bound,
            comparison: Comparison::AtMost,
            samples,
            worst_case: None,
        }
    }

    pub fn at_least(suite: &str, name: &str, statistic: f64, bound: f64, samples: usize) -> Self {
        Self {
            passed: statistic >= bound,
            comparison: Comparison::AtLeast,
            ..Self::at_most(suite, name, statistic, bound, samples)
        }
    }

    pub fn with_worst(mut self, worst: impl Into<String>) -> Self {
        self.worst_case = Some(worst.into());
        self
    }
}

/// Running maximum that remembers the sample it came from.
struct Worst {
    value: f64,
    case: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            case: String::new(),
        }
    }

    fn update(&mut self, value: f64, case: impl FnOnce() -> String) {
        // NaN must surface as a failure, never be skipped.
        if value > self.value || value.is_nan() && !self.value.is_nan() {
            self.value = value;
            self.case = case();
        }
    }

    fn check(self, suite: &str, name: &str, bound: f64, samples: usize) -> CheckResult {
        let stat = if self.value.is_nan() {
            f64::INFINITY
        } else {
            self.value
        };
        CheckResult::at_most(suite, name, stat, bound, samples).with_worst(self.case)
    }
}

/// Least-squares slope of `y` against `x`.
fn slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

fn point_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> HPoint {
    let r = rng.gen_range(0.0..radius);
    ray_point(HPoint::ORIGIN, boundary(rng), r)
}

fn point_near(rng: &mut ChaCha8Rng, p: HPoint, radius: f64) -> HPoint {
    let r = rng.gen_range(0.0..radius);
    ray_point(p, HBoundary::from_angle_at(p, rng.gen_range(0.0..TAU)), r)
}

fn boundary(rng: &mut ChaCha8Rng) -> HBoundary {
    HBoundary::from_angle(rng.gen_range(0.0..TAU))
}

fn side(rng: &mut ChaCha8Rng) -> Side {
    if rng.gen_bool(0.5) {
        Side::Left
    } else {
        Side::Right
    }
}

/// Geodesic with endpoints at least 0.2 apart in angle at `o`.
fn geodesic(rng: &mut ChaCha8Rng) -> Geodesic {
    loop {
        let a = rng.gen_range(0.0..TAU);
        let b = rng.gen_range(0.0..TAU);
        let gap = (a - b).abs().min(TAU - (a - b).abs());
        if gap > 0.2 {
            return Geodesic::new(HBoundary::from_angle(a), HBoundary::from_angle(b)).unwrap();
        }
    }
}

fn busemann_suite(rng: &mut ChaCha8Rng, n: usize) -> Vec<CheckResult> {
    let (mut anti, mut add, mut bound) = (Worst::new(), Worst::new(), Worst::new());
    for _ in 0..n {
        let zeta = boundary(rng);
        let x = point_in_disk(rng, 5.0);
        let y = point_in_disk(rng, 5.0);
        let z = point_in_disk(rng, 5.0);
        let case = || format!("zeta={zeta:?} x={x:?} y={y:?} z={z:?}");
        let bxy = busemann(zeta, x, y);
        anti.update((bxy + busemann(zeta, y, x)).abs(), case);
        add.update(
            (bxy - busemann(zeta, x, z) - busemann(zeta, z, y)).abs(),
            case,
        );
        bound.update(bxy.abs() - dist(x, y), case);
    }
    vec![
        anti.check("busemann", "antisymmetry", 1e-9, n),
        add.check("busemann", "cocycle", 1e-8, n),
        bound.check("busemann", "bounded-by-distance", 1e-9, n),
    ]
}

fn visual_suite(rng: &mut ChaCha8Rng, n: usize) -> Vec<CheckResult> {
    let (mut sym, mut change, mut zero) = (Worst::new(), Worst::new(), Worst::new());
    for _ in 0..n {
        let zeta = boundary(rng);
        let eta = boundary(rng);
        let x = point_in_disk(rng, 5.0);
        let y = point_in_disk(rng, 5.0);
        let case = || format!("zeta={zeta:?} eta={eta:?} x={x:?} y={y:?}");
        let dx = visual_dist(x, zeta, eta);
        sym.update((dx - visual_dist(x, eta, zeta)).abs(), case);
        if dx > 0.0 {
            let dy = visual_dist(y, zeta, eta);
            change.update((dx / dy).ln().abs() - dist(x, y), case);
        }
        zero.update(visual_dist(x, zeta, zeta), case);
    }
    vec![
        sym.check("visual", "symmetry", 1e-12, n),
        change.check("visual", "basepoint-change", 1e-9, n),
        zero.check("visual", "diagonal-zero", 1e-12, n),
    ]
}

fn oracle_suite(rng: &mut ChaCha8Rng, n: usize) -> Vec<CheckResult> {
    let (mut b, mut v) = (Worst::new(), Worst::new());
    for _ in 0..n {
        let zeta = boundary(rng);
        let eta = boundary(rng);
        let x = point_in_disk(rng, 5.0);
        let y = point_in_disk(rng, 5.0);
        b.update(
            (busemann(zeta, x, y) - busemann_truncated(zeta, x, y, ORACLE_T)).abs(),
            || format!("zeta={zeta:?} x={x:?} y={y:?}"),
        );
        v.update(
            (visual_dist(x, zeta, eta) - visual_dist_truncated(x, zeta, eta, ORACLE_T)).abs(),
            || format!("zeta={zeta:?} eta={eta:?} x={x:?}"),
        );
    }
    vec![
        b.check("oracle", "busemann-vs-truncated", 1e-6, n),
        v.check("oracle", "visual-vs-truncated", 1e-6, n),
    ]
}

/// `d(P x, P y) ≤ C e^{−d(x, L)} d(x, y)` for `d(x, y) ≤ 1`.
fn projection_suite(rng: &mut ChaCha8Rng, n: usize) -> Vec<CheckResult> {
    let mut c = Worst::new();
    for _ in 0..n {
        let l = geodesic(rng);
        let frame = AxisFrame::new(&l).unwrap();
        let s = rng.gen_range(-3.0..3.0);
        let depth = rng.gen_range(1.0..10.0);
        let x = ray_point(
            frame.point_at(s),
            frame.normal_endpoint(s, side(rng)),
            depth,
        );
        let y = point_near(rng, x, 1.0);
        let dxy = dist(x, y);
        if dxy < 1e-6 {
            continue;
        }
        let (px, _) = project(&l, x).unwrap();
        let (py, _) = project(&l, y).unwrap();
        c.update(dist(px, py) / ((-depth).exp() * dxy), || {
            format!("L={l:?} x={x:?} y={y:?}")
        });
    }
    vec![c.check("projection", "contraction-constant", 10.0, n)]
}

/// Points on one horocycle converge along rays to its center:
/// `d(x_T, y_T) ≤ C e^{−T} d(x, y)`.
fn convergence_suite(rng: &mut ChaCha8Rng, n: usize) -> Vec<CheckResult> {
    let mut c = Worst::new();
    let half_width = 2.0 * 0.5f64.sinh();
    for _ in 0..n {
        let zeta = boundary(rng);
        let x = point_in_disk(rng, 5.0);
        let frame = crate::geometry::Isometry::ray_frame(&UnitTangent::new(x, zeta));
        let u = rng.gen_range(-half_width..half_width);
        let y = frame.act(HPoint::new_unchecked(u, 1.0));
        let dxy = dist(x, y);
        if dxy < 1e-6 {
            continue;
        }
        let t = rng.gen_range(0.0..10.0);
        let d = dist(ray_point(x, zeta, t), ray_point(y, zeta, t));
        c.update(d / ((-t).exp() * dxy), || {
            format!("zeta={zeta:?} x={x:?} y={y:?} t={t}")
        });
    }
    vec![c.check("convergence", "same-endpoint-constant", 10.0, n)]
}

/// `|β(ζ, x, y) − (d(z, x) − d(z, y))| ≤ C e^{−d(z, x)}` for `z` on `[x, ζ)`
/// and `d(x, y) ≤ 1`.
fn busemann_approx_suite(rng: &mut ChaCha8Rng, n: usize) -> Vec<CheckResult> {
    let mut c = Worst::new();
    for _ in 0..n {
        let zeta = boundary(rng);
        let x = point_in_disk(rng, 5.0);
        let y = point_near(rng, x, 1.0);
        let r = rng.gen_range(0.0..15.0);
        let z = ray_point(x, zeta, r);
        let err = (busemann(zeta, x, y) - (dist(z, x) - dist(z, y))).abs();
        c.update(err * r.exp(), || {
            format!("zeta={zeta:?} x={x:?} y={y:?} r={r}")
        });
    }
    vec![c.check("busemann-approx", "approximation-constant", 10.0, n)]
}

/// Lipschitz in the interior variable, Hölder in the boundary variable.
fn regularity_suite(rng: &mut ChaCha8Rng, n: usize) -> Vec<CheckResult> {
    let mut lip = Worst::new();
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        let zeta = boundary(rng);
        let x = point_in_disk(rng, 5.0);
        let x2 = point_in_disk(rng, 5.0);
        let y = point_in_disk(rng, 5.0);
        lip.update(
            (busemann(zeta, x, y) - busemann(zeta, x2, y)).abs() - dist(x, x2),
            || format!("zeta={zeta:?} x={x:?} x'={x2:?} y={y:?}"),
        );
        // Boundary pair at visual distance 10^{-u} seen from o.
        let u = rng.gen_range(0.5..6.0);
        let vd = 10f64.powf(-u);
        let a = rng.gen_range(0.0..TAU);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let eta = HBoundary::from_angle(a + sign * 2.0 * vd.asin());
        let zeta = HBoundary::from_angle(a);
        let db = (busemann(zeta, x, y) - busemann(eta, x, y)).abs();
        let dv = visual_dist(HPoint::ORIGIN, zeta, eta);
        if db > 0.0 && dv > 0.0 {
            pts.push((dv.ln(), db.ln()));
        }
    }
    let holder = if pts.len() >= 2 {
        slope(&pts)
    } else {
        f64::NAN
    };
    vec![
        lip.check("regularity", "interior-lipschitz", 1e-9, n),
        CheckResult::at_least(
            "regularity",
            "boundary-holder-slope",
            holder,
            0.45,
            pts.len(),
        ),
    ]
}

/// Distance from the midpoint of `[P ζ, γ P ζ]` to the geodesic `(ζ, γζ)`.
fn midpoint_suite(rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<CheckResult>> {
    let g = GroupSpec::builtin("cyclic-demo")?;
    let c = ConjClass::from_word(&g, &[0])?;
    let gamma = c.gamma.mat;
    let mut worst = Worst::new();
    let mut taken = 0;
    while taken < n {
        let zeta = boundary(rng);
        if c.axis.has_endpoint(&zeta, 1e-6) || c.frame.boundary_coord(zeta).is_none() {
            continue;
        }
        taken += 1;
        let p = project_boundary(&c.axis, zeta)?;
        let s0 = c.frame.coords(p).s;
        let s1 = c.frame.coords(gamma.act(p)).s;
        let mid = c.frame.point_at(0.5 * (s0 + s1));
        let d = dist_to_geodesic(&Geodesic::new(zeta, gamma.act(zeta))?, mid)?;
        worst.update(d, || format!("zeta={zeta:?}"));
    }
    Ok(vec![worst.check("midpoint", "midpoint-distance", 10.0, n)])
}

fn f1_classes() -> Result<Vec<(String, ConjClass)>> {
    let cyc = GroupSpec::builtin("cyclic-demo")?;
    let bolza = GroupSpec::builtin("bolza")?;
    let mut out = vec![(
        "cyclic-demo [0]".to_string(),
        ConjClass::from_word(&cyc, &[0])?,
    )];
    for w in [vec![0], vec![0, 1], vec![0, 2, 5]] {
        out.push((format!("bolza {w:?}"), ConjClass::from_word(&bolza, &w)?));
    }
    Ok(out)
}

fn f1_suite(rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<CheckResult>> {
    let o = HPoint::ORIGIN;
    let classes = f1_classes()?;
    let (mut lim, mut inv, mut closed, mut f2) =
        (Worst::new(), Worst::new(), Worst::new(), Worst::new());
    for _ in 0..n {
        let (label, c) = &classes[rng.gen_range(0..classes.len())];
        let v = NormalVector::new(rng.gen_range(0.0..c.root_length), side(rng));
        let case = || format!("{label} v={v:?}");
        let f = eval_f1(c, &v, o)?;
        lim.update((f - eval_f1_limit(c, &v, ORACLE_T)).abs(), case);
        let k = if rng.gen_bool(0.5) { 1 } else { -1 };
        inv.update((f - eval_f1(c, &v.shifted(c, k), o)?).abs(), case);
        // In the hyperbolic plane F₁ is the constant 2 ln sinh(ℓ/2).
        let exact = 2.0 * (0.5 * c.translation_length).sinh().ln();
        closed.update((f - exact).abs(), case);

        let x = point_in_disk(rng, 3.0);
        let y = point_in_disk(rng, 3.0);
        let u = UnitTangent::from_angle(x, rng.gen_range(0.0..TAU));
        f2.update(eval_f2(&u, x, y)?.abs() - dist(x, y), || {
            format!("u={u:?} y={y:?}")
        });
    }
    // Convergence of the truncated limit: log error against t, per class.
    let mut decay = Worst::new();
    for (label, c) in &classes {
        let v = NormalVector::new(rng.gen_range(0.0..c.root_length), side(rng));
        let f = eval_f1(c, &v, o)?;
        let pts: Vec<(f64, f64)> = (1..=10)
            .map(|t| t as f64)
            .map(|t| (t, (eval_f1_limit(c, &v, t) - f).abs()))
            .filter(|p| p.1 > 0.0)
            .map(|(t, e)| (t, e.ln()))
            .collect();
        let s = if pts.len() >= 2 {
            slope(&pts)
        } else {
            f64::NAN
        };
        decay.update(s, || format!("{label} v={v:?}"));
    }
    Ok(vec![
        lim.check("f1", "f1-vs-limit", 1e-6, n),
        inv.check("f1", "gamma-invariance", 1e-9, n),
        closed.check("f1", "f1-closed-form", 1e-9, n),
        decay.check("f1", "limit-decay-slope", -0.9, classes.len()),
        f2.check("f1", "f2-bounded-by-distance", 1e-9, n),
    ])
}

/// Residual of the two-term expansion over every coset of the shortest bolza
/// class whose perpendicular depth lies in `[3, 10]`.
pub fn residual_suite() -> Result<Vec<CheckResult>> {
    let g = GroupSpec::builtin("bolza")?;
    let c = ConjClass::from_word(&g, &[0])?;
    let x = HPoint::new(RESIDUAL_X[0], RESIDUAL_X[1])?;
    let y = HPoint::new(RESIDUAL_Y[0], RESIDUAL_Y[1])?;
    let (lo, hi) = (3.0, 10.0);
    let radius = dist(HPoint::ORIGIN, c.anchor) + c.root_length + hi + 0.5;
    let table = collect_cosets(&g, &c, x, radius, 64)?;
    let mut pts = Vec::new();
    let mut deep = Worst::new();
    for m in &table.reps {
        let Ok(r) = reduction_residual(&c, m, x, y) else {
            continue;
        };
        if r.depth < lo || r.depth > hi {
            continue;
        }
        if r.residual != 0.0 {
            pts.push((r.depth, r.residual.abs().ln()));
        }
        if r.depth >= 8.0 {
            deep.update(r.residual.abs(), || {
                format!("g={:?} depth={}", m.to_array(), r.depth)
            });
        }
    }
    let s = if pts.len() >= 2 {
        slope(&pts)
    } else {
        f64::NAN
    };
    let n = pts.len();
    Ok(vec![
        CheckResult::at_most(
            "residual",
            "decay-slope",
            if s.is_nan() { f64::INFINITY } else { s },
            -0.4,
            n,
        ),
        deep.check("residual", "max-at-depth-8", 1e-2, n),
    ])
}

/// Runs `suite` (or every suite for `"all"`) with `samples` draws per suite.
pub fn run_suite(suite: &str, rng: &mut ChaCha8Rng, samples: usize) -> Result<Vec<CheckResult>> {
    if suite == "all" {
        let mut out = Vec::new();
        for s in SUITES {
            out.extend(run_suite(s, rng, samples)?);
        }
        return Ok(out);
    }
    Ok(match suite {
        "busemann" => busemann_suite(rng, samples),
        "visual" => visual_suite(rng, samples),
        "oracle" => oracle_suite(rng, samples),
        "projection" => projection_suite(rng, samples),
        "convergence" => convergence_suite(rng, samples),
        "busemann-approx" => busemann_approx_suite(rng, samples),
        "regularity" => regularity_suite(rng, samples),
        "midpoint" => midpoint_suite(rng, samples)?,
        "f1" => f1_suite(rng, samples)?,
        "residual" => residual_suite()?,
        other => {
            return Err(Error::Config(format!(
                "unknown suite {other:?}; expected one of {} or all",
                SUITES.join(", ")
            )))
        }
    })
}
