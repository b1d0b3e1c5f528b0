//! Orbit, conjugacy and adjusted counts, and exponential growth fits.
//!
//! Every experiment enumerates once at the largest radius it needs, evaluates
//! the counted quantity on each element, and reads all thresholds of the grid
//! off the same values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjust::{adjusted_height, AdjustmentPair};
use crate::error::{Error, Result};
use crate::geometry::{dist, Act, HPoint, Isometry};
use crate::group::{
    canonical_shift, enumerate_ball, Ball, Certificate, ConjClass, DedupIndex, GroupSpec,
    BOUNDARY_EPS,
};

/// Fits ignore grid points with fewer counts than this.
pub const MIN_FIT_COUNT: u64 = 30;
/// Allowed gap between fitted and expected slope before a fit is flagged.
pub const SLOPE_FLAG: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    Orbit,
    Conj,
    Adjusted,
}

/// Where a series came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub group: String,
    pub x: HPoint,
    pub y: HPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_word: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    /// Radius of the enumerated ball.
    pub radius: f64,
    pub word_cap: usize,
    pub exhausted: bool,
    /// Elements visited by the enumeration, pruning scaffold included.
    pub visited: usize,
    /// Cosets skipped because `g·x` fell on the axis.
    #[serde(default)]
    pub degenerate: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    pub kind: CountKind,
    pub t_grid: Vec<f64>,
    pub n: Vec<u64>,
    pub complete: Vec<bool>,
    pub meta: SeriesMeta,
}

impl CountSeries {
    pub fn all_complete(&self) -> bool {
        self.complete.iter().all(|&c| c)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,N,complete\n");
        for ((t, n), c) in self.t_grid.iter().zip(&self.n).zip(&self.complete) {
            out.push_str(&format!("{t},{n},{c}\n"));
        }
        out
    }

    /// Count at the grid point equal to `t`, if present.
    pub fn at(&self, t: f64) -> Option<u64> {
        self.t_grid
            .iter()
            .position(|&s| (s - t).abs() < 1e-9)
            .map(|i| self.n[i])
    }
}

/// `lo, lo + step, …` up to `hi` inclusive (within a small tolerance).
pub fn t_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!("bad grid [{lo}, {hi}] step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

fn check_grid(grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Config("empty T grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Config(
            "T grid must be finite, non-negative and increasing".into(),
        ));
    }
    Ok(*grid.last().unwrap())
}

/// Counts and certificates for each threshold from `(value, word length)` pairs.
fn tabulate(
    values: &[(f64, usize)],
    grid: &[f64],
    word_cap: usize,
    exhausted: bool,
) -> (Vec<u64>, Vec<bool>) {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.0).collect();
    sorted.sort_by(f64::total_cmp);
    let n = grid
        .iter()
        .map(|&t| sorted.partition_point(|&v| v <= t + BOUNDARY_EPS) as u64)
        .collect();
    let complete = grid
        .iter()
        .map(|&t| Certificate::from_values(values.iter().copied(), t, word_cap, exhausted).complete)
        .collect();
    (n, complete)
}

/// `N(T) = #{g : d(x, g·y) ≤ T}` for each `T` of the grid.
pub fn count_orbit(
    g: &GroupSpec,
    x: HPoint,
    y: HPoint,
    grid: &[f64],
    word_cap: usize,
) -> Result<CountSeries> {
    let t_max = check_grid(grid)?;
    let ball = enumerate_ball(g, x, y, t_max, word_cap)?;
    let values: Vec<(f64, usize)> = ball
        .dists
        .iter()
        .zip(&ball.elements)
        .map(|(&d, e)| (d, e.word.len()))
        .collect();
    let (n, complete) = tabulate(&values, grid, word_cap, ball.exhausted);
    Ok(CountSeries {
        kind: CountKind::Orbit,
        t_grid: grid.to_vec(),
        n,
        complete,
        meta: SeriesMeta {
            group: g.name.clone(),
            x,
            y,
            class_word: None,
            pair: None,
            radius: t_max,
            word_cap,
            exhausted: ball.exhausted,
            visited: ball.visited,
            degenerate: 0,
        },
    })
}

/// One canonical representative per `⟨γ̂⟩`-coset met by the ball, with the
/// shortest word length among the ball elements in that coset.
pub struct CosetTable {
    pub reps: Vec<Isometry>,
    pub min_len: Vec<usize>,
    pub ball: Ball,
}

/// Cosets `⟨γ̂⟩·g` of elements with `d(o, g·x) ≤ radius`.
pub fn collect_cosets(
    g: &GroupSpec,
    c: &ConjClass,
    x: HPoint,
    radius: f64,
    word_cap: usize,
) -> Result<CosetTable> {
    let ball = enumerate_ball(g, HPoint::ORIGIN, x, radius, word_cap)?;
    let reps: Vec<Isometry> = ball
        .elements
        .par_iter()
        .map(|e| canonical_shift(c, &e.mat, x).1)
        .collect();
    let mut index = DedupIndex::new();
    let mut min_len: Vec<usize> = Vec::new();
    for (rep, e) in reps.into_iter().zip(&ball.elements) {
        let (i, fresh) = index.insert(rep);
        if fresh {
            min_len.push(e.word.len());
        } else {
            min_len[i] = min_len[i].min(e.word.len());
        }
    }
    let reps = (0..index.len()).map(|i| *index.get(i)).collect();
    Ok(CosetTable {
        reps,
        min_len,
        ball,
    })
}

/// Largest distance from `L` of a point `p` with `d(p, γ·p) ≤ s`.
fn depth_bound(ell: f64, s: f64) -> f64 {
    ((0.5 * s).sinh() / (0.5 * ell).sinh()).max(1.0).acosh()
}

/// Radius about `o` containing `g·x` for every canonical `g` with
/// `d(gx, γ·gy) ≤ t`.
pub fn conj_radius(c: &ConjClass, x: HPoint, y: HPoint, t: f64) -> f64 {
    let o = HPoint::ORIGIN;
    dist(o, c.anchor) + c.root_length + depth_bound(c.translation_length, t + dist(x, y)) + 1e-6
}

/// Counts cosets by an arbitrary `⟨γ̂⟩`-invariant value of the canonical rep.
/// `radius` must contain `g·x` for every canonical rep with value at most the
/// top of the grid.
pub fn count_cosets_by<F>(
    g: &GroupSpec,
    c: &ConjClass,
    x: HPoint,
    radius: f64,
    grid: &[f64],
    word_cap: usize,
    value: F,
) -> Result<(Vec<u64>, Vec<bool>, CosetTable, usize)>
where
    F: Fn(&Isometry) -> Option<f64> + Sync,
{
    check_grid(grid)?;
    let table = collect_cosets(g, c, x, radius, word_cap)?;
    let vals: Vec<Option<f64>> = table.reps.par_iter().map(&value).collect();
    let degenerate = vals.iter().filter(|v| v.is_none()).count();
    let values: Vec<(f64, usize)> = vals
        .into_iter()
        .zip(&table.min_len)
        .filter_map(|(v, &l)| v.map(|v| (v, l)))
        .collect();
    let (n, complete) = tabulate(&values, grid, word_cap, table.ball.exhausted);
    Ok((n, complete, table, degenerate))
}

#[allow(clippy::too_many_arguments)]
fn coset_series(
    kind: CountKind,
    g: &GroupSpec,
    c: &ConjClass,
    x: HPoint,
    y: HPoint,
    pair: Option<String>,
    radius: f64,
    grid: &[f64],
    word_cap: usize,
    value: impl Fn(&Isometry) -> Option<f64> + Sync,
) -> Result<CountSeries> {
    let (n, complete, table, degenerate) = count_cosets_by(g, c, x, radius, grid, word_cap, value)?;
    Ok(CountSeries {
        kind,
        t_grid: grid.to_vec(),
        n,
        complete,
        meta: SeriesMeta {
            group: g.name.clone(),
            x,
            y,
            class_word: Some(c.gamma.word.clone()),
            pair,
            radius,
            word_cap,
            exhausted: table.ball.exhausted,
            visited: table.ball.visited,
            degenerate,
        },
    })
}

/// `#{⟨γ̂⟩·g : d(gx, γ·gy) ≤ T}`, which equals `#(B_T(x) ∩ Conj_γ·y)`.
pub fn count_conj(
    g: &GroupSpec,
    c: &ConjClass,
    x: HPoint,
    y: HPoint,
    grid: &[f64],
    word_cap: usize,
) -> Result<CountSeries> {
    let radius = conj_radius(c, x, y, check_grid(grid)?);
    let gamma = c.gamma.mat;
    coset_series(
        CountKind::Conj,
        g,
        c,
        x,
        y,
        None,
        radius,
        grid,
        word_cap,
        |m| Some(dist(m.act(x), (gamma * *m).act(y))),
    )
}

/// Conjugacy count computed without cosets: distinct conjugates `h⁻¹γh` over
/// the ball, counted by `d(x, h⁻¹γh·y) ≤ T`.
pub fn count_conj_direct(
    g: &GroupSpec,
    c: &ConjClass,
    x: HPoint,
    y: HPoint,
    grid: &[f64],
    radius: f64,
    word_cap: usize,
) -> Result<CountSeries> {
    check_grid(grid)?;
    let ball = enumerate_ball(g, HPoint::ORIGIN, x, radius, word_cap)?;
    let gamma = c.gamma.mat;
    let conjugates: Vec<Isometry> = ball
        .elements
        .par_iter()
        .map(|e| e.mat.inverse() * gamma * e.mat)
        .collect();
    let mut index = DedupIndex::new();
    let mut values: Vec<(f64, usize)> = Vec::new();
    for (m, e) in conjugates.into_iter().zip(&ball.elements) {
        let (i, fresh) = index.insert(m);
        if fresh {
            values.push((dist(x, m.act(y)), e.word.len()));
        } else {
            values[i].1 = values[i].1.min(e.word.len());
        }
    }
    let (n, complete) = tabulate(&values, grid, word_cap, ball.exhausted);
    Ok(CountSeries {
        kind: CountKind::Conj,
        t_grid: grid.to_vec(),
        n,
        complete,
        meta: SeriesMeta {
            group: g.name.clone(),
            x,
            y,
            class_word: Some(c.gamma.word.clone()),
            pair: Some("direct".into()),
            radius,
            word_cap,
            exhausted: ball.exhausted,
            visited: ball.visited,
            degenerate: 0,
        },
    })
}

/// Radius about `o` containing `g·x` for every canonical `g` with adjusted
/// height at most `t`.
pub fn adjusted_radius(c: &ConjClass, pair: &AdjustmentPair, t: f64) -> f64 {
    let o = HPoint::ORIGIN;
    dist(o, c.anchor) + c.root_length + (t + pair.sup_f1 + pair.sup_f2).max(0.0) + 1e-6
}

/// `#{⟨γ̂⟩·g : h(g) ≤ T}` for the adjusted height of `pair`.
pub fn count_adjusted(
    g: &GroupSpec,
    c: &ConjClass,
    pair: &AdjustmentPair,
    x: HPoint,
    grid: &[f64],
    word_cap: usize,
) -> Result<CountSeries> {
    Ok(count_adjusted_many(g, c, &[pair], x, grid, word_cap)?.remove(0))
}

/// Adjusted counts for several pairs from a single enumeration.
pub fn count_adjusted_many(
    g: &GroupSpec,
    c: &ConjClass,
    pairs: &[&AdjustmentPair],
    x: HPoint,
    grid: &[f64],
    word_cap: usize,
) -> Result<Vec<CountSeries>> {
    let t_max = check_grid(grid)?;
    let radius = pairs
        .iter()
        .map(|p| adjusted_radius(c, p, t_max))
        .fold(0.0, f64::max);
    let table = collect_cosets(g, c, x, radius, word_cap)?;
    let mut out = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let vals: Vec<Option<f64>> = table
            .reps
            .par_iter()
            .map(|m| adjusted_height(c, pair, m, x).ok().map(|h| h.h))
            .collect();
        let degenerate = vals.iter().filter(|v| v.is_none()).count();
        let values: Vec<(f64, usize)> = vals
            .into_iter()
            .zip(&table.min_len)
            .filter_map(|(v, &l)| v.map(|v| (v, l)))
            .collect();
        let (n, complete) = tabulate(&values, grid, word_cap, table.ball.exhausted);
        out.push(CountSeries {
            kind: CountKind::Adjusted,
            t_grid: grid.to_vec(),
            n,
            complete,
            meta: SeriesMeta {
                group: g.name.clone(),
                x,
                y: x,
                class_word: Some(c.gamma.word.clone()),
                pair: Some(pair.label.clone()),
                radius,
                word_cap,
                exhausted: table.ball.exhausted,
                visited: table.ball.visited,
                degenerate,
            },
        });
    }
    Ok(out)
}

/// Least-squares fit of `ln N` against `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    /// `e^{intercept}`.
    pub sigma_hat: f64,
    pub window: (f64, f64),
    pub stderr: f64,
    pub n_points: usize,
    pub expected_slope: f64,
    /// `|slope − expected| > 0.15`.
    pub flagged: bool,
}

/// Fits over complete grid points with `N ≥ 30`, optionally restricted to a window.
pub fn fit_growth(
    s: &CountSeries,
    expected_slope: f64,
    window: Option<(f64, f64)>,
) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = s
        .t_grid
        .iter()
        .zip(&s.n)
        .zip(&s.complete)
        .filter(|((t, n), c)| {
            **c && **n >= MIN_FIT_COUNT
                && window.is_none_or(|(lo, hi)| **t >= lo - 1e-9 && **t <= hi + 1e-9)
        })
        .map(|((t, n), _)| (*t, (*n as f64).ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable grid points, need at least 4",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let slope = sxy / sxx;
    let intercept = ml - slope * mt;
    let ssr: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = if pts.len() > 2 {
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(GrowthFit {
        slope,
        intercept,
        sigma_hat: intercept.exp(),
        window: (pts[0].0, pts[pts.len() - 1].0),
        stderr,
        n_points: pts.len(),
        expected_slope,
        flagged: (slope - expected_slope).abs() > SLOPE_FLAG,
    })
}

/// `N(T) = round(a·e^{bT})` on the grid, every point complete.
pub fn synthetic_series(a: f64, b: f64, grid: &[f64]) -> CountSeries {
    CountSeries {
        kind: CountKind::Orbit,
        t_grid: grid.to_vec(),
        n: grid
            .iter()
            .map(|&t| (a * (b * t).exp()).round() as u64)
            .collect(),
        complete: vec![true; grid.len()],
        meta: SeriesMeta {
            group: "synthetic".into(),
            x: HPoint::ORIGIN,
            y: HPoint::ORIGIN,
            class_word: None,
            pair: Some(format!("{a}*exp({b}T)")),
            radius: grid.last().copied().unwrap_or(0.0),
            word_cap: 0,
            exhausted: true,
            visited: 0,
            degenerate: 0,
        },
    }
}
