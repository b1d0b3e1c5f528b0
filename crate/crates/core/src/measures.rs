//! Skinning-measure integrals `σ_γ(F₁)` and `σ_x(F₂)` by periodic quadrature,
//! and ratio predictions for leading counting constants.
//!
//! The boundary measure at `o` is the angle measure of the disk chart at `o`
//! times `mu_scale`. Predictions are ratios, in which that scale cancels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjust::{AdjustmentPair, NormalVector};
use crate::counting::CountSeries;
use crate::error::{Error, Result};
use crate::geometry::{angle_diff, busemann, HBoundary, HPoint, Side, UnitTangent};
use crate::group::ConjClass;

/// Empirical ratios built from fewer counts than this are low confidence.
pub const LOW_CONFIDENCE_COUNT: u64 = 100;
const JACOBIAN_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaOptions {
    /// Nodes per side (or per circle) of the coarse rule; the reported value
    /// uses twice as many.
    pub n_nodes: usize,
    pub delta: f64,
    pub mu_scale: f64,
    /// Start of the integration window along the axis, as a fraction of `ℓ(γ̂)`.
    pub window_offset: f64,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self {
            n_nodes: 256,
            delta: 1.0,
            mu_scale: 1.0,
            window_offset: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub value: f64,
    pub quadrature_error: f64,
    pub n_nodes: usize,
    pub normalization: String,
}

fn normalization_label(scale: f64) -> String {
    if scale == 1.0 {
        "mu_o = angle measure at o, unit scale".into()
    } else {
        format!("mu_o = angle measure at o, scale {scale}")
    }
}

/// Derivative of an angle-valued map by Richardson-extrapolated central
/// differences, with wrap-around handled.
fn angle_derivative(f: impl Fn(f64) -> f64, t: f64) -> Result<f64> {
    let h = JACOBIAN_STEP;
    let d = |h: f64| angle_diff(f(t + h), f(t - h)) / (2.0 * h);
    let j = (4.0 * d(0.5 * h) - d(h)) / 3.0;
    if !j.is_finite() || j == 0.0 {
        return Err(Error::Numerical(format!("Jacobian {j} at {t}")));
    }
    Ok(j.abs())
}

/// Periodic trapezoid rule with `n` and `2n` nodes; returns `(Q_2n, Q_n)`.
fn periodic_rule(
    f: impl Fn(f64) -> Result<f64> + Sync,
    a: f64,
    len: f64,
    n: usize,
) -> Result<(f64, f64)> {
    let m = 2 * n;
    let h = len / m as f64;
    let vals: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|k| f(a + k as f64 * h))
        .collect::<Result<_>>()?;
    // Fixed-order sums keep the result independent of the thread count.
    let fine: f64 = vals.iter().sum::<f64>() * h;
    let coarse: f64 = vals.iter().step_by(2).sum::<f64>() * 2.0 * h;
    Ok((fine, coarse))
}

/// Relative noise of the finite-difference Jacobians, below which node
/// doubling cannot resolve anything.
const NOISE_FLOOR: f64 = 1e-10;

fn estimate(fine: f64, coarse: f64, n: usize, scale: f64) -> SigmaEstimate {
    SigmaEstimate {
        value: fine,
        quadrature_error: (fine - coarse).abs().max(NOISE_FLOOR * fine.abs()),
        n_nodes: 2 * n,
        normalization: normalization_label(scale),
    }
}

fn check_opts(opts: &SigmaOptions) -> Result<()> {
    if opts.n_nodes < 2 {
        return Err(Error::Config("n_nodes must be at least 2".into()));
    }
    if !(opts.mu_scale > 0.0) || !(opts.delta > 0.0) {
        return Err(Error::Config("delta and mu_scale must be positive".into()));
    }
    Ok(())
}

/// `σ_γ(F₁) = ∫_{∂¹[y₀, γ̂y₀)} e^{δF₁(v)} e^{−δβ(v⁺, π(v), o)} dμ_o(v⁺)`.
pub fn sigma_gamma_quad(
    c: &ConjClass,
    f1: &(dyn Fn(&NormalVector) -> f64 + Sync),
    o: HPoint,
    opts: &SigmaOptions,
) -> Result<SigmaEstimate> {
    check_opts(opts)?;
    let ell = c.root_length;
    let start = opts.window_offset * ell;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for side in [Side::Left, Side::Right] {
        let theta_o = |s: f64| c.frame.normal_endpoint(s, side).angle_at(o);
        let integrand = |s: f64| -> Result<f64> {
            let v = NormalVector::new(s, side);
            let u = v.to_tangent(c);
            let jac = angle_derivative(theta_o, s)?;
            let weight = (-opts.delta * busemann(u.forward, u.base, o)).exp();
            Ok((opts.delta * f1(&v)).exp() * weight * jac * opts.mu_scale)
        };
        let (f, q) = periodic_rule(integrand, start, ell, opts.n_nodes)?;
        fine += f;
        coarse += q;
    }
    Ok(estimate(fine, coarse, opts.n_nodes, opts.mu_scale))
}

/// `σ_x(F₂) = ∫_{S(x)} e^{δF₂(u)} e^{−δβ(u⁺, x, o)} dμ_o(u⁺)`, integrated over
/// the direction angle at `x`.
pub fn sigma_x_quad(
    x: HPoint,
    f2: &(dyn Fn(&UnitTangent) -> f64 + Sync),
    o: HPoint,
    opts: &SigmaOptions,
) -> Result<SigmaEstimate> {
    check_opts(opts)?;
    let theta_o = |t: f64| HBoundary::from_angle_at(x, t).angle_at(o);
    let integrand = |t: f64| -> Result<f64> {
        let u = UnitTangent::from_angle(x, t);
        let jac = angle_derivative(theta_o, t)?;
        let weight = (-opts.delta * busemann(u.forward, x, o)).exp();
        Ok((opts.delta * f2(&u)).exp() * weight * jac * opts.mu_scale)
    };
    // Half-step offset keeps nodes off the chart point at angle 0.
    let n = opts.n_nodes;
    let (fine, coarse) = periodic_rule(
        integrand,
        std::f64::consts::PI / (4 * n) as f64,
        std::f64::consts::TAU,
        n,
    )?;
    Ok(estimate(fine, coarse, n, opts.mu_scale))
}

/// `σ_γ̂(F₁)·σ_x(F₂)` for a pair.
pub fn sigma_product(
    c: &ConjClass,
    pair: &AdjustmentPair,
    x: HPoint,
    o: HPoint,
    opts: &SigmaOptions,
) -> Result<(SigmaEstimate, SigmaEstimate)> {
    let f1 = pair.f1.clone();
    let f2 = pair.f2.clone();
    Ok((
        sigma_gamma_quad(c, &*f1, o, opts)?,
        sigma_x_quad(x, &*f2, o, opts)?,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioPrediction {
    pub pair_a: String,
    pub pair_b: String,
    pub predicted_ratio: f64,
    /// Propagated relative quadrature error of the prediction.
    pub predicted_rel_error: f64,
    pub empirical_ratio: f64,
    /// `|empirical / predicted − 1|`.
    pub rel_dev: f64,
    /// Grid points the empirical ratio was averaged over.
    pub t_used: Vec<f64>,
    pub low_confidence: bool,
    pub sigmas_a: (SigmaEstimate, SigmaEstimate),
    pub sigmas_b: (SigmaEstimate, SigmaEstimate),
}

/// Predicted ratio of leading constants against the mean empirical ratio over
/// the top three grid points where both series are complete.
#[allow(clippy::too_many_arguments)]
pub fn predict_ratio(
    c: &ConjClass,
    pair_a: &AdjustmentPair,
    pair_b: &AdjustmentPair,
    x: HPoint,
    o: HPoint,
    series_a: &CountSeries,
    series_b: &CountSeries,
    opts: &SigmaOptions,
) -> Result<RatioPrediction> {
    let sa = sigma_product(c, pair_a, x, o, opts)?;
    let sb = sigma_product(c, pair_b, x, o, opts)?;
    let predicted = (sa.0.value * sa.1.value) / (sb.0.value * sb.1.value);
    let rel_err = [&sa.0, &sa.1, &sb.0, &sb.1]
        .iter()
        .map(|s| s.quadrature_error / s.value)
        .sum();
    if series_a.t_grid != series_b.t_grid {
        return Err(Error::Config(
            "ratio needs two series on the same grid".into(),
        ));
    }
    let usable: Vec<usize> = (0..series_a.t_grid.len())
        .rev()
        .filter(|&i| series_a.complete[i] && series_b.complete[i] && series_b.n[i] > 0)
        .take(3)
        .collect();
    if usable.is_empty() {
        return Err(Error::InsufficientData(
            "no grid point where both series are complete".into(),
        ));
    }
    let empirical = usable
        .iter()
        .map(|&i| series_a.n[i] as f64 / series_b.n[i] as f64)
        .sum::<f64>()
        / usable.len() as f64;
    let low_confidence = usable.len() < 3
        || usable
            .iter()
            .any(|&i| series_a.n[i].min(series_b.n[i]) < LOW_CONFIDENCE_COUNT);
    let mut t_used: Vec<f64> = usable.iter().map(|&i| series_a.t_grid[i]).collect();
    t_used.reverse();
    Ok(RatioPrediction {
        pair_a: pair_a.label.clone(),
        pair_b: pair_b.label.clone(),
        predicted_ratio: predicted,
        predicted_rel_error: rel_err,
        empirical_ratio: empirical,
        rel_dev: (empirical / predicted - 1.0).abs(),
        t_used,
        low_confidence,
        sigmas_a: sa,
        sigmas_b: sb,
    })
}
