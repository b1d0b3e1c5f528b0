//! Quadrature against Monte-Carlo integration in the boundary angle at `o`,
//! where the measure needs no Jacobian.

use std::f64::consts::TAU;
use std::sync::Arc;

use hypcount::adjust::{AdjustmentPair, NormalVector};
use hypcount::counting::{synthetic_series, t_grid};
use hypcount::geometry::{busemann, HBoundary, HPoint, UnitTangent};
use hypcount::group::{ConjClass, GroupSpec};
use hypcount::measures::{predict_ratio, sigma_gamma_quad, sigma_x_quad, SigmaOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const O: HPoint = HPoint::ORIGIN;

/// Mean and standard error of `2π·f(θ)` for `θ` uniform on the circle.
fn monte_carlo(rng: &mut ChaCha8Rng, n: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let vals: Vec<f64> = (0..n).map(|_| TAU * f(rng.gen_range(0.0..TAU))).collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn mc_sigma_x(
    rng: &mut ChaCha8Rng,
    x: HPoint,
    f2: &dyn Fn(&UnitTangent) -> f64,
    n: usize,
) -> (f64, f64) {
    monte_carlo(rng, n, |th| {
        let zeta = HBoundary::from_angle(th);
        f2(&UnitTangent::new(x, zeta)).exp() * (-busemann(zeta, x, O)).exp()
    })
}

fn mc_sigma_gamma(
    rng: &mut ChaCha8Rng,
    c: &ConjClass,
    f1: &dyn Fn(&NormalVector) -> f64,
    n: usize,
) -> (f64, f64) {
    monte_carlo(rng, n, |th| {
        let zeta = HBoundary::from_angle(th);
        match c.frame.boundary_coord(zeta) {
            Some((s, side)) if (0.0..c.root_length).contains(&s) => {
                let v = NormalVector::new(s, side);
                f1(&v).exp() * (-busemann(zeta, v.to_tangent(c).base, O)).exp()
            }
            _ => 0.0,
        }
    })
}

fn agree(quad: (f64, f64), mc: (f64, f64)) -> bool {
    let tol = 3.0 * (quad.1.powi(2) + mc.1.powi(2)).sqrt();
    (quad.0 - mc.0).abs() <= tol
}

#[test]
fn sigma_x_total_mass_is_two_pi_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (a, b) in [(0.0, 1.0), (0.2, 1.1), (-1.5, 0.4), (3.0, 2.5)] {
        let x = HPoint::new(a, b).unwrap();
        let q = sigma_x_quad(x, &|_| 0.0, O, &SigmaOptions::default()).unwrap();
        assert!((q.value - TAU).abs() < 1e-8, "{q:?}");
        let mc = mc_sigma_x(&mut rng, x, &|_| 0.0, 200_000);
        assert!((mc.0 - TAU).abs() < 4.0 * mc.1 + 1e-9, "{mc:?}");
    }
}

#[test]
fn sigma_gamma_of_zero_is_twice_the_root_length() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for w in [vec![0], vec![0, 1]] {
        let c = ConjClass::from_word(&g, &w).unwrap();
        let q = sigma_gamma_quad(&c, &|_| 0.0, O, &SigmaOptions::default()).unwrap();
        assert!((q.value - 2.0 * c.root_length).abs() < 1e-7, "{q:?}");
        let mc = mc_sigma_gamma(&mut rng, &c, &|_| 0.0, 200_000);
        assert!(agree((q.value, q.quadrature_error), mc), "{q:?} {mc:?}");
    }
}

#[test]
fn quadrature_matches_monte_carlo_for_random_smooth_functions() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let c = Arc::new(ConjClass::from_word(&g, &[0, 1]).unwrap());
    let x = HPoint::new(0.2, 1.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SigmaOptions::default();
    for _ in 0..10 {
        let k: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
        let ell = c.root_length;
        let f1 = move |v: &NormalVector| {
            let t = TAU * v.axis_param / ell;
            k[0] * (t + k[1]).cos() + k[2] * v.side.sign()
        };
        let f2 = move |u: &UnitTangent| {
            let th = u.angle();
            k[3] * (th + k[4]).cos() + k[5] * (2.0 * th).sin()
        };
        let q1 = sigma_gamma_quad(&c, &f1, O, &opts).unwrap();
        let m1 = mc_sigma_gamma(&mut rng, &c, &f1, 100_000);
        assert!(
            agree((q1.value, q1.quadrature_error), m1),
            "{k:?}: {q1:?} {m1:?}"
        );
        let q2 = sigma_x_quad(x, &f2, O, &opts).unwrap();
        let m2 = mc_sigma_x(&mut rng, x, &f2, 100_000);
        assert!(
            agree((q2.value, q2.quadrature_error), m2),
            "{k:?}: {q2:?} {m2:?}"
        );
    }
}

#[test]
fn predicted_ratio_ignores_the_measure_scale() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let c = Arc::new(ConjClass::from_word(&g, &[0]).unwrap());
    let (x, y) = (
        HPoint::new(0.2, 1.1).unwrap(),
        HPoint::new(0.5, 0.8).unwrap(),
    );
    let grid = t_grid(6.0, 9.0, 0.5).unwrap();
    let s = synthetic_series(1.0, 1.0, &grid);
    let pairs = [
        AdjustmentPair::smooth(c.root_length, 0.3),
        AdjustmentPair::theorem_a(c.clone(), x, y).unwrap(),
    ];
    let zero = AdjustmentPair::zero();
    for p in &pairs {
        let base = predict_ratio(&c, p, &zero, x, O, &s, &s, &SigmaOptions::default()).unwrap();
        let scaled = SigmaOptions {
            mu_scale: 7.0,
            ..SigmaOptions::default()
        };
        let other = predict_ratio(&c, p, &zero, x, O, &s, &s, &scaled).unwrap();
        assert!((base.predicted_ratio / other.predicted_ratio - 1.0).abs() < 1e-12);
        assert!((other.sigmas_a.1.value / base.sigmas_a.1.value - 7.0).abs() < 1e-9);
    }
}

#[test]
fn ratio_examples() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let c = ConjClass::from_word(&g, &[0]).unwrap();
    let x = HPoint::new(0.2, 1.1).unwrap();
    let grid = t_grid(6.0, 9.0, 0.5).unwrap();
    let s = synthetic_series(1.0, 1.0, &grid);
    let smooth = AdjustmentPair::smooth(c.root_length, 0.3);
    let same = predict_ratio(&c, &smooth, &smooth, x, O, &s, &s, &SigmaOptions::default()).unwrap();
    assert!((same.predicted_ratio - 1.0).abs() < 1e-12);
    assert_eq!(same.empirical_ratio, 1.0);
    assert!(!same.low_confidence);

    let constant = AdjustmentPair::constant(0.3, -0.1);
    let zero = AdjustmentPair::zero();
    let r = predict_ratio(&c, &constant, &zero, x, O, &s, &s, &SigmaOptions::default()).unwrap();
    assert!((r.predicted_ratio - 0.2f64.exp()).abs() < 1e-9);

    // Small counts lower the confidence.
    let tiny = synthetic_series(1.0, 0.1, &grid);
    let r = predict_ratio(
        &c,
        &zero,
        &zero,
        x,
        O,
        &tiny,
        &tiny,
        &SigmaOptions::default(),
    )
    .unwrap();
    assert!(r.low_confidence);
    assert_eq!(r.t_used, vec![8.0, 8.5, 9.0]);
}
