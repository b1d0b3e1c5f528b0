use std::sync::Arc;

use hypcount::adjust::AdjustmentPair;
use hypcount::counting::{
    conj_radius, count_adjusted, count_adjusted_many, count_conj, count_conj_direct,
    count_cosets_by, count_orbit, fit_growth, t_grid, CountKind, CountSeries,
};
use hypcount::geometry::{dist, dist_to_geodesic, Act, HPoint};
use hypcount::group::{ConjClass, GroupSpec};

fn pt(x: f64, y: f64) -> HPoint {
    HPoint::new(x, y).unwrap()
}

fn assert_monotone(s: &CountSeries) {
    assert!(s.n.windows(2).all(|w| w[0] <= w[1]), "{:?}", s.n);
}

#[test]
fn cyclic_group_has_a_single_coset() {
    let g = GroupSpec::builtin("cyclic-demo").unwrap();
    let c = ConjClass::from_word(&g, &[0]).unwrap();
    let (x, y) = (pt(0.3, 1.2), pt(-0.1, 0.9));
    let d = dist(x, c.gamma.mat.act(y));
    let grid = [0.5 * d, d - 1e-6, d + 1e-6, 2.0 * d, 10.0];
    let s = count_conj(&g, &c, x, y, &grid, 20).unwrap();
    assert_eq!(s.n, vec![0, 0, 1, 1, 1]);
    assert!(s.all_complete());
}

#[test]
fn orbit_counts_below_the_systole() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let o = HPoint::ORIGIN;
    let grid = [0.0, 1.0, 2.0];
    assert_eq!(count_orbit(&g, o, o, &grid, 10).unwrap().n, vec![1, 1, 1]);
    // A point far from every orbit point of o.
    let y = pt(0.0, 1.0f64.exp() * 0.5f64.exp());
    let s = count_orbit(&g, o, y, &[0.5, 1.0], 10).unwrap();
    assert_eq!(s.n[0], 0);
}

#[test]
fn coset_and_direct_counts_agree_off_axis() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let (x, y) = (pt(0.2, 1.1), pt(0.5, 0.8));
    for word in [vec![0], vec![0, 1]] {
        let c = ConjClass::from_word(&g, &word).unwrap();
        let grid = t_grid(6.0, 10.0, 0.5).unwrap();
        let cosets = count_conj(&g, &c, x, y, &grid, 64).unwrap();
        let radius = conj_radius(&c, x, y, 10.0);
        let direct = count_conj_direct(&g, &c, x, y, &grid, radius, 64).unwrap();
        assert!(cosets.all_complete() && direct.all_complete());
        assert_eq!(cosets.n, direct.n, "{word:?}");
        assert!(*cosets.n.last().unwrap() > 0);
        assert_monotone(&cosets);
    }
}

#[test]
fn constant_pairs_shift_the_zero_count() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let c = ConjClass::from_word(&g, &[3]).unwrap();
    let x = pt(-0.3, 0.9);
    let grid = t_grid(3.0, 7.0, 0.25).unwrap();
    let pairs = [
        AdjustmentPair::zero(),
        AdjustmentPair::constant(0.25, 0.25),
        AdjustmentPair::constant(-0.5, 0.25),
        AdjustmentPair::constant(0.0, 1.0),
    ];
    let refs: Vec<&AdjustmentPair> = pairs.iter().collect();
    let all = count_adjusted_many(&g, &c, &refs, x, &grid, 64).unwrap();
    let zero = &all[0];
    // h drops by c₁ + c₂, so N_c(T) = N₀(T + c₁ + c₂): 0.5, −0.25 and 1.0.
    for ((pair, s), steps) in pairs.iter().zip(&all).skip(1).zip([2i64, -1, 4]) {
        for (i, &n) in s.n.iter().enumerate() {
            let j = i as i64 + steps;
            if j >= 0 && (j as usize) < grid.len() {
                assert_eq!(n, zero.n[j as usize], "{} at T={}", pair.label, grid[i]);
            }
        }
        assert_monotone(s);
    }
    // A single-pair run reproduces the batched one.
    let single = count_adjusted(&g, &c, &pairs[2], x, &grid, 64).unwrap();
    assert_eq!(single.n, all[2].n);
}

#[test]
fn zero_pair_counts_cosets_by_distance_to_axis() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let c = ConjClass::from_word(&g, &[0, 1]).unwrap();
    let x = pt(0.2, 1.1);
    let grid = t_grid(2.0, 6.0, 0.5).unwrap();
    let s = count_adjusted(&g, &c, &AdjustmentPair::zero(), x, &grid, 64).unwrap();
    let (n, _, _, _) = count_cosets_by(&g, &c, x, s.meta.radius, &grid, 64, |m| {
        dist_to_geodesic(&c.axis, m.act(x)).ok()
    })
    .unwrap();
    assert_eq!(s.n, n);
    assert_eq!(s.kind, CountKind::Adjusted);
}

#[test]
fn half_displacement_height_reproduces_conjugacy_counts() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let c = ConjClass::from_word(&g, &[0]).unwrap();
    let (x, y) = (pt(0.2, 1.1), pt(0.5, 0.8));
    let conj_grid = t_grid(10.0, 16.0, 1.0).unwrap();
    let conj = count_conj(&g, &c, x, y, &conj_grid, 64).unwrap();

    // The external height d(gx, γ·gy)/2 counts exactly the same cosets.
    let half: Vec<f64> = conj_grid.iter().map(|t| t / 2.0).collect();
    let gamma = c.gamma.mat;
    let (n, complete, _, _) = count_cosets_by(&g, &c, x, conj.meta.radius, &half, 64, |m| {
        Some(0.5 * dist(m.act(x), (gamma * *m).act(y)))
    })
    .unwrap();
    assert!(complete.iter().all(|&b| b));
    assert_eq!(n, conj.n);

    // The pair (−F₁/2, −F₂/2) approximates it up to the residual.
    let pair = AdjustmentPair::theorem_a(Arc::new(c.clone()), x, y).unwrap();
    let adj = count_adjusted(&g, &c, &pair, x, &half, 64).unwrap();
    assert!(adj.all_complete());
    for (a, b) in adj.n.iter().zip(&conj.n).skip(3) {
        let rel = (*a as f64 - *b as f64).abs() / *b as f64;
        assert!(rel < 0.05, "{a} vs {b}");
    }
}

#[test]
fn orbit_growth_fit_on_bolza() {
    let g = GroupSpec::builtin("bolza").unwrap();
    let o = HPoint::ORIGIN;
    let s = count_orbit(&g, o, o, &t_grid(6.0, 11.0, 0.5).unwrap(), 64).unwrap();
    assert_monotone(&s);
    let fit = fit_growth(&s, 1.0, None).unwrap();
    assert!(!fit.flagged, "{fit:?}");
    // Area 4π: N(T) ≈ e^T / 4.
    assert!((fit.sigma_hat / 0.25 - 1.0).abs() < 0.25, "{fit:?}");
}

#[test]
fn constant_series_is_flagged() {
    let mut s = hypcount::counting::synthetic_series(50.0, 0.0, &t_grid(0.0, 5.0, 0.5).unwrap());
    s.n.iter_mut().for_each(|n| *n = 50);
    let fit = fit_growth(&s, 1.0, None).unwrap();
    assert!(fit.slope.abs() < 1e-12);
    assert!(fit.flagged);
}
