use hypcount::geometry::{dist, Act, HPoint, Isometry};
use hypcount::group::{
    coset_canonicalize, enumerate_ball, enumerate_ball_with, ConjClass, EnumOptions, GroupElement,
    GroupSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bolza() -> GroupSpec {
    GroupSpec::builtin("bolza").unwrap()
}

/// Orbit points of all freely reduced words up to `len`, inside the ball,
/// deduplicated as points. The groups here are torsion-free, so distinct
/// points are distinct elements.
fn dfs_orbit_count(g: &GroupSpec, x: HPoint, y: HPoint, t: f64, len: usize) -> usize {
    #[allow(clippy::too_many_arguments)]
    fn walk(
        g: &GroupSpec,
        m: Isometry,
        last: Option<usize>,
        left: usize,
        x: HPoint,
        y: HPoint,
        t: f64,
        out: &mut Vec<HPoint>,
    ) {
        let p = m.act(y);
        if dist(x, p) <= t + 1e-9 {
            out.push(p);
        }
        if left == 0 {
            return;
        }
        for l in 0..g.alphabet_len() {
            if last.map(|k| g.inverse[k]) == Some(l) {
                continue;
            }
            walk(g, m * g.generators[l], Some(l), left - 1, x, y, t, out);
        }
    }
    let mut pts = Vec::new();
    walk(g, Isometry::IDENTITY, None, len, x, y, t, &mut pts);
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut distinct: Vec<HPoint> = Vec::new();
    for p in pts {
        // Points are sorted by x, so duplicates sit in a short run.
        let dup = distinct
            .iter()
            .rev()
            .take_while(|q| p.x - q.x < 1e-7)
            .any(|q| dist(p, *q) < 1e-7);
        if !dup {
            distinct.push(p);
        }
    }
    distinct.len()
}

#[test]
fn bolza_ball_matches_exhaustive_words() {
    let g = bolza();
    let o = HPoint::ORIGIN;
    let oracle: Vec<usize> = (5..=7).map(|l| dfs_orbit_count(&g, o, o, 6.0, l)).collect();
    assert_eq!(
        oracle[1], oracle[2],
        "word oracle not yet stable: {oracle:?}"
    );
    let b = enumerate_ball(&g, o, o, 6.0, 40).unwrap();
    assert!(b.certificate(6.0).complete);
    assert_eq!(b.len(), oracle[2]);

    let x = HPoint::new(0.3, 0.8).unwrap();
    let y = HPoint::new(-0.2, 1.3).unwrap();
    let oracle = dfs_orbit_count(&g, x, y, 5.0, 7);
    assert_eq!(oracle, dfs_orbit_count(&g, x, y, 5.0, 6));
    assert_eq!(enumerate_ball(&g, x, y, 5.0, 40).unwrap().len(), oracle);
}

#[test]
fn bolza_is_discrete_with_expected_covolume() {
    let g = bolza();
    let o = HPoint::ORIGIN;
    let t = 10.0;
    let b = enumerate_ball(&g, o, o, t, 60).unwrap();
    assert!(b.certificate(t).complete);
    let systole = 2.0 * (1.0 + 2f64.sqrt()).acosh();
    let min_move = b
        .dists
        .iter()
        .copied()
        .filter(|&d| d > 1e-3)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(b.dists.iter().filter(|&&d| d <= 1e-3).count(), 1);
    assert!((min_move - systole).abs() < 1e-9, "{min_move}");
    // Area 4π: the ball of radius T holds about (cosh T − 1)/2 orbit points.
    let expect = (t.cosh() - 1.0) / 2.0;
    let ratio = b.len() as f64 / expect;
    assert!((ratio - 1.0).abs() < 0.1, "{} vs {expect}", b.len());
}

#[test]
fn words_and_matrices_agree() {
    let g = bolza();
    let b = enumerate_ball(&g, HPoint::ORIGIN, HPoint::ORIGIN, 10.0, 60).unwrap();
    let worst = b
        .elements
        .iter()
        .map(|e| e.word_mismatch(&g))
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn free_groups_have_no_collisions() {
    for (name, cap, t) in [("cyclic-demo", 12, 30.0), ("free2-demo", 8, 40.0)] {
        let g = GroupSpec::builtin(name).unwrap();
        let p = HPoint::new(0.1, 1.2).unwrap();
        let b = enumerate_ball_with(
            &g,
            p,
            p,
            t,
            EnumOptions {
                word_cap: cap,
                prune: false,
            },
        )
        .unwrap();
        let n = g.alphabet_len();
        // Freely reduced words of length ≤ cap, all inside the (large) ball.
        let words: usize = 1
            + (1..=cap)
                .map(|k| n * (n - 1).pow(k as u32 - 1))
                .sum::<usize>();
        assert_eq!(b.len(), words, "{name}");
    }
}

#[test]
fn pure_word_cap_mode_reports_certificate() {
    let g = GroupSpec::builtin("free2-demo").unwrap();
    let o = HPoint::ORIGIN;
    let b = enumerate_ball(&g, o, o, 7.0, 12).unwrap();
    let c = b.certificate(7.0);
    assert!(c.complete, "{c:?}");
    let small = enumerate_ball(&g, o, o, 7.0, 2).unwrap();
    assert!(!small.certificate(7.0).complete);
}

#[test]
fn order_is_independent_of_thread_count() {
    let g = bolza();
    let x = HPoint::new(0.2, 1.1).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| enumerate_ball(&g, x, x, 8.0, 40).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.elements, b.elements);
    assert_eq!(a.dists, b.dists);
}

/// Minimum of `d(p, g·p)` over the plane by alternating golden-section
/// searches in `x` and `log y`.
fn min_displacement(g: &Isometry) -> f64 {
    let f = |x: f64, ly: f64| {
        let p = HPoint::new_unchecked(x, ly.exp());
        dist(p, g.act(p))
    };
    let golden = |h: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let a = hi - r * (hi - lo);
            let b = lo + r * (hi - lo);
            if h(a) < h(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        0.5 * (lo + hi)
    };
    let (mut x, mut ly) = (0.0, 0.0);
    for _ in 0..60 {
        x = golden(&|v| f(v, ly), x - 4.0, x + 4.0);
        ly = golden(&|v| f(x, v), ly - 4.0, ly + 4.0);
    }
    f(x, ly)
}

#[test]
fn translation_length_matches_minimal_displacement() {
    let g = bolza();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let l = rng.gen_range(0..8);
        let c = ConjClass::from_word(&g, &[l]).unwrap();
        let numeric = min_displacement(&c.gamma.mat);
        assert!((c.translation_length - numeric).abs() < 1e-8, "{numeric}");
        let trace = 2.0 * (0.5 * c.gamma.mat.trace().abs()).acosh();
        assert!((c.translation_length - trace).abs() < 1e-12);
    }
    let c = ConjClass::from_word(&g, &[0, 1, 5]).unwrap();
    assert!((c.translation_length - min_displacement(&c.gamma.mat)).abs() < 1e-7);
}

#[test]
fn primitive_root_fixes_axis() {
    let g = bolza();
    let c = ConjClass::from_word(&g, &[0, 1, 0, 1]).unwrap();
    assert_eq!(c.power, 2);
    let r = c.primitive_root.mat;
    assert!(r.act(c.axis.neg).approx_eq(&c.axis.neg, 1e-9));
    assert!(r.act(c.axis.pos).approx_eq(&c.axis.pos, 1e-9));
    assert!((2.0 * c.root_length - c.translation_length).abs() < 1e-8);
}

fn random_element(g: &GroupSpec, rng: &mut ChaCha8Rng, len: usize) -> GroupElement {
    let word: Vec<usize> = (0..len)
        .map(|_| rng.gen_range(0..g.alphabet_len()))
        .collect();
    GroupElement::from_word(g, &word).unwrap()
}

#[test]
fn coset_rep_is_unique_in_window() {
    let g = bolza();
    let c = ConjClass::from_word(&g, &[2]).unwrap();
    let x = HPoint::new(0.2, 1.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let e = random_element(&g, &mut rng, 6);
        let rep = coset_canonicalize(&g, &c, &e, x);
        // Brute force over shifts: exactly one lands in [0, ℓ).
        let hits: Vec<i64> = (-40..=40)
            .filter(|&n| {
                let s = c.axis_coordinate((c.root_pow(n) * e.mat).act(x));
                (0.0..c.root_length).contains(&s)
            })
            .collect();
        assert_eq!(hits, vec![rep.shift]);
        assert!(rep.g.word_mismatch(&g) < 1e-6);
        for m in -5..=5 {
            let moved = GroupElement {
                mat: c.root_pow(m) * e.mat,
                word: e.word.clone(),
            };
            let again = coset_canonicalize(&g, &c, &moved, x);
            assert!(again.g.mat.approx_eq(&rep.g.mat, 1e-7));
        }
        let twice = coset_canonicalize(&g, &c, &rep.g, x);
        assert_eq!(twice.shift, 0);
    }
}
