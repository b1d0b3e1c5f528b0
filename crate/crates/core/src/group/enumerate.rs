use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::GroupSpec;
use crate::error::{domain, Result};
use crate::geometry::{dist, Act, HPoint, Isometry};

/// Relative tolerance under which two matrices are the same group element.
pub const DEDUP_TOL: f64 = 1e-7;
/// Slack applied to every `≤ T` comparison on computed distances.
pub const BOUNDARY_EPS: f64 = 1e-9;

const GRID: f64 = 1e-6;
const PROBE_MARGIN: f64 = 2.5e-7;
const NONE: u32 = u32::MAX;

/// An element of the group together with a word that spells it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub mat: Isometry,
    pub word: Vec<usize>,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self {
            mat: Isometry::IDENTITY,
            word: Vec::new(),
        }
    }

    pub fn from_word(g: &GroupSpec, word: &[usize]) -> Result<Self> {
        if let Some(&bad) = word.iter().find(|&&l| l >= g.alphabet_len()) {
            return domain(format!("letter {bad} is not in the alphabet"));
        }
        let word = g.concat_reduced(&[], word);
        Ok(Self {
            mat: g.word_matrix(&word),
            word,
        })
    }

    pub fn mul(&self, g: &GroupSpec, other: &GroupElement) -> GroupElement {
        GroupElement {
            mat: self.mat * other.mat,
            word: g.concat_reduced(&self.word, &other.word),
        }
    }

    pub fn inverse(&self, g: &GroupSpec) -> GroupElement {
        GroupElement {
            mat: self.mat.inverse(),
            word: g.inverse_word(&self.word),
        }
    }

    pub fn pow(&self, g: &GroupSpec, n: i64) -> GroupElement {
        let base = if n < 0 { self.inverse(g) } else { self.clone() };
        let mut word = Vec::new();
        for _ in 0..n.unsigned_abs() {
            word = g.concat_reduced(&word, &base.word);
        }
        GroupElement {
            mat: self.mat.pow(n),
            word,
        }
    }

    /// Relative mismatch between `mat` and the product of `word`.
    pub fn word_mismatch(&self, g: &GroupSpec) -> f64 {
        let w = g.word_matrix(&self.word);
        let scale = w.norm().max(self.mat.norm());
        let diff = |s: f64| {
            [
                self.mat.a - s * w.a,
                self.mat.b - s * w.b,
                self.mat.c - s * w.c,
                self.mat.d - s * w.d,
            ]
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
        };
        diff(1.0).min(diff(-1.0)) / scale
    }
}

/// Insert-if-absent index over matrices modulo sign, with relative tolerance.
pub struct DedupIndex {
    heads: HashMap<[i64; 4], u32>,
    chain: Vec<u32>,
    mats: Vec<Isometry>,
}

impl Default for DedupIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl DedupIndex {
    pub fn new() -> Self {
        Self {
            heads: HashMap::new(),
            chain: Vec::new(),
            mats: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn get(&self, i: usize) -> &Isometry {
        &self.mats[i]
    }

    fn scaled(m: &Isometry) -> [f64; 4] {
        let n = m.norm();
        [m.a / n, m.b / n, m.c / n, m.d / n]
    }

    fn cell(v: [f64; 4]) -> [i64; 4] {
        v.map(|c| (c / GRID).floor() as i64)
    }

    /// Index of a stored matrix equal to `m` up to sign, if any.
    pub fn find(&self, m: &Isometry) -> Option<usize> {
        let v = Self::scaled(m);
        self.probe(v, m).or_else(|| self.probe(v.map(|c| -c), m))
    }

    fn probe(&self, v: [f64; 4], m: &Isometry) -> Option<usize> {
        let base = Self::cell(v);
        // Neighbor offsets per coordinate when the value sits near a cell wall.
        let mut options: [[i64; 2]; 4] = [[0, 0]; 4];
        for k in 0..4 {
            let frac = v[k] / GRID - base[k] as f64;
            options[k][1] = if frac < PROBE_MARGIN / GRID {
                -1
            } else if frac > 1.0 - PROBE_MARGIN / GRID {
                1
            } else {
                0
            };
        }
        for mask in 0..16u32 {
            let mut key = base;
            let mut redundant = false;
            for k in 0..4 {
                if mask & (1 << k) != 0 {
                    if options[k][1] == 0 {
                        redundant = true;
                        break;
                    }
                    key[k] += options[k][1];
                }
            }
            if redundant {
                continue;
            }
            let mut cur = self.heads.get(&key).copied().unwrap_or(NONE);
            while cur != NONE {
                if self.mats[cur as usize].approx_eq(m, DEDUP_TOL) {
                    return Some(cur as usize);
                }
                cur = self.chain[cur as usize];
            }
        }
        None
    }

    /// Inserts `m` unless an equal matrix is present; returns its index and
    /// whether it was new.
    pub fn insert(&mut self, m: Isometry) -> (usize, bool) {
        if let Some(i) = self.find(&m) {
            return (i, false);
        }
        let idx = self.mats.len() as u32;
        let key = Self::cell(Self::scaled(&m));
        let prev = self.heads.insert(key, idx).unwrap_or(NONE);
        self.chain.push(prev);
        self.mats.push(m);
        (idx as usize, true)
    }
}

/// Evidence that an enumeration found everything it was asked for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub word_cap: usize,
    /// The search frontier emptied before reaching the word cap.
    pub exhausted: bool,
    /// Counts within the radius using words of length `≤ cap − 2, cap − 1, cap`.
    pub counts_by_cap: [usize; 3],
    pub complete: bool,
}

impl Certificate {
    /// Builds the certificate for threshold `t` from `(value, word length)` pairs.
    pub fn from_values(
        values: impl Iterator<Item = (f64, usize)>,
        t: f64,
        word_cap: usize,
        exhausted: bool,
    ) -> Self {
        let mut counts = [0usize; 3];
        for (v, len) in values {
            if v <= t + BOUNDARY_EPS {
                for (k, c) in counts.iter_mut().enumerate() {
                    if len + 2 <= word_cap + k {
                        *c += 1;
                    }
                }
            }
        }
        let stable = counts[0] == counts[1] && counts[1] == counts[2];
        Self {
            word_cap,
            exhausted,
            counts_by_cap: counts,
            complete: exhausted || stable,
        }
    }
}

/// Result of [`enumerate_ball`]: the elements with `d(x, g·y) ≤ radius`.
#[derive(Clone, Debug, Serialize)]
pub struct Ball {
    pub x: HPoint,
    pub y: HPoint,
    pub radius: f64,
    pub word_cap: usize,
    pub exhausted: bool,
    /// Number of matrices visited, including pruning scaffolding.
    pub visited: usize,
    /// Sorted by word length, then lexicographically by word.
    pub elements: Vec<GroupElement>,
    pub dists: Vec<f64>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn count_within(&self, t: f64) -> usize {
        self.dists
            .iter()
            .filter(|&&d| d <= t + BOUNDARY_EPS)
            .count()
    }

    pub fn certificate(&self, t: f64) -> Certificate {
        Certificate::from_values(
            self.dists
                .iter()
                .zip(&self.elements)
                .map(|(&d, e)| (d, e.word.len())),
            t,
            self.word_cap,
            self.exhausted,
        )
    }
}

/// Options for [`enumerate_ball_with`].
#[derive(Clone, Copy, Debug)]
pub struct EnumOptions {
    pub word_cap: usize,
    /// Use the group's prune slack when it declares one.
    pub prune: bool,
}

/// All group elements `g` with `d(x, g·y) ≤ radius`, deduplicated by matrix.
pub fn enumerate_ball(
    g: &GroupSpec,
    x: HPoint,
    y: HPoint,
    radius: f64,
    word_cap: usize,
) -> Result<Ball> {
    enumerate_ball_with(
        g,
        x,
        y,
        radius,
        EnumOptions {
            word_cap,
            prune: true,
        },
    )
}

pub fn enumerate_ball_with(
    g: &GroupSpec,
    x: HPoint,
    y: HPoint,
    radius: f64,
    opts: EnumOptions,
) -> Result<Ball> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return domain(format!("radius {radius} must be finite and non-negative"));
    }
    if opts.word_cap == 0 {
        return domain("word cap must be at least 1");
    }
    if !x.is_valid() || !y.is_valid() {
        return domain("basepoints must lie in the upper half-plane");
    }
    let o = HPoint::ORIGIN;
    // Prefixes of a shortest tile path stay within the slack of the segment.
    let expand_limit = match (opts.prune, g.prune_slack) {
        (true, Some(s)) => Some(radius + s + 2.0 * (dist(o, x) + dist(o, y)) + BOUNDARY_EPS),
        _ => None,
    };

    let mut index = DedupIndex::new();
    let mut parent: Vec<u32> = vec![NONE];
    let mut letter: Vec<u8> = vec![0];
    let mut depth: Vec<u16> = vec![0];
    let mut dists: Vec<f64> = vec![dist(x, y)];
    index.insert(Isometry::IDENTITY);

    let mut frontier: Vec<u32> = vec![0];
    let mut exhausted = false;
    for level in 1..=opts.word_cap {
        let children: Vec<(u32, u8, Isometry, f64)> = frontier
            .par_iter()
            .flat_map_iter(|&p| {
                let pm = *index.get(p as usize);
                let forbid = if p == 0 {
                    None
                } else {
                    Some(g.inverse[letter[p as usize] as usize])
                };
                (0..g.alphabet_len()).filter_map(move |l| {
                    if Some(l) == forbid {
                        return None;
                    }
                    let m = pm * g.generators[l];
                    let d = dist(x, m.act(y));
                    match expand_limit {
                        Some(lim) if d > lim => None,
                        _ => Some((p, l as u8, m, d)),
                    }
                })
            })
            .collect();
        // Lookups against earlier levels are read-only and parallel; the
        // sequential pass only resolves duplicates within this level.
        let known: Vec<bool> = children
            .par_iter()
            .map(|c| index.find(&c.2).is_some())
            .collect();
        let mut next = Vec::new();
        for (c, seen) in children.into_iter().zip(known) {
            if seen {
                continue;
            }
            let (idx, fresh) = index.insert(c.2);
            if !fresh {
                continue;
            }
            debug_assert_eq!(idx, parent.len());
            parent.push(c.0);
            letter.push(c.1);
            depth.push(level as u16);
            dists.push(c.3);
            next.push(idx as u32);
        }
        if next.is_empty() {
            exhausted = true;
            break;
        }
        frontier = next;
    }

    let word_of = |mut i: u32| {
        let mut w = Vec::with_capacity(depth[i as usize] as usize);
        while i != 0 {
            w.push(letter[i as usize] as usize);
            i = parent[i as usize];
        }
        w.reverse();
        w
    };
    let mut kept: Vec<(GroupElement, f64)> = (0..dists.len())
        .filter(|&i| dists[i] <= radius + BOUNDARY_EPS)
        .map(|i| {
            (
                GroupElement {
                    mat: *index.get(i),
                    word: word_of(i as u32),
                },
                dists[i],
            )
        })
        .collect();
    kept.sort_by(|a, b| {
        a.0.word
            .len()
            .cmp(&b.0.word.len())
            .then_with(|| a.0.word.cmp(&b.0.word))
    });
    let (elements, dists) = kept.into_iter().unzip();
    Ok(Ball {
        x,
        y,
        radius,
        word_cap: opts.word_cap,
        exhausted,
        visited: index.len(),
        elements,
        dists,
    })
}
