use std::f64::consts::{E, PI, SQRT_2};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Isometry, IsometryKind};

/// Relative tolerance for recognizing a relator product as `±I`.
const RELATOR_TOL: f64 = 1e-6;

/// Group-spec file format. Generator matrices are row-major 4-tuples; missing
/// inverses are appended to the alphabet after the listed generators, and
/// relator letters index into that final alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: String,
    pub generators: Vec<[f64; 4]>,
    #[serde(default)]
    pub relators: Vec<Vec<usize>>,
    pub cocompact: bool,
    /// Extra distance a word prefix may overshoot the target radius, measured
    /// for `x = y = o`. Without it enumeration runs in pure word-cap mode.
    #[serde(default)]
    pub prune_slack: Option<f64>,
}

/// A validated, inverse-closed generating alphabet.
#[derive(Clone, Debug, Serialize)]
pub struct GroupSpec {
    pub name: String,
    pub generators: Vec<Isometry>,
    /// `inverse[i]` is the letter whose matrix is the inverse of letter `i`.
    pub inverse: Vec<usize>,
    pub relators: Vec<Vec<usize>>,
    pub cocompact: bool,
    pub prune_slack: Option<f64>,
}

pub const BUILTIN_NAMES: [&str; 3] = ["bolza", "cyclic-demo", "free2-demo"];

impl GroupSpec {
    pub fn from_config(cfg: GroupConfig) -> Result<Self> {
        if cfg.generators.is_empty() {
            return Err(Error::Group("no generators".into()));
        }
        let mut gens = Vec::with_capacity(2 * cfg.generators.len());
        for (i, m) in cfg.generators.iter().enumerate() {
            let g = Isometry::from_array(*m)
                .map_err(|e| Error::Group(format!("generator {i}: {e}")))?;
            if g.kind() == IsometryKind::Identity {
                return Err(Error::Group(format!("generator {i} is the identity")));
            }
            gens.push(g);
        }
        let listed = gens.len();
        for i in 0..listed {
            let inv = gens[i].inverse();
            if !gens.iter().any(|h| h.approx_eq(&inv, 1e-9)) {
                gens.push(inv);
            }
        }
        if gens.len() > u8::MAX as usize {
            return Err(Error::Group("alphabet larger than 255 letters".into()));
        }
        let inverse = gens
            .iter()
            .map(|g| {
                let inv = g.inverse();
                gens.iter().position(|h| h.approx_eq(&inv, 1e-9)).unwrap()
            })
            .collect();
        if let Some(s) = cfg.prune_slack {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Group(format!(
                    "prune_slack {s} must be finite and non-negative"
                )));
            }
        }
        let spec = Self {
            name: cfg.name,
            generators: gens,
            inverse,
            relators: cfg.relators,
            cocompact: cfg.cocompact,
            prune_slack: cfg.prune_slack,
        };
        for (k, r) in spec.relators.iter().enumerate() {
            if r.is_empty() {
                return Err(Error::Group(format!("relator {k} is empty")));
            }
            if let Some(&bad) = r.iter().find(|&&l| l >= spec.generators.len()) {
                return Err(Error::Group(format!(
                    "relator {k} uses unknown letter {bad}"
                )));
            }
            let m = spec.word_matrix(r);
            if !m.approx_eq(&Isometry::IDENTITY, RELATOR_TOL) {
                return Err(Error::Group(format!(
                    "relator {k} evaluates to {m:?}, not the identity"
                )));
            }
        }
        Ok(spec)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "bolza" => Self::from_config(bolza_config()),
            "cyclic-demo" => Self::from_config(GroupConfig {
                name: name.into(),
                generators: vec![[E, 0.0, 0.0, E.recip()]],
                relators: vec![],
                cocompact: false,
                prune_slack: Some(0.0),
            }),
            "free2-demo" => Self::from_config(GroupConfig {
                name: name.into(),
                generators: vec![
                    [3.0, 0.0, 0.0, 1.0 / 3.0],
                    [5.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0],
                ],
                relators: vec![],
                cocompact: false,
                prune_slack: None,
            }),
            _ => Err(Error::Group(format!(
                "unknown builtin group {name:?} (known: {})",
                BUILTIN_NAMES.join(", ")
            ))),
        }
    }

    pub fn alphabet_len(&self) -> usize {
        self.generators.len()
    }

    /// Product of the letters of `word`, left to right.
    pub fn word_matrix(&self, word: &[usize]) -> Isometry {
        word.iter()
            .fold(Isometry::IDENTITY, |acc, &l| acc * self.generators[l])
    }

    pub fn inverse_word(&self, word: &[usize]) -> Vec<usize> {
        word.iter().rev().map(|&l| self.inverse[l]).collect()
    }

    /// Concatenation with free cancellation at the seam.
    pub fn concat_reduced(&self, a: &[usize], b: &[usize]) -> Vec<usize> {
        let mut out = a.to_vec();
        for &l in b {
            match out.last() {
                Some(&last) if self.inverse[last] == l => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        out
    }

    /// Largest displacement of `p` by a single letter.
    pub fn max_generator_displacement(&self, p: crate::geometry::HPoint) -> f64 {
        use crate::geometry::{dist, Act};
        self.generators
            .iter()
            .map(|g| dist(p, g.act(p)))
            .fold(0.0, f64::max)
    }
}

/// Resolves a builtin name, or else reads a JSON group-spec file.
pub fn load_group(name_or_path: &str) -> Result<GroupSpec> {
    if BUILTIN_NAMES.contains(&name_or_path) {
        return GroupSpec::builtin(name_or_path);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::Config(format!(
            "{name_or_path:?} is neither a builtin group nor a readable file"
        )));
    }
    let text = std::fs::read_to_string(path)?;
    let cfg: GroupConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{name_or_path}: {e}")))?;
    GroupSpec::from_config(cfg)
}

/// Side pairings of the regular octagon centered at `i` with interior angles
/// `π/4`. Letter `k` translates along the diameter at chart angle `kπ/4` by
/// twice the inradius; letters `k` and `k + 4` are mutually inverse.
fn bolza_config() -> GroupConfig {
    // cosh(inradius) = cot(π/8) = 1 + √2.
    let ell = 2.0 * (1.0 + SQRT_2).acosh();
    let t = Isometry::translation_up(ell);
    let generators = (0..8)
        .map(|k| {
            let r = Isometry::rotation_about_i(k as f64 * PI / 4.0);
            (r * t * r.inverse()).to_array()
        })
        .collect();
    GroupConfig {
        name: "bolza".into(),
        generators,
        relators: vec![vec![0, 3, 6, 1, 4, 7, 2, 5]],
        cocompact: true,
        prune_slack: Some(bolza_circumradius()),
    }
}

/// Circumradius of the octagon: `cosh R = cot²(π/8) = (1 + √2)²`.
pub fn bolza_circumradius() -> f64 {
    ((1.0 + SQRT_2) * (1.0 + SQRT_2)).acosh()
}
