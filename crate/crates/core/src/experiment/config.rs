use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adjust::AdjustmentPair;
use crate::error::{Error, Result};
use crate::geometry::HPoint;
use crate::group::ConjClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CountOrbit,
    CountConj,
    CountAdjusted,
    FitGrowth,
    RatioTest,
    SigmaQuad,
    Check,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CountOrbit => "count-orbit",
            ExperimentKind::CountConj => "count-conj",
            ExperimentKind::CountAdjusted => "count-adjusted",
            ExperimentKind::FitGrowth => "fit-growth",
            ExperimentKind::RatioTest => "ratio-test",
            ExperimentKind::SigmaQuad => "sigma-quad",
            ExperimentKind::Check => "check",
        }
    }
}

/// Adjustment pair chosen by name: `zero`, `constant:c1,c2`, `theorem-a`,
/// or `smooth:amplitude`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PairSelector {
    Zero,
    Constant(f64, f64),
    TheoremA,
    Smooth(f64),
}

impl PairSelector {
    pub fn build(&self, c: &ConjClass, x: HPoint, y: HPoint) -> Result<AdjustmentPair> {
        Ok(match *self {
            PairSelector::Zero => AdjustmentPair::zero(),
            PairSelector::Constant(a, b) => AdjustmentPair::constant(a, b),
            PairSelector::TheoremA => AdjustmentPair::theorem_a(Arc::new(c.clone()), x, y)?,
            PairSelector::Smooth(a) => AdjustmentPair::smooth(c.root_length, a),
        })
    }
}

impl fmt::Display for PairSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSelector::Zero => write!(f, "zero"),
            PairSelector::Constant(a, b) => write!(f, "constant:{a},{b}"),
            PairSelector::TheoremA => write!(f, "theorem-a"),
            PairSelector::Smooth(a) => write!(f, "smooth:{a}"),
        }
    }
}

impl FromStr for PairSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown adjustment pair {s:?}"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        match s.split_once(':') {
            None if s == "zero" => Ok(PairSelector::Zero),
            None if s == "theorem-a" => Ok(PairSelector::TheoremA),
            Some(("smooth", a)) => Ok(PairSelector::Smooth(num(a)?)),
            Some(("constant", rest)) => {
                let (a, b) = rest.split_once(',').ok_or_else(bad)?;
                Ok(PairSelector::Constant(num(a)?, num(b)?))
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for PairSelector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PairSelector> for String {
    fn from(p: PairSelector) -> String {
        p.to_string()
    }
}

/// `N(T) = round(a·e^{bT})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Synthetic {
    pub a: f64,
    pub b: f64,
}

/// Everything an experiment needs. Unset fields take per-experiment defaults
/// from [`ExperimentConfig::resolved`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Builtin group name or path to a group-spec JSON file.
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub x: Option<[f64; 2]>,
    #[serde(default)]
    pub y: Option<[f64; 2]>,
    /// Word of `γ`; a single generator index is the word of length one.
    #[serde(default)]
    pub class_word: Option<Vec<usize>>,
    #[serde(default)]
    pub pair: Option<PairSelector>,
    /// Reference pair of a ratio test.
    #[serde(default)]
    pub pair_b: Option<PairSelector>,
    #[serde(default)]
    pub t_min: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub t_step: Option<f64>,
    #[serde(default)]
    pub word_cap: Option<usize>,
    #[serde(default)]
    pub n_nodes: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub samples: Option<usize>,
    /// Property suite for `check`.
    #[serde(default)]
    pub suite: Option<String>,
    /// Count series JSON for `fit-growth`.
    #[serde(default)]
    pub series: Option<String>,
    #[serde(default)]
    pub synthetic: Option<Synthetic>,
    #[serde(default)]
    pub expected_slope: Option<f64>,
    /// Largest `T` for the direct cross-check of `count-conj`; `0` disables it.
    #[serde(default)]
    pub cross_check_t_max: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    /// Output path prefix; `<prefix>.json` and `<prefix>.csv` are written.
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            group: None,
            x: None,
            y: None,
            class_word: None,
            pair: None,
            pair_b: None,
            t_min: None,
            t_max: None,
            t_step: None,
            word_cap: None,
            n_nodes: None,
            seed: 0,
            samples: None,
            suite: None,
            series: None,
            synthetic: None,
            expected_slope: None,
            cross_check_t_max: None,
            delta: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Copy with every applicable default filled in and inputs validated.
    pub fn resolved(&self) -> Result<Self> {
        use ExperimentKind::*;
        let mut c = self.clone();
        let kind = c.experiment;
        if kind != Check && kind != FitGrowth {
            c.group.get_or_insert_with(|| "bolza".into());
        }
        let (lo, hi) = match kind {
            CountOrbit => (6.0, 12.0),
            CountConj => (10.0, 16.0),
            CountAdjusted | RatioTest => (6.0, 9.0),
            FitGrowth => (6.0, 16.0),
            SigmaQuad | Check => (0.0, 0.0),
        };
        if !matches!(kind, SigmaQuad | Check) {
            c.t_min.get_or_insert(lo);
            c.t_max.get_or_insert(hi);
            c.t_step.get_or_insert(0.5);
            c.word_cap.get_or_insert(64);
        }
        let off_axis = [0.2, 1.1];
        match kind {
            CountOrbit => {
                c.x.get_or_insert([0.0, 1.0]);
                c.y.get_or_insert(c.x.unwrap());
            }
            CountConj => {
                c.x.get_or_insert([0.0, 1.0]);
                c.y.get_or_insert(c.x.unwrap());
                c.class_word.get_or_insert_with(|| vec![0]);
                c.cross_check_t_max.get_or_insert(12.0);
            }
            CountAdjusted => {
                c.x.get_or_insert(off_axis);
                c.y.get_or_insert([0.5, 0.8]);
                c.class_word.get_or_insert_with(|| vec![0]);
                c.pair.get_or_insert(PairSelector::Smooth(0.3));
            }
            RatioTest => {
                c.x.get_or_insert(off_axis);
                c.y.get_or_insert([0.5, 0.8]);
                c.class_word.get_or_insert_with(|| vec![0]);
                c.pair.get_or_insert(PairSelector::Smooth(1.0));
                c.pair_b.get_or_insert(PairSelector::Zero);
                c.n_nodes.get_or_insert(256);
            }
            SigmaQuad => {
                c.x.get_or_insert(off_axis);
                c.y.get_or_insert([0.5, 0.8]);
                c.class_word.get_or_insert_with(|| vec![0]);
                c.pair.get_or_insert(PairSelector::Smooth(0.3));
                c.n_nodes.get_or_insert(256);
            }
            FitGrowth => {
                if c.series.is_none() && c.synthetic.is_none() {
                    c.synthetic = Some(Synthetic { a: 3.0, b: 0.5 });
                }
                if c.series.is_some() && c.synthetic.is_some() {
                    return Err(Error::Config(
                        "give either a series file or a synthetic fixture".into(),
                    ));
                }
                if let Some(s) = c.synthetic {
                    c.expected_slope.get_or_insert(s.b);
                }
            }
            Check => {
                c.suite.get_or_insert_with(|| "all".into());
                c.samples.get_or_insert(1000);
            }
        }
        c.delta.get_or_insert(1.0);
        for p in [c.x, c.y].into_iter().flatten() {
            HPoint::new(p[0], p[1]).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(0) = c.word_cap {
            return Err(Error::Config("word_cap must be at least 1".into()));
        }
        if let Some(n) = c.n_nodes {
            if n < 2 {
                return Err(Error::Config("n_nodes must be at least 2".into()));
            }
        }
        if let Some(d) = c.delta {
            if !(d > 0.0) {
                return Err(Error::Config("delta must be positive".into()));
            }
        }
        if let (Some(lo), Some(hi), Some(step)) = (c.t_min, c.t_max, c.t_step) {
            crate::counting::t_grid(lo, hi, step)?;
            if lo < 0.0 {
                return Err(Error::Config("t_min must be non-negative".into()));
            }
        }
        Ok(c)
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        match (self.t_min, self.t_max, self.t_step) {
            (Some(lo), Some(hi), Some(step)) => crate::counting::t_grid(lo, hi, step),
            _ => Err(Error::Config("T grid is not set".into())),
        }
    }

    pub fn point_x(&self) -> HPoint {
        let p = self.x.unwrap_or([0.0, 1.0]);
        HPoint::new_unchecked(p[0], p[1])
    }

    pub fn point_y(&self) -> HPoint {
        let p = self.y.or(self.x).unwrap_or([0.0, 1.0]);
        HPoint::new_unchecked(p[0], p[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_selector_round_trip() {
        for s in ["zero", "theorem-a", "smooth:0.3", "constant:0.25,-1"] {
            let p: PairSelector = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("smooth".parse::<PairSelector>().is_err());
        assert!("constant:1".parse::<PairSelector>().is_err());
    }

    #[test]
    fn config_json_and_defaults() {
        let c =
            ExperimentConfig::from_json(r#"{"experiment": "count-orbit", "t_min": 0, "t_max": 5}"#)
                .unwrap();
        let r = c.resolved().unwrap();
        assert_eq!(r.group.as_deref(), Some("bolza"));
        assert_eq!(r.grid().unwrap().len(), 11);
        // The default lower end lies above this top end.
        let c =
            ExperimentConfig::from_json(r#"{"experiment": "count-orbit", "t_max": 5}"#).unwrap();
        assert!(c.resolved().is_err());
        let bad = ExperimentConfig::from_json(r#"{"experiment": "count-orbit", "bogus": 1}"#);
        assert!(matches!(bad, Err(Error::Config(_))));
        let c =
            ExperimentConfig::from_json(r#"{"experiment": "ratio-test", "pair": "smooth:0.2"}"#)
                .unwrap();
        assert_eq!(c.pair, Some(PairSelector::Smooth(0.2)));
        let c =
            ExperimentConfig::from_json(r#"{"experiment": "count-orbit", "x": [0, -1]}"#).unwrap();
        assert!(c.resolved().is_err());
    }
}
