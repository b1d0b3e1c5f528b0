//! Experiment runner: resolves a config, runs the experiment, and assembles a
//! deterministic report.

mod config;
mod suites;

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, ExperimentKind, PairSelector, Synthetic};
pub use suites::{residual_suite, run_suite, CheckResult, Comparison, SUITES};

use crate::adjust::AdjustmentPair;
use crate::counting::{
    conj_radius, count_adjusted_many, count_conj, count_conj_direct, count_orbit, fit_growth,
    synthetic_series, CountKind, CountSeries, GrowthFit, SLOPE_FLAG,
};
use crate::error::{Error, Result};
use crate::group::{load_group, ConjClass, GroupSpec};
use crate::measures::{predict_ratio, sigma_product, RatioPrediction, SigmaEstimate, SigmaOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedSeries {
    pub name: String,
    pub series: CountSeries,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub series: String,
    pub fit: GrowthFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedSigma {
    pub name: String,
    pub estimate: SigmaEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Incomplete,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Incomplete => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub experiment: ExperimentKind,
    /// The resolved config, defaults filled in.
    pub config: ExperimentConfig,
    pub status: Status,
    pub series: Vec<NamedSeries>,
    pub fits: Vec<NamedFit>,
    pub ratios: Vec<RatioPrediction>,
    pub sigmas: Vec<NamedSigma>,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
    /// The only field that varies between identical runs.
    pub wall_clock_seconds: f64,
}

impl Report {
    fn new(config: ExperimentConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            experiment: config.experiment,
            config,
            status: Status::Pass,
            series: Vec::new(),
            fits: Vec::new(),
            ratios: Vec::new(),
            sigmas: Vec::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// JSON with the wall-clock field zeroed, for comparing runs.
    pub fn canonical_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.wall_clock_seconds = 0.0;
        Ok(serde_json::to_string_pretty(&r)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<prefix>.json`, plus one CSV per series: `<prefix>.csv` for the
    /// first and `<prefix>.<name>.csv` for the rest.
    pub fn write(&self, prefix: &str) -> Result<Vec<String>> {
        let mut written = Vec::new();
        let json = format!("{prefix}.json");
        if let Some(dir) = Path::new(&json).parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(&json, self.to_json()? + "\n")?;
        written.push(json);
        for (i, s) in self.series.iter().enumerate() {
            let path = if i == 0 {
                format!("{prefix}.csv")
            } else {
                format!("{prefix}.{}.csv", s.name)
            };
            std::fs::write(&path, s.series.to_csv())?;
            written.push(path);
        }
        Ok(written)
    }

    fn push_series(&mut self, name: &str, series: CountSeries) {
        if !series.all_complete() {
            let bad: Vec<String> = series
                .t_grid
                .iter()
                .zip(&series.complete)
                .filter(|(_, &c)| !c)
                .map(|(t, _)| t.to_string())
                .collect();
            self.warnings.push(format!(
                "series {name}: enumeration incomplete at T = {} (word cap {})",
                bad.join(", "),
                series.meta.word_cap
            ));
        }
        if series.meta.degenerate > 0 {
            self.warnings.push(format!(
                "series {name}: {} cosets skipped with g·x on the axis",
                series.meta.degenerate
            ));
        }
        self.series.push(NamedSeries {
            name: name.into(),
            series,
        });
    }

    /// Fits a series; a missing expected slope means no flag check.
    fn fit(&mut self, name: &str, series: &CountSeries, expected: Option<f64>) {
        match fit_growth(series, expected.unwrap_or(f64::NAN), None) {
            Ok(fit) => {
                if let Some(e) = expected {
                    self.checks.push(CheckResult::at_most(
                        "fit",
                        &format!("{name}-slope"),
                        (fit.slope - e).abs(),
                        SLOPE_FLAG,
                        fit.n_points,
                    ));
                }
                self.fits.push(NamedFit {
                    series: name.into(),
                    fit,
                });
            }
            Err(Error::InsufficientData(msg)) => {
                self.warnings.push(format!("series {name}: no fit, {msg}"));
            }
            Err(e) => self
                .warnings
                .push(format!("series {name}: fit failed: {e}")),
        }
    }

    fn finish(&mut self, fit_bearing: bool) {
        let incomplete = self.series.iter().any(|s| !s.series.all_complete());
        self.status = if self.checks.iter().any(|c| !c.passed) {
            Status::Fail
        } else if fit_bearing && incomplete {
            Status::Incomplete
        } else {
            Status::Pass
        };
    }
}

fn group_of(cfg: &ExperimentConfig) -> Result<GroupSpec> {
    load_group(cfg.group.as_deref().unwrap_or("bolza"))
}

fn class_of(g: &GroupSpec, cfg: &ExperimentConfig) -> Result<ConjClass> {
    let word = cfg.class_word.as_deref().unwrap_or(&[0]);
    if let Some(&l) = word.iter().find(|&&l| l >= g.alphabet_len()) {
        return Err(Error::Config(format!(
            "class word letter {l} outside the alphabet of {} letters",
            g.alphabet_len()
        )));
    }
    ConjClass::from_word(g, word)
}

fn sigma_opts(cfg: &ExperimentConfig) -> SigmaOptions {
    SigmaOptions {
        n_nodes: cfg.n_nodes.unwrap_or(256),
        delta: cfg.delta.unwrap_or(1.0),
        ..SigmaOptions::default()
    }
}

/// Growth rate expected for a count kind on a cocompact group with `δ = 1`.
fn expected_slope(kind: CountKind) -> f64 {
    match kind {
        CountKind::Orbit | CountKind::Adjusted => 1.0,
        CountKind::Conj => 0.5,
    }
}

/// Reads a series from a count-series JSON, a report JSON (first series), or
/// a `T,N,complete` CSV.
pub fn load_series(path: &str) -> Result<CountSeries> {
    let text = std::fs::read_to_string(path)?;
    if path.ends_with(".csv") {
        return parse_series_csv(&text);
    }
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let inner = match v.get("series") {
        Some(serde_json::Value::Array(items)) => items
            .first()
            .and_then(|s| s.get("series"))
            .cloned()
            .ok_or_else(|| Error::Config(format!("{path}: report holds no series")))?,
        _ => v,
    };
    Ok(serde_json::from_value(inner)?)
}

fn parse_series_csv(text: &str) -> Result<CountSeries> {
    let mut s = synthetic_series(1.0, 0.0, &[]);
    s.meta.group = "csv".into();
    s.meta.pair = None;
    let bad = |line: &str| Error::Config(format!("bad series line {line:?}"));
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(bad(line));
        }
        s.t_grid.push(f[0].parse().map_err(|_| bad(line))?);
        s.n.push(f[1].parse().map_err(|_| bad(line))?);
        s.complete.push(f[2].parse().map_err(|_| bad(line))?);
    }
    Ok(s)
}

/// Runs the experiment named by `config` and writes its outputs when an
/// output prefix is set.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let cfg = config.resolved()?;
    let mut r = Report::new(cfg.clone());
    let fit_bearing = match cfg.experiment {
        ExperimentKind::CountOrbit => {
            let g = group_of(&cfg)?;
            let s = count_orbit(&g, cfg.point_x(), cfg.point_y(), &cfg.grid()?, cap(&cfg))?;
            let expected = cfg
                .expected_slope
                .or(g.cocompact.then(|| expected_slope(CountKind::Orbit)));
            r.fit("orbit", &s, expected);
            r.push_series("orbit", s);
            true
        }
        ExperimentKind::CountConj => {
            run_conj(&cfg, &mut r)?;
            true
        }
        ExperimentKind::CountAdjusted => {
            let g = group_of(&cfg)?;
            let c = class_of(&g, &cfg)?;
            let pair = cfg.pair.clone().unwrap_or(PairSelector::Zero).build(
                &c,
                cfg.point_x(),
                cfg.point_y(),
            )?;
            let s = count_adjusted_many(&g, &c, &[&pair], cfg.point_x(), &cfg.grid()?, cap(&cfg))?
                .remove(0);
            let expected = cfg
                .expected_slope
                .or(g.cocompact.then(|| expected_slope(CountKind::Adjusted)));
            r.fit("adjusted", &s, expected);
            r.push_series("adjusted", s);
            true
        }
        ExperimentKind::FitGrowth => {
            let (s, name) = match (&cfg.series, cfg.synthetic) {
                (Some(path), _) => (load_series(path)?, "input"),
                (None, Some(syn)) => (synthetic_series(syn.a, syn.b, &cfg.grid()?), "synthetic"),
                (None, None) => unreachable!("resolved() sets a fixture"),
            };
            let expected = cfg.expected_slope.unwrap_or(expected_slope(s.kind));
            r.fit(name, &s, Some(expected));
            if r.fits.is_empty() {
                r.checks.push(CheckResult::at_least(
                    "fit",
                    &format!("{name}-usable-points"),
                    0.0,
                    4.0,
                    0,
                ));
            }
            r.push_series(name, s);
            true
        }
        ExperimentKind::RatioTest => {
            run_ratio(&cfg, &mut r)?;
            true
        }
        ExperimentKind::SigmaQuad => {
            let g = group_of(&cfg)?;
            let c = class_of(&g, &cfg)?;
            let (x, y) = (cfg.point_x(), cfg.point_y());
            let pair = cfg
                .pair
                .clone()
                .unwrap_or(PairSelector::Zero)
                .build(&c, x, y)?;
            let (sg, sx) = sigma_product(
                &c,
                &pair,
                x,
                crate::geometry::HPoint::ORIGIN,
                &sigma_opts(&cfg),
            )?;
            for (name, s) in [("sigma_gamma", sg), ("sigma_x", sx)] {
                r.checks.push(CheckResult::at_most(
                    "quadrature",
                    &format!("{name}-relative-error"),
                    s.quadrature_error / s.value.abs(),
                    1e-6,
                    2 * s.n_nodes,
                ));
                r.sigmas.push(NamedSigma {
                    name: name.into(),
                    estimate: s,
                });
            }
            false
        }
        ExperimentKind::Check => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let suite = cfg.suite.as_deref().unwrap_or("all");
            r.checks = run_suite(suite, &mut rng, cfg.samples.unwrap_or(1000))?;
            false
        }
    };
    r.finish(fit_bearing);
    r.wall_clock_seconds = start.elapsed().as_secs_f64();
    if let Some(prefix) = &cfg.output {
        r.write(prefix)?;
    }
    Ok(r)
}

fn cap(cfg: &ExperimentConfig) -> usize {
    cfg.word_cap.unwrap_or(64)
}

fn run_conj(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let g = group_of(cfg)?;
    let c = class_of(&g, cfg)?;
    let (x, y) = (cfg.point_x(), cfg.point_y());
    let grid = cfg.grid()?;
    let s = count_conj(&g, &c, x, y, &grid, cap(cfg))?;
    let expected = cfg
        .expected_slope
        .or(g.cocompact.then(|| expected_slope(CountKind::Conj)));
    r.fit("conj", &s, expected);

    let cross = cfg.cross_check_t_max.unwrap_or(0.0);
    let small: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&t| t <= cross + 1e-9)
        .collect();
    r.push_series("conj", s.clone());
    if small.is_empty() {
        return Ok(());
    }
    let radius = conj_radius(&c, x, y, *small.last().unwrap());
    let direct = count_conj_direct(&g, &c, x, y, &small, radius, cap(cfg))?;
    let mut compared = 0;
    let mut mismatches = 0;
    let mut worst = None;
    for (i, &t) in small.iter().enumerate() {
        let j = grid.iter().position(|&u| u == t).unwrap();
        if s.complete[j] && direct.complete[i] {
            compared += 1;
            if s.n[j] != direct.n[i] {
                mismatches += 1;
                worst.get_or_insert(format!(
                    "T={t}: cosets {} vs direct {}",
                    s.n[j], direct.n[i]
                ));
            }
        }
    }
    let mut check = CheckResult::at_most(
        "cross-check",
        "coset-direct-mismatches",
        mismatches as f64,
        0.0,
        compared,
    );
    if compared == 0 {
        check.passed = false;
        check.worst_case = Some("no grid point complete in both counts".into());
    } else if let Some(w) = worst {
        check = check.with_worst(w);
    }
    r.checks.push(check);
    r.push_series("conj-direct", direct);
    Ok(())
}

fn run_ratio(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let g = group_of(cfg)?;
    let c = class_of(&g, cfg)?;
    let (x, y) = (cfg.point_x(), cfg.point_y());
    let grid = cfg.grid()?;
    let step = cfg.t_step.unwrap_or(0.5);
    let pa = cfg
        .pair
        .clone()
        .unwrap_or(PairSelector::Smooth(1.0))
        .build(&c, x, y)?;
    let pb = cfg
        .pair_b
        .clone()
        .unwrap_or(PairSelector::Zero)
        .build(&c, x, y)?;
    // Constant adjustments shift every height by c₁ + c₂ = one grid step.
    let shift = AdjustmentPair::constant(0.5 * step, 0.5 * step);
    let zero = AdjustmentPair::zero();
    let mut all = count_adjusted_many(&g, &c, &[&pa, &pb, &shift, &zero], x, &grid, cap(cfg))?;
    let s_zero = all.pop().unwrap();
    let s_shift = all.pop().unwrap();
    let sb = all.pop().unwrap();
    let sa = all.pop().unwrap();

    let pred = predict_ratio(
        &c,
        &pa,
        &pb,
        x,
        crate::geometry::HPoint::ORIGIN,
        &sa,
        &sb,
        &sigma_opts(cfg),
    )?;
    if pred.low_confidence {
        r.warnings.push(format!(
            "ratio {} / {}: low confidence (fewer than three complete points or counts below 100)",
            pred.pair_a, pred.pair_b
        ));
    }
    r.checks.push(
        CheckResult::at_most(
            "ratio",
            "relative-deviation",
            pred.rel_dev,
            0.15,
            pred.t_used.len(),
        )
        .with_worst(format!(
            "empirical {} vs predicted {}",
            pred.empirical_ratio, pred.predicted_ratio
        )),
    );

    let mut compared = 0;
    let mut mismatches = 0;
    let mut worst = None;
    for (i, t) in grid.iter().enumerate().take(grid.len().saturating_sub(1)) {
        if s_shift.complete[i] && s_zero.complete[i + 1] {
            compared += 1;
            if s_shift.n[i] != s_zero.n[i + 1] {
                mismatches += 1;
                worst.get_or_insert(format!(
                    "T={t}: shifted {} vs zero {}",
                    s_shift.n[i],
                    s_zero.n[i + 1]
                ));
            }
        }
    }
    let mut check = CheckResult::at_most(
        "ratio",
        "shift-law-mismatches",
        mismatches as f64,
        0.0,
        compared,
    );
    if compared == 0 {
        check.passed = false;
        check.worst_case = Some("no comparable grid points".into());
    } else if let Some(w) = worst {
        check = check.with_worst(w);
    }
    r.checks.push(check);

    r.ratios.push(pred);
    r.push_series("pair-a", sa);
    r.push_series("pair-b", sb);
    r.push_series("shift-constant", s_shift);
    r.push_series("shift-zero", s_zero);
    Ok(())
}

/// Property suite run as a report.
pub fn check_properties(suite: &str, seed: u64, samples: usize) -> Result<Report> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Check);
    cfg.suite = Some(suite.into());
    cfg.seed = seed;
    cfg.samples = Some(samples);
    run(&cfg)
}
