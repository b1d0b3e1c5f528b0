use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypcount::experiment::{
    run, ExperimentConfig, ExperimentKind, PairSelector, Report, Synthetic,
};
use hypcount::Error;

/// Counting experiments for Fuchsian groups acting on the hyperbolic plane.
#[derive(Parser, Debug)]
#[command(name = "hypcount", version)]
struct Cli {
    /// JSON experiment config; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "HYPCOUNT_WORKERS")]
    workers: Option<usize>,

    /// Print only a one-line summary per check and series, not the JSON report.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count orbit points g·y within distance T of x.
    CountOrbit(Common),
    /// Count the conjugacy class of γ by its displacement of (x, y).
    CountConj {
        #[command(flatten)]
        common: Common,
        /// Largest T of the direct conjugate-counting cross-check (0 disables it).
        #[arg(long)]
        cross_check_t_max: Option<f64>,
    },
    /// Count cosets of the centralizer of γ by adjusted height.
    CountAdjusted(Common),
    /// Fit the exponential growth rate of a count series.
    FitGrowth {
        #[command(flatten)]
        common: Common,
        /// Series JSON, report JSON or T,N,complete CSV.
        #[arg(long, conflicts_with = "synthetic")]
        series: Option<String>,
        /// Synthetic series a·e^{bT}, given as `a,b`.
        #[arg(long, value_parser = parse_pair)]
        synthetic: Option<(f64, f64)>,
    },
    /// Compare the predicted and empirical ratio of two adjusted counts.
    RatioTest(Common),
    /// Evaluate the skinning-measure integrals of an adjustment pair.
    SigmaQuad(Common),
    /// Run a seeded property suite.
    Check {
        /// Suite name, or `all`.
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the experiment named in the --config file.
    Run,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Builtin group name or path to a group JSON file.
    #[arg(long)]
    group: Option<String>,
    /// Basepoint as `re,im`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    x: Option<(f64, f64)>,
    /// Target point as `re,im`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    y: Option<(f64, f64)>,
    /// Word of γ as comma-separated letter indices.
    #[arg(long = "class", value_delimiter = ',')]
    class_word: Option<Vec<usize>>,
    /// Adjustment pair: zero, constant:c1,c2, theorem-a or smooth:a.
    #[arg(long)]
    pair: Option<PairSelector>,
    /// Reference pair of a ratio test.
    #[arg(long)]
    pair_b: Option<PairSelector>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_step: Option<f64>,
    #[arg(long)]
    word_cap: Option<usize>,
    #[arg(long)]
    n_nodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    expected_slope: Option<f64>,
    /// Output prefix: writes <prefix>.json and <prefix>.csv.
    #[arg(long)]
    output: Option<String>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or("expected two comma-separated numbers")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

impl Common {
    fn apply(self, c: &mut ExperimentConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if self.$f.is_some() { c.$f = self.$f; } )* };
        }
        set!(
            group,
            class_word,
            pair,
            pair_b,
            t_min,
            t_max,
            t_step,
            word_cap,
            n_nodes,
            samples,
            delta,
            expected_slope,
            output
        );
        if let Some((a, b)) = self.x {
            c.x = Some([a, b]);
        }
        if let Some((a, b)) = self.y {
            c.y = Some([a, b]);
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
    }
}

fn build_config(cli: Cli) -> hypcount::Result<ExperimentConfig> {
    let base = match &cli.config {
        Some(path) => Some(ExperimentConfig::from_json(&std::fs::read_to_string(
            path,
        )?)?),
        None => None,
    };
    let start = |kind: ExperimentKind| {
        let mut c = base.clone().unwrap_or_else(|| ExperimentConfig::new(kind));
        c.experiment = kind;
        c
    };
    let config = match cli.command {
        Command::CountOrbit(common) => {
            let mut c = start(ExperimentKind::CountOrbit);
            common.apply(&mut c);
            c
        }
        Command::CountConj {
            common,
            cross_check_t_max,
        } => {
            let mut c = start(ExperimentKind::CountConj);
            common.apply(&mut c);
            if cross_check_t_max.is_some() {
                c.cross_check_t_max = cross_check_t_max;
            }
            c
        }
        Command::CountAdjusted(common) => {
            let mut c = start(ExperimentKind::CountAdjusted);
            common.apply(&mut c);
            c
        }
        Command::FitGrowth {
            common,
            series,
            synthetic,
        } => {
            let mut c = start(ExperimentKind::FitGrowth);
            common.apply(&mut c);
            if series.is_some() {
                c.series = series;
                c.synthetic = None;
            }
            if let Some((a, b)) = synthetic {
                c.synthetic = Some(Synthetic { a, b });
                c.series = None;
            }
            c
        }
        Command::RatioTest(common) => {
            let mut c = start(ExperimentKind::RatioTest);
            common.apply(&mut c);
            c
        }
        Command::SigmaQuad(common) => {
            let mut c = start(ExperimentKind::SigmaQuad);
            common.apply(&mut c);
            c
        }
        Command::Check { suite, common } => {
            let mut c = start(ExperimentKind::Check);
            common.apply(&mut c);
            c.suite = Some(suite);
            c
        }
        Command::Run => base.ok_or_else(|| Error::Config("run needs --config".into()))?,
    };
    Ok(config)
}

fn summarize(r: &Report) {
    for s in &r.series {
        let last = s.series.n.last().copied().unwrap_or(0);
        let t = s.series.t_grid.last().copied().unwrap_or(0.0);
        println!(
            "series {}: N({t}) = {last}, complete {}",
            s.name,
            s.series.all_complete()
        );
    }
    for f in &r.fits {
        println!(
            "fit {}: slope {:.4} ± {:.4}",
            f.series, f.fit.slope, f.fit.stderr
        );
    }
    for p in &r.ratios {
        println!(
            "ratio {} / {}: predicted {:.4}, empirical {:.4}, deviation {:.4}",
            p.pair_a, p.pair_b, p.predicted_ratio, p.empirical_ratio, p.rel_dev
        );
    }
    for s in &r.sigmas {
        println!(
            "{}: {:.10} ± {:.2e}",
            s.name, s.estimate.value, s.estimate.quadrature_error
        );
    }
    for c in &r.checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{mark} {}/{}: {:.3e} vs {:.3e}",
            c.suite, c.name, c.statistic, c.bound
        );
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InsufficientData(_) | Error::Numerical(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("hypcount: cannot set worker count: {e}");
            return ExitCode::from(2);
        }
    }
    let quiet = cli.quiet;
    let result = build_config(cli).and_then(|c| {
        let prints_json = c.output.is_none() && !quiet;
        run(&c).map(|r| (r, prints_json))
    });
    match result {
        Ok((report, prints_json)) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if prints_json {
                match serde_json::to_string_pretty(&report) {
                    Ok(s) => println!("{s}"),
                    Err(e) => {
                        eprintln!("hypcount: {e}");
                        return ExitCode::from(2);
                    }
                }
            } else {
                summarize(&report);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("hypcount: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
