//! Seeded Monte-Carlo experiments that regenerate the benchmark tables and
//! the bound/property suites, emitting one CSV row per (cell, kind, metric).
//!
//! Trial `i` of a cell always draws from the same child stream, so results do
//! not depend on scheduling. Statistics are reduced in trial order.

mod checks;
mod output;
mod suites;
mod tables;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matgen::ClassTag;
use crate::randmats::{KindTag, RngStream};

pub use checks::{check, reference, CheckOutcome};
pub use output::{fmt_e, render_table, to_csv, CSV_HEADER};
pub use suites::{policy_sweep, Policy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Table1,
    Table2,
    Table3,
    Table4,
    Bounds,
    Srft,
    Genp,
    Cur,
    Scaling,
    Policy,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Table1,
        Experiment::Table2,
        Experiment::Table3,
        Experiment::Table4,
        Experiment::Bounds,
        Experiment::Srft,
        Experiment::Genp,
        Experiment::Cur,
        Experiment::Scaling,
        Experiment::Policy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Table1 => "table1",
            Experiment::Table2 => "table2",
            Experiment::Table3 => "table3",
            Experiment::Table4 => "table4",
            Experiment::Bounds => "bounds",
            Experiment::Srft => "srft",
            Experiment::Genp => "genp",
            Experiment::Cur => "cur",
            Experiment::Scaling => "scaling",
            Experiment::Policy => "policy",
        }
    }

    fn stream_id(self) -> u64 {
        Experiment::ALL.iter().position(|&e| e == self).unwrap_or(0) as u64 + 1
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.to_ascii_lowercase())
            .ok_or_else(|| config("experiment", format!("unknown experiment {s:?}")))
    }
}

pub(crate) fn config(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    /// `(n, r)` or `(n, ρ)` cells, depending on the experiment.
    pub sizes: Vec<(usize, usize)>,
    pub trials: usize,
    pub seed: u64,
    pub kinds: Vec<KindTag>,
    /// Class filter for the preconditioning and scaling experiments.
    pub classes: Vec<ClassTag>,
    /// Monitor threshold for trailing solvers.
    pub tau: f64,
    /// Experiment-specific tolerance: success residual for `genp`,
    /// dominance tolerance for `cur`.
    pub tol: f64,
    /// Power-transform exponent for leading sketches.
    pub power: usize,
    pub output_path: Option<PathBuf>,
}

pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SEED: u64 = 42;

fn grid(ns: &[usize], rs: &[usize]) -> Vec<(usize, usize)> {
    ns.iter()
        .flat_map(|&n| rs.iter().map(move |&r| (n, r)))
        .collect()
}

impl ExperimentSpec {
    /// The published protocol for `experiment` at desk scale.
    pub fn defaults(experiment: Experiment) -> Self {
        use KindTag::*;
        let (sizes, kinds, tol, trials) = match experiment {
            Experiment::Table1 => (
                grid(&[64, 128, 256], &[2, 4, 8]),
                vec![Gaussian, Subcirculant],
                0.0,
                DEFAULT_TRIALS,
            ),
            Experiment::Table2 => (
                grid(&[64, 128, 256], &[8, 32]),
                vec![Gaussian, Subcirculant],
                0.0,
                DEFAULT_TRIALS,
            ),
            Experiment::Table3 => (
                grid(&[64, 128, 256], &[1, 2, 4]),
                vec![Gaussian],
                0.0,
                DEFAULT_TRIALS,
            ),
            Experiment::Table4 => (
                grid(&[128], &[1, 2, 4, 8]),
                vec![Gaussian, SignedSparse],
                0.0,
                DEFAULT_TRIALS,
            ),
            Experiment::Bounds => (
                vec![(32, 32), (64, 16), (64, 32), (16, 16)],
                vec![Gaussian],
                0.0,
                2000,
            ),
            Experiment::Srft => (vec![(256, 8)], vec![Srft], 0.0, 2000),
            Experiment::Genp => (vec![(32, 1), (32, 2)], vec![Gaussian], 1e-8, 200),
            Experiment::Cur => (vec![(6, 2)], vec![Gaussian], 1e-10, 200),
            Experiment::Scaling => (vec![(128, 1), (128, 4)], vec![Gaussian], 0.0, 20),
            Experiment::Policy => (vec![(64, 2), (128, 4)], vec![Gaussian], 0.0, DEFAULT_TRIALS),
        };
        let classes = match experiment {
            Experiment::Table4 => ClassTag::ALL.to_vec(),
            Experiment::Scaling => vec![ClassTag::T1n],
            _ => Vec::new(),
        };
        ExperimentSpec {
            experiment,
            sizes,
            trials,
            seed: DEFAULT_SEED,
            kinds,
            classes,
            tau: crate::subspace::DEFAULT_TAU,
            tol,
            power: 0,
            output_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config("trials", "must be at least 1"));
        }
        if self.sizes.is_empty() {
            return Err(config("sizes", "at least one size is required"));
        }
        if self.kinds.is_empty() {
            return Err(config("kinds", "at least one multiplier kind is required"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(config(
                "tau",
                format!("must be positive and finite, got {}", self.tau),
            ));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(config(
                "tol",
                format!("must be non-negative and finite, got {}", self.tol),
            ));
        }
        let needs_classes = matches!(self.experiment, Experiment::Table4 | Experiment::Scaling);
        if needs_classes && self.classes.is_empty() {
            return Err(config("classes", "at least one class is required"));
        }
        for &(n, r) in &self.sizes {
            self.validate_size(n, r)?;
        }
        Ok(())
    }

    fn validate_size(&self, n: usize, r: usize) -> Result<()> {
        use Experiment::*;
        if n == 0 || r == 0 {
            return Err(config("sizes", format!("({n}, {r}) must be positive")));
        }
        let real_only = matches!(
            self.experiment,
            Table1 | Table3 | Table4 | Scaling | Policy | Genp
        );
        for &kind in &self.kinds {
            if real_only && kind == KindTag::Srft {
                return Err(config(
                    "kinds",
                    format!(
                        "{} needs real multipliers, srft is complex",
                        self.experiment
                    ),
                ));
            }
            if kind == KindTag::SignedSparse && 2 * r > n {
                return Err(config(
                    "kinds",
                    format!("signed pattern needs 2r <= n, got n={n}, r={r}"),
                ));
            }
            if kind == KindTag::SignedSparse && matches!(self.experiment, Table2 | Table3) {
                return Err(config(
                    "kinds",
                    "signed multipliers only apply to augmentation experiments",
                ));
            }
        }
        match self.experiment {
            Table1 | Table2 | Table3 | Policy if r >= n => {
                Err(config("sizes", format!("need r < n, got n={n}, r={r}")))
            }
            Table4 | Scaling if 4 * r > n => Err(config(
                "sizes",
                format!("classes need 4r <= n, got n={n}, r={r}"),
            )),
            Srft if r > n || r + 20 > n => Err(config(
                "sizes",
                format!("need rho + 20 <= n, got n={n}, rho={r}"),
            )),
            Genp if 4 * r > n => Err(config(
                "sizes",
                format!("adversarial block 2k must fit in n/2, got n={n}, k={r}"),
            )),
            Cur if r > n => Err(config("sizes", format!("skeleton rank {r} exceeds {n}"))),
            _ => Ok(()),
        }
    }

    pub(crate) fn stream(&self) -> RngStream {
        RngStream::new(self.seed, self.experiment.stream_id())
    }
}

/// Summary of one metric over the trials of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub failures: usize,
    pub trials: usize,
}

impl TrialStats {
    /// Statistics over the successful `values`; `failures` trials produced
    /// no value. All fields are NaN when nothing succeeded.
    pub fn from_values(values: &[f64], failures: usize) -> Self {
        let trials = values.len() + failures;
        if values.is_empty() {
            return TrialStats {
                mean: f64::NAN,
                std: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
                failures,
                trials,
            };
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        TrialStats {
            mean: mean.clamp(min, max),
            std,
            min,
            max,
            failures,
            trials,
        }
    }

    /// Splits per-trial outcomes into values and a failure count.
    pub fn from_outcomes(outcomes: &[Option<f64>]) -> Self {
        let values: Vec<f64> = outcomes.iter().flatten().copied().collect();
        TrialStats::from_values(&values, outcomes.len() - values.len())
    }

    /// A single deterministic value, e.g. a theoretical bound.
    pub fn constant(value: f64) -> Self {
        TrialStats {
            mean: value,
            std: 0.0,
            min: value,
            max: value,
            failures: 0,
            trials: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub experiment: String,
    pub class: String,
    pub n: usize,
    pub r_or_rho: usize,
    pub kind: String,
    pub metric: String,
    pub stats: TrialStats,
    pub seed: u64,
}

/// Rows of one run plus its wall time.
#[derive(Debug, Clone)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub rows: Vec<CsvRow>,
    pub elapsed: Duration,
}

impl Report {
    pub fn csv(&self) -> String {
        to_csv(&self.rows)
    }

    /// First row matching the given cell, or `None`.
    pub fn find(
        &self,
        class: &str,
        n: usize,
        r: usize,
        kind: &str,
        metric: &str,
    ) -> Option<&CsvRow> {
        self.rows.iter().find(|row| {
            row.class == class
                && row.n == n
                && row.r_or_rho == r
                && row.kind == kind
                && row.metric == metric
        })
    }
}

pub(crate) struct RowSink<'a> {
    spec: &'a ExperimentSpec,
    pub rows: Vec<CsvRow>,
}

impl<'a> RowSink<'a> {
    pub fn new(spec: &'a ExperimentSpec) -> Self {
        RowSink {
            spec,
            rows: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        class: &str,
        n: usize,
        r: usize,
        kind: &str,
        metric: &str,
        stats: TrialStats,
    ) {
        self.rows.push(CsvRow {
            experiment: self.spec.experiment.name().to_string(),
            class: class.to_string(),
            n,
            r_or_rho: r,
            kind: kind.to_string(),
            metric: metric.to_string(),
            stats,
            seed: self.spec.seed,
        });
    }
}

/// Runs the experiment and, when `output_path` is set, writes the CSV there.
pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let start = Instant::now();
    log::info!(
        "{}: {} cells, {} trials, seed {}",
        spec.experiment,
        spec.sizes.len(),
        spec.trials,
        spec.seed
    );
    let rows = match spec.experiment {
        Experiment::Table1 => tables::table1(spec)?,
        Experiment::Table2 => tables::table2(spec)?,
        Experiment::Table3 => tables::table3(spec)?,
        Experiment::Table4 => tables::table4(spec)?,
        Experiment::Scaling => tables::scaling(spec)?,
        Experiment::Bounds => suites::bounds(spec)?,
        Experiment::Srft => suites::srft(spec)?,
        Experiment::Genp => suites::genp_suite(spec)?,
        Experiment::Cur => suites::cur_suite(spec)?,
        Experiment::Policy => suites::policy_sweep(spec, &Policy::defaults())?,
    };
    let elapsed = start.elapsed();
    log::info!("{} finished in {:.2?}", spec.experiment, elapsed);
    let report = Report {
        spec: spec.clone(),
        rows,
        elapsed,
    };
    if let Some(path) = &spec.output_path {
        std::fs::write(path, report.csv())
            .map_err(|e| config("output_path", format!("{}: {e}", path.display())))?;
    }
    Ok(report)
}
