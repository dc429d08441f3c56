//! Acceptance checks over experiment reports, shared by `--check` mode and
//! the acceptance suite.

use super::tables::{scaling_metric, SCALING_EXPONENTS, TRAILING_METHODS};
use super::{fmt_e, CsvRow, Experiment, Report};
use crate::subspace::TrailingMethod;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    /// Diagnostic lines do not count towards pass/fail.
    pub informational: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(criterion: u8, name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            criterion,
            name: name.to_string(),
            passed,
            informational: false,
            detail,
        }
    }

    fn info(criterion: u8, name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            informational: true,
            ..Self::new(criterion, name, passed, detail)
        }
    }
}

/// Published reference means.
pub mod reference {
    /// `(n, r, [north, northwest, additive] Gaussian, [north, northwest, additive] subcirculant)`.
    pub const TRAILING: [(usize, usize, [f64; 6]); 9] = [
        (
            64,
            2,
            [7.91e-07, 7.91e-07, 2.77e-14, 1.35e-07, 1.35e-07, 3.03e-14],
        ),
        (
            64,
            4,
            [2.46e-07, 2.46e-07, 4.18e-14, 3.26e-07, 3.26e-07, 4.76e-14],
        ),
        (
            64,
            8,
            [2.70e-07, 2.70e-07, 6.48e-14, 4.90e-07, 4.90e-07, 8.93e-14],
        ),
        (
            128,
            2,
            [4.64e-07, 4.64e-07, 6.03e-14, 8.41e-07, 8.41e-07, 6.29e-14],
        ),
        (
            128,
            4,
            [5.33e-07, 5.33e-07, 1.27e-13, 1.01e-06, 1.01e-06, 1.12e-13],
        ),
        (
            128,
            8,
            [2.88e-06, 2.88e-06, 1.79e-13, 8.82e-07, 8.82e-07, 1.81e-13],
        ),
        (
            256,
            2,
            [2.16e-06, 2.16e-06, 7.29e-13, 1.34e-06, 1.34e-06, 6.10e-13],
        ),
        (
            256,
            4,
            [2.07e-06, 2.07e-06, 2.97e-13, 3.38e-06, 3.38e-06, 4.60e-13],
        ),
        (
            256,
            8,
            [3.66e-06, 3.66e-06, 5.86e-13, 3.80e-06, 3.80e-06, 5.06e-13],
        ),
    ];

    /// `(ρ, n, [rn1, rn2] Gaussian, [rn1, rn2] subcirculant)`.
    pub const LEADING: [(usize, usize, [f64; 4]); 6] = [
        (8, 64, [4.26e-07, 5.77e-09, 1.43e-07, 6.37e-08]),
        (8, 128, [4.30e-08, 1.86e-08, 4.87e-07, 1.90e-07]),
        (8, 256, [3.40e-08, 1.59e-08, 6.65e-08, 2.92e-08]),
        (32, 64, [1.01e-07, 2.30e-08, 4.06e-08, 9.66e-09]),
        (32, 128, [1.28e-07, 2.87e-08, 2.57e-07, 5.50e-08]),
        (32, 256, [1.02e-07, 2.37e-08, 1.18e-07, 2.74e-08]),
    ];

    /// `(r, n, mean)` for trailing bases taken as leading complements.
    pub const COMPLEMENT: [(usize, usize, f64); 9] = [
        (1, 64, 2.13e-07),
        (1, 128, 3.12e-07),
        (1, 256, 9.41e-07),
        (2, 64, 1.74e-07),
        (2, 128, 4.79e-07),
        (2, 256, 1.33e-07),
        (4, 64, 7.49e-07),
        (4, 128, 7.18e-07),
        (4, 256, 3.37e-06),
    ];

    /// `(class, r, [κ(C), κ(K)] Gaussian, [κ(C), κ(K)] structured)` at n = 128.
    pub const PRECONDITIONING: [(&str, usize, [f64; 4]); 32] = [
        ("1n", 1, [1.38e+04, 1.80e+04, 1.80e+04, 2.47e+04]),
        ("1n", 2, [9.07e+03, 9.66e+03, 8.60e+03, 2.17e+04]),
        ("1n", 4, [6.91e+04, 7.14e+04, 4.94e+04, 2.15e+05]),
        ("1n", 8, [2.03e+04, 2.20e+04, 2.81e+04, 1.72e+05]),
        ("1s", 1, [4.48e+03, 5.76e+03, 3.02e+03, 1.95e+04]),
        ("1s", 2, [2.32e+04, 1.95e+04, 1.43e+04, 8.19e+04]),
        ("1s", 4, [2.38e+04, 1.89e+04, 5.67e+03, 7.85e+04]),
        ("1s", 8, [7.49e+04, 3.32e+04, 1.26e+04, 1.62e+05]),
        ("2n", 1, [6.75e+03, 7.38e+03, 3.79e+03, 4.27e+03]),
        ("2n", 2, [1.78e+04, 1.75e+04, 1.74e+04, 3.92e+04]),
        ("2n", 4, [3.91e+04, 4.44e+04, 1.63e+05, 1.78e+06]),
        ("2n", 8, [4.57e+04, 3.00e+04, 4.72e+04, 4.56e+05]),
        ("2s", 1, [1.35e+04, 1.72e+04, 6.17e+03, 1.04e+04]),
        ("2s", 2, [1.07e+04, 8.81e+03, 8.27e+03, 3.68e+04]),
        ("2s", 4, [2.01e+04, 1.23e+04, 2.93e+04, 1.74e+05]),
        ("2s", 8, [2.99e+04, 1.77e+04, 1.65e+04, 2.26e+05]),
        ("3n", 1, [4.62e+04, 6.49e+04, 1.26e+04, 2.02e+04]),
        ("3n", 2, [2.68e+06, 2.98e+06, 2.61e+04, 5.96e+04]),
        ("3n", 4, [4.29e+04, 6.28e+04, 3.75e+05, 1.15e+06]),
        ("3n", 8, [1.22e+05, 1.79e+05, 1.04e+05, 4.00e+05]),
        ("3s", 1, [5.34e+05, 7.67e+05, 8.43e+05, 1.32e+06]),
        ("3s", 2, [2.88e+06, 4.07e+06, 1.52e+06, 3.06e+06]),
        ("3s", 4, [1.44e+06, 1.99e+06, 3.97e+05, 1.30e+06]),
        ("3s", 8, [9.63e+05, 1.32e+06, 5.95e+05, 2.88e+06]),
        ("4n", 1, [4.26e+03, 3.67e+03, 3.51e+03, 3.49e+03]),
        ("4n", 2, [6.51e+03, 9.84e+03, 7.06e+03, 5.58e+04]),
        ("4n", 4, [4.22e+03, 1.45e+04, 4.03e+03, 1.78e+05]),
        ("4n", 8, [4.39e+03, 3.40e+04, 4.72e+03, 3.97e+04]),
        ("4s", 1, [4.06e+05, 4.14e+05, 2.61e+06, 2.50e+06]),
        ("4s", 2, [1.34e+06, 3.79e+04, 1.09e+05, 3.24e+04]),
        ("4s", 4, [1.30e+05, 1.51e+04, 1.49e+04, 4.69e+04]),
        ("4s", 8, [2.85e+04, 1.17e+04, 1.04e+04, 6.95e+04]),
    ];

    pub fn trailing(n: usize, r: usize, kind: &str, column: usize) -> Option<f64> {
        let offset = match kind {
            "gaussian" => 0,
            "subcirculant" => 3,
            _ => return None,
        };
        TRAILING
            .iter()
            .find(|c| c.0 == n && c.1 == r)
            .map(|c| c.2[offset + column])
    }
}

/// Mean of a row, NaN when absent.
fn mean_of(row: Option<&CsvRow>) -> f64 {
    row.map_or(f64::NAN, |r| r.stats.mean)
}

fn rows<'a>(report: &'a Report, metric: &'a str) -> impl Iterator<Item = &'a CsvRow> + 'a {
    report.rows.iter().filter(move |r| r.metric == metric)
}

fn cell(r: &CsvRow) -> String {
    format!("{} n={} r={} {}", r.class, r.n, r.r_or_rho, r.kind)
}

/// Worst row of `metric` under `score` (larger is worse) and whether every
/// row satisfied `ok`.
fn all_rows<F, S>(report: &Report, metric: &str, ok: F, score: S) -> (bool, usize, Option<CsvRow>)
where
    F: Fn(&CsvRow) -> bool,
    S: Fn(&CsvRow) -> f64,
{
    let mut pass = true;
    let mut count = 0;
    let mut worst: Option<(f64, CsvRow)> = None;
    for r in rows(report, metric) {
        count += 1;
        pass &= ok(r);
        let s = score(r);
        let s = if s.is_nan() { f64::INFINITY } else { s };
        if worst.as_ref().is_none_or(|w| s > w.0) {
            worst = Some((s, r.clone()));
        }
    }
    (pass && count > 0, count, worst.map(|w| w.1))
}

fn below(report: &Report, criterion: u8, name: &str, metric: &str, limit: f64) -> CheckOutcome {
    let (pass, count, worst) =
        all_rows(report, metric, |r| r.stats.mean <= limit, |r| r.stats.mean);
    let detail = match worst {
        Some(w) => format!(
            "{count} cells, worst mean {} at {} (limit {})",
            fmt_e(w.stats.mean),
            cell(&w),
            fmt_e(limit)
        ),
        None => format!("no {metric} rows"),
    };
    CheckOutcome::new(criterion, name, pass, detail)
}

/// Checks the rows of `report` against the acceptance criterion for its
/// experiment.
pub fn check(report: &Report) -> Vec<CheckOutcome> {
    match report.spec.experiment {
        Experiment::Table1 => check_trailing(report),
        Experiment::Table2 => vec![
            below(report, 2, "leading basis residual rn1 <= 1e-5", "rn1", 1e-5),
            below(report, 2, "low-rank error rn2 <= 1e-5", "rn2", 1e-5),
        ],
        Experiment::Table3 => vec![below(
            report,
            3,
            "complement basis residual <= 1e-4",
            "rn",
            1e-4,
        )],
        Experiment::Table4 => check_preconditioning(report),
        Experiment::Scaling => check_scaling(report),
        Experiment::Bounds => check_bounds(report),
        Experiment::Srft => vec![below(
            report,
            7,
            "srft support violation rate <= 0.05",
            "violation_rate",
            0.05,
        )],
        Experiment::Genp => check_genp(report),
        Experiment::Cur => check_cur(report),
        Experiment::Policy => check_policy(report),
    }
}

fn method_metric(m: TrailingMethod) -> String {
    format!("rn_{}", m.name())
}

fn within_order(x: f64, reference: f64) -> bool {
    x > 0.0 && (x / reference).log10().abs() <= 1.0
}

fn check_trailing(report: &Report) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    // literal reading: north and northwest near the larger published columns
    for (col, &method) in TRAILING_METHODS.iter().enumerate().take(2) {
        let metric = method_metric(method);
        let (pass, count, worst) = all_rows(
            report,
            &metric,
            |r| {
                reference::trailing(r.n, r.r_or_rho, &r.kind, col)
                    .is_some_and(|p| within_order(r.stats.mean, p))
            },
            |r| {
                reference::trailing(r.n, r.r_or_rho, &r.kind, col)
                    .map_or(f64::INFINITY, |p| (r.stats.mean / p).log10().abs())
            },
        );
        let detail = match worst {
            Some(w) => format!(
                "{count} cells, worst mean {} vs reference {} at {}",
                fmt_e(w.stats.mean),
                fmt_e(reference::trailing(w.n, w.r_or_rho, &w.kind, col).unwrap_or(f64::NAN)),
                cell(&w)
            ),
            None => format!("no {metric} rows"),
        };
        out.push(CheckOutcome::new(
            1,
            &format!("{} within one order of reference", method.name()),
            pass,
            detail,
        ));
    }
    out.push(below(
        report,
        1,
        "additive mean <= 1e-11",
        &method_metric(TrailingMethod::Additive),
        1e-11,
    ));
    // diagnostic: the accurate column read as north, the others as additive
    let north = below(report, 1, "", &method_metric(TrailingMethod::North), 1e-11);
    let (pass, count, worst) = all_rows(
        report,
        &method_metric(TrailingMethod::Additive),
        |r| {
            reference::trailing(r.n, r.r_or_rho, &r.kind, 0)
                .is_some_and(|p| within_order(r.stats.mean, p))
        },
        |r| {
            reference::trailing(r.n, r.r_or_rho, &r.kind, 0)
                .map_or(f64::INFINITY, |p| (r.stats.mean / p).log10().abs())
        },
    );
    let swapped = north.passed && pass;
    let detail = format!(
        "north <= 1e-11: {} ({}); additive within one order of the 1e-7 column: {pass} ({count} cells{})",
        north.passed,
        north.detail,
        worst.map_or(String::new(), |w| format!(", worst {} at {}", fmt_e(w.stats.mean), cell(&w)))
    );
    out.push(CheckOutcome::info(
        1,
        "swapped column reading",
        swapped,
        detail,
    ));
    out
}

fn check_preconditioning(report: &Report) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for metric in ["cond_c", "cond_k"] {
        let (pass, count, worst) = all_rows(
            report,
            metric,
            |r| (1e2..=1e8).contains(&r.stats.mean),
            |r| (r.stats.mean.log10() - 5.0).abs(),
        );
        let detail = match worst {
            Some(w) => format!(
                "{count} cells, most extreme mean {} at {}",
                fmt_e(w.stats.mean),
                cell(&w)
            ),
            None => format!("no {metric} rows"),
        };
        out.push(CheckOutcome::new(
            4,
            &format!("mean {metric} in [1e2, 1e8]"),
            pass,
            detail,
        ));
    }
    let (pass, count, worst) = all_rows(
        report,
        "cond_a",
        |r| r.stats.mean >= 1e15,
        |r| -r.stats.mean.log10(),
    );
    let detail = match worst {
        Some(w) => format!(
            "{count} cells, smallest mean {} at {}, {} generation failures in total",
            fmt_e(w.stats.mean),
            cell(&w),
            rows(report, "cond_a")
                .map(|r| r.stats.failures)
                .sum::<usize>()
        ),
        None => "no cond_a rows".into(),
    };
    out.push(CheckOutcome::new(
        4,
        "input condition numbers near 1e16",
        pass,
        detail,
    ));
    out
}

fn check_scaling(report: &Report) -> Vec<CheckOutcome> {
    SCALING_EXPONENTS
        .iter()
        .map(|&p| {
            let limit = 10f64.powi(p.abs() + 1);
            let (pass, count, worst) = all_rows(
                report,
                &scaling_metric(p),
                |r| r.stats.max <= limit,
                |r| r.stats.max,
            );
            let detail = match worst {
                Some(w) => format!(
                    "{count} cells, largest ratio {} at {} (limit {})",
                    fmt_e(w.stats.max),
                    cell(&w),
                    fmt_e(limit)
                ),
                None => "no rows".into(),
            };
            CheckOutcome::new(
                5,
                &format!("condition ratio at 10^{p} within 10^{}", p.abs() + 1),
                pass,
                detail,
            )
        })
        .collect()
}

fn bound_rows<'a>(report: &'a Report, name: &'a str) -> Vec<(&'a CsvRow, f64)> {
    rows(report, name)
        .map(|r| {
            let bound =
                mean_of(report.find(&r.class, r.n, r.r_or_rho, &r.kind, &format!("{name}_bound")));
            (r, bound)
        })
        .collect()
}

fn check_bounds(report: &Report) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for (name, label, slack, tail) in [
        (
            "gauss_norm",
            "mean gaussian norm below 1 + sqrt(m) + sqrt(n)",
            1.0,
            false,
        ),
        (
            "gauss_pinv",
            "mean pseudo-inverse norm within 1.5x its expectation bound",
            1.5,
            false,
        ),
        (
            "square_pinv_tail",
            "square inverse tail frequency below bound + 3 sigma",
            1.0,
            true,
        ),
        (
            "perturbed_inverse_tail",
            "perturbed inverse tail frequency below bound + 3 sigma",
            1.0,
            true,
        ),
    ] {
        let cells = bound_rows(report, name);
        let pass = !cells.is_empty()
            && cells.iter().all(|(r, b)| {
                if tail {
                    r.stats.mean <= b + 3.0 * r.stats.std
                } else if slack > 1.0 {
                    r.stats.mean <= slack * b
                } else {
                    r.stats.mean < *b
                }
            });
        let detail = cells
            .iter()
            .map(|(r, b)| {
                format!(
                    "({},{}) {} vs {}",
                    r.n,
                    r.r_or_rho,
                    fmt_e(r.stats.mean),
                    fmt_e(*b)
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        out.push(CheckOutcome::new(
            7,
            label,
            pass,
            if detail.is_empty() {
                format!("no {name} rows")
            } else {
                detail
            },
        ));
    }
    out
}

fn check_genp(report: &Report) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let (pass, count, worst) = all_rows(
        report,
        "unaided_failure",
        |r| r.stats.mean == 1.0,
        |r| -r.stats.mean,
    );
    out.push(CheckOutcome::new(
        9,
        "unaided elimination fails on every adversarial input",
        pass,
        format!(
            "{count} cells, lowest failure rate {}",
            worst.map_or("n/a".into(), |w| fmt_e(w.stats.mean))
        ),
    ));
    for route in ["augment", "additive"] {
        let metric = format!("success_{route}");
        let (pass, count, worst) =
            all_rows(report, &metric, |r| r.stats.mean >= 0.99, |r| -r.stats.mean);
        let worst_res = rows(report, &format!("residual_{route}"))
            .map(|r| r.stats.max)
            .fold(0.0, f64::max);
        out.push(CheckOutcome::new(
            9,
            &format!("supported solve ({route}) succeeds in >= 99% of trials"),
            pass,
            format!(
                "{count} cells, lowest success rate {}, largest residual {}",
                worst.map_or("n/a".into(), |w| fmt_e(w.stats.mean)),
                fmt_e(worst_res)
            ),
        ));
    }
    let (pass, count, worst) = all_rows(
        report,
        "newton_contraction",
        |r| r.stats.failures == 0 && r.stats.max <= 1.0 + 1e-6,
        |r| r.stats.max,
    );
    out.push(CheckOutcome::new(
        9,
        "newton residual contracts quadratically",
        pass,
        format!(
            "{count} cells, largest next/previous^2 ratio {}",
            worst.map_or("n/a".into(), |w| format!(
                "{} ({} failures)",
                fmt_e(w.stats.max),
                w.stats.failures
            ))
        ),
    ));
    out
}

fn check_cur(report: &Report) -> Vec<CheckOutcome> {
    let (exact, count, worst) = all_rows(
        report,
        "exact",
        |r| r.stats.mean == 1.0 && r.stats.failures == 0,
        |r| -r.stats.mean,
    );
    let gap = rows(report, "volume_gap")
        .map(|r| r.stats.max)
        .fold(0.0, f64::max);
    let mut out = vec![CheckOutcome::new(
        8,
        "maxvol volume equals the exhaustive optimum",
        exact,
        format!(
            "{count} cells, lowest hit rate {}, largest relative gap {}",
            worst.map_or("n/a".into(), |w| fmt_e(w.stats.mean)),
            fmt_e(gap)
        ),
    )];
    let (pass, count, worst) = all_rows(
        report,
        "bound_violation",
        |r| r.stats.max == 0.0 && r.stats.failures == 0,
        |r| r.stats.max,
    );
    let ratio = rows(report, "bound_ratio")
        .map(|r| r.stats.max)
        .fold(0.0, f64::max);
    out.push(CheckOutcome::new(
        8,
        "chebyshev skeleton bound holds with certified volume ratio",
        pass,
        format!(
            "{count} cells, violation rate {}, largest error/bound {}",
            worst.map_or("n/a".into(), |w| fmt_e(w.stats.mean)),
            fmt_e(ratio)
        ),
    ));
    let default_gap = rows(report, "volume_gap_default_tol")
        .map(|r| r.stats.max)
        .fold(0.0, f64::max);
    let default_hits = rows(report, "exact_default_tol")
        .map(|r| r.stats.mean)
        .fold(1.0, f64::min);
    out.push(CheckOutcome::info(
        8,
        "maxvol at the default dominance tolerance",
        default_hits == 1.0,
        format!(
            "hit rate {}, largest relative gap {}",
            fmt_e(default_hits),
            fmt_e(default_gap)
        ),
    ));
    out
}

fn check_policy(report: &Report) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let single: Vec<&CsvRow> = rows(report, "success_rate")
        .filter(|r| r.class == "gaussian")
        .collect();
    let pass = !single.is_empty() && single.iter().all(|r| r.stats.mean >= 0.99);
    out.push(CheckOutcome::new(
        0,
        "single gaussian policy succeeds in >= 99% of trials",
        pass,
        single
            .iter()
            .map(|r| format!("n={} r={}: {}", r.n, r.r_or_rho, fmt_e(r.stats.mean)))
            .collect::<Vec<_>>()
            .join("; "),
    ));
    let mut dominated = true;
    let mut detail = Vec::new();
    for r in rows(report, "success_rate")
        .filter(|r| r.class != "gaussian" && r.class.ends_with(">gaussian"))
    {
        let base = mean_of(
            single
                .iter()
                .copied()
                .find(|s| s.n == r.n && s.r_or_rho == r.r_or_rho),
        );
        dominated &= r.stats.mean >= base;
        detail.push(format!(
            "{} n={} r={}: {} vs {}",
            r.class,
            r.n,
            r.r_or_rho,
            fmt_e(r.stats.mean),
            fmt_e(base)
        ));
    }
    out.push(CheckOutcome::new(
        0,
        "fallback policies do at least as well as single gaussian",
        dominated,
        detail.join("; "),
    ));
    out
}
