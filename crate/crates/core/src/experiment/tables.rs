use rayon::prelude::*;

use super::{ExperimentSpec, RowSink, TrialStats};
use crate::densela::{cond, DenseMat, SvdTriple};
use crate::error::Result;
use crate::matgen::{gen_class_sample, svd_spec_matrix, SpectrumSpec, TestClass};
use crate::precond::{additive, augment_northwest, corner, Sign, WMode};
use crate::randmats::{normalized_multiplier, signed_sparse_uvw, KindTag, RngStream};
use crate::subspace::{
    leading_sketch, subspace_residual, trailing_attempt, trailing_via_leading, ComplementMethod,
    TrailingMethod,
};

/// Tail singular value of the trailing/leading test inputs.
pub const TAIL_SIGMA: f64 = 1e-10;
pub const TRAILING_METHODS: [TrailingMethod; 3] = [
    TrailingMethod::North,
    TrailingMethod::Northwest,
    TrailingMethod::Additive,
];
pub const SCALING_EXPONENTS: [i32; 4] = [-10, -5, 5, 10];

pub(crate) fn cell_stream(spec: &ExperimentSpec, tag: u64, n: usize, r: usize) -> RngStream {
    spec.stream()
        .child(tag.wrapping_mul(1 << 40) ^ ((n as u64) << 20) ^ r as u64)
}

/// Runs `f(i, stream_i)` for every trial, in parallel, collected by index.
pub(crate) fn per_trial<T, F>(trials: usize, cell: RngStream, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(RngStream) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| f(cell.child(i as u64)))
        .collect()
}

pub(crate) fn column<T: Clone>(outcomes: &[Vec<T>], j: usize) -> Vec<T> {
    outcomes.iter().map(|row| row[j].clone()).collect()
}

/// Input with `σ_j = 1/j` for `j ≤ ρ` and a flat tail, random singular vectors.
fn svd_input(n: usize, rho: usize, trial: RngStream) -> Result<(DenseMat, SvdTriple)> {
    svd_spec_matrix(
        &SpectrumSpec::reciprocal(n, rho, TAIL_SIGMA),
        false,
        &mut trial.child(0).rng(),
    )
}

fn log_cell(spec: &ExperimentSpec, n: usize, r: usize) {
    log::info!("{} cell n={n} r={r}", spec.experiment);
}

pub fn table1(spec: &ExperimentSpec) -> Result<Vec<super::CsvRow>> {
    let mut sink = RowSink::new(spec);
    let slots = spec.kinds.len() * TRAILING_METHODS.len();
    for &(n, r) in &spec.sizes {
        log_cell(spec, n, r);
        let outcomes: Vec<Vec<Option<f64>>> =
            per_trial(spec.trials, cell_stream(spec, 1, n, r), |trial| {
                let Ok((a, truth)) = svd_input(n, n - r, trial) else {
                    return vec![None; slots];
                };
                let t = truth.t_trail(n - r);
                let mut out = Vec::with_capacity(slots);
                for (ki, &kind) in spec.kinds.iter().enumerate() {
                    for (mi, &method) in TRAILING_METHODS.iter().enumerate() {
                        let mut rng = trial
                            .child(1 + (ki * TRAILING_METHODS.len() + mi) as u64)
                            .rng();
                        let rn = trailing_attempt(&a, r, method, kind, &mut rng)
                            .and_then(|res| subspace_residual(&res.b, &t));
                        out.push(rn.ok());
                    }
                }
                out
            });
        for (ki, kind) in spec.kinds.iter().enumerate() {
            for (mi, method) in TRAILING_METHODS.iter().enumerate() {
                let stats =
                    TrialStats::from_outcomes(&column(&outcomes, ki * TRAILING_METHODS.len() + mi));
                sink.push(
                    "svd",
                    n,
                    r,
                    kind.name(),
                    &format!("rn_{}", method.name()),
                    stats,
                );
            }
        }
    }
    Ok(sink.rows)
}

pub fn table2(spec: &ExperimentSpec) -> Result<Vec<super::CsvRow>> {
    let mut sink = RowSink::new(spec);
    let slots = spec.kinds.len() * 2;
    for &(n, rho) in &spec.sizes {
        log_cell(spec, n, rho);
        let outcomes: Vec<Vec<Option<f64>>> =
            per_trial(spec.trials, cell_stream(spec, 2, n, rho), |trial| {
                let Ok((a, truth)) = svd_input(n, rho, trial) else {
                    return vec![None; slots];
                };
                let t = truth.t_lead(rho);
                let mut out = Vec::with_capacity(slots);
                for (ki, &kind) in spec.kinds.iter().enumerate() {
                    let mut rng = trial.child(1 + ki as u64).rng();
                    match leading_sketch(&a, rho, kind, spec.power, &mut rng) {
                        Ok(sk) => {
                            out.push(subspace_residual(&sk.x, &t).ok());
                            out.push(Some(sk.rel_err));
                        }
                        Err(_) => out.extend([None, None]),
                    }
                }
                out
            });
        for (ki, kind) in spec.kinds.iter().enumerate() {
            sink.push(
                "svd",
                n,
                rho,
                kind.name(),
                "rn1",
                TrialStats::from_outcomes(&column(&outcomes, 2 * ki)),
            );
            sink.push(
                "svd",
                n,
                rho,
                kind.name(),
                "rn2",
                TrialStats::from_outcomes(&column(&outcomes, 2 * ki + 1)),
            );
        }
    }
    Ok(sink.rows)
}

pub fn table3(spec: &ExperimentSpec) -> Result<Vec<super::CsvRow>> {
    let mut sink = RowSink::new(spec);
    for &(n, r) in &spec.sizes {
        log_cell(spec, n, r);
        let outcomes: Vec<Vec<Option<f64>>> =
            per_trial(spec.trials, cell_stream(spec, 3, n, r), |trial| {
                let Ok((a, truth)) = svd_input(n, n - r, trial) else {
                    return vec![None; spec.kinds.len()];
                };
                let t = truth.t_trail(n - r);
                spec.kinds
                    .iter()
                    .enumerate()
                    .map(|(ki, &kind)| {
                        let mut rng = trial.child(1 + ki as u64).rng();
                        trailing_via_leading(&a, n - r, kind, ComplementMethod::FullQr, &mut rng)
                            .and_then(|res| subspace_residual(&res.b, &t))
                            .ok()
                    })
                    .collect()
            });
        for (ki, kind) in spec.kinds.iter().enumerate() {
            sink.push(
                "svd",
                n,
                r,
                kind.name(),
                "rn",
                TrialStats::from_outcomes(&column(&outcomes, ki)),
            );
        }
    }
    Ok(sink.rows)
}

/// `(U, V, W)` for the preconditioning tests: normalized Gaussian blocks, or
/// the signed-sparse triple.
fn precond_blocks(
    kind: KindTag,
    n: usize,
    r: usize,
    stream: RngStream,
) -> Result<(DenseMat, DenseMat, DenseMat)> {
    let mut rng = stream.rng();
    if kind == KindTag::SignedSparse {
        return signed_sparse_uvw(n, r, &mut rng);
    }
    let u = normalized_multiplier(kind, n, r, &mut rng)?;
    let v = normalized_multiplier(kind, n, r, &mut rng)?;
    let w = corner(WMode::Gaussian, r, r, &mut rng)?;
    Ok((u, v, w))
}

pub fn table4(spec: &ExperimentSpec) -> Result<Vec<super::CsvRow>> {
    let mut sink = RowSink::new(spec);
    for &(n, r) in &spec.sizes {
        for (ci, &tag) in spec.classes.iter().enumerate() {
            log::info!("table4 class {} n={n} r={r}", tag.name());
            let tc = TestClass { tag, n, r };
            // slot 0: κ(A), 1: attempts, then (κ(C), κ(K)) per kind
            let outcomes: Vec<Vec<Option<f64>>> = per_trial(
                spec.trials,
                cell_stream(spec, 40 + ci as u64, n, r),
                |trial| {
                    let mut out = vec![None; 2 + 2 * spec.kinds.len()];
                    let Ok(sample) = gen_class_sample(&tc, &mut trial.child(0).rng()) else {
                        return out;
                    };
                    out[0] = Some(sample.kappa);
                    out[1] = Some(sample.attempts as f64);
                    for (ki, &kind) in spec.kinds.iter().enumerate() {
                        let Ok((u, v, w)) = precond_blocks(kind, n, r, trial.child(1 + ki as u64))
                        else {
                            continue;
                        };
                        out[2 + 2 * ki] = additive(&sample.a, &u, &v, Sign::Plus)
                            .and_then(|c| cond(&c))
                            .ok();
                        out[3 + 2 * ki] = augment_northwest(&sample.a, &u, &v, &w)
                            .and_then(|k| cond(&k))
                            .ok();
                    }
                    out
                },
            );
            sink.push(
                tag.name(),
                n,
                r,
                "none",
                "cond_a",
                TrialStats::from_outcomes(&column(&outcomes, 0)),
            );
            sink.push(
                tag.name(),
                n,
                r,
                "none",
                "attempts",
                TrialStats::from_outcomes(&column(&outcomes, 1)),
            );
            for (ki, kind) in spec.kinds.iter().enumerate() {
                sink.push(
                    tag.name(),
                    n,
                    r,
                    kind.name(),
                    "cond_c",
                    TrialStats::from_outcomes(&column(&outcomes, 2 + 2 * ki)),
                );
                sink.push(
                    tag.name(),
                    n,
                    r,
                    kind.name(),
                    "cond_k",
                    TrialStats::from_outcomes(&column(&outcomes, 3 + 2 * ki)),
                );
            }
        }
    }
    Ok(sink.rows)
}

pub fn scaling_metric(p: i32) -> String {
    format!("ratio_p{p}")
}

pub fn scaling(spec: &ExperimentSpec) -> Result<Vec<super::CsvRow>> {
    let mut sink = RowSink::new(spec);
    let per_kind = 1 + SCALING_EXPONENTS.len();
    for &(n, r) in &spec.sizes {
        for (ci, &tag) in spec.classes.iter().enumerate() {
            log::info!("scaling class {} n={n} r={r}", tag.name());
            let tc = TestClass { tag, n, r };
            let outcomes: Vec<Vec<Option<f64>>> = per_trial(
                spec.trials,
                cell_stream(spec, 90 + ci as u64, n, r),
                |trial| {
                    let mut out = vec![None; per_kind * spec.kinds.len()];
                    let Ok(sample) = gen_class_sample(&tc, &mut trial.child(0).rng()) else {
                        return out;
                    };
                    for (ki, &kind) in spec.kinds.iter().enumerate() {
                        let Ok((u, v, _)) = precond_blocks(kind, n, r, trial.child(1 + ki as u64))
                        else {
                            continue;
                        };
                        let uv = &u * v.transpose();
                        let Ok(base) = cond(&(&sample.a + &uv)) else {
                            continue;
                        };
                        out[ki * per_kind] = Some(base);
                        for (pi, &p) in SCALING_EXPONENTS.iter().enumerate() {
                            let scaled = &sample.a + &uv * 10f64.powi(p);
                            out[ki * per_kind + 1 + pi] = cond(&scaled).ok().map(|k| k / base);
                        }
                    }
                    out
                },
            );
            for (ki, kind) in spec.kinds.iter().enumerate() {
                let base = TrialStats::from_outcomes(&column(&outcomes, ki * per_kind));
                sink.push(tag.name(), n, r, kind.name(), "cond_base", base);
                for (pi, &p) in SCALING_EXPONENTS.iter().enumerate() {
                    let stats =
                        TrialStats::from_outcomes(&column(&outcomes, ki * per_kind + 1 + pi));
                    sink.push(tag.name(), n, r, kind.name(), &scaling_metric(p), stats);
                }
            }
        }
    }
    Ok(sink.rows)
}
