use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::tables::{cell_stream, column, per_trial, TAIL_SIGMA};
use super::{config, CsvRow, ExperimentSpec, RowSink, TrialStats};
use crate::boundscalc::{
    gauss_norm_check, gauss_pinv_check, perturbed_inverse_tail, square_pinv_tail_check,
    srft_rho_plus_ln, srft_rho_plus_log2, srft_support_check, BoundReport,
};
use crate::curvol::{
    cur, exhaustive_max_volume, maxvol, skeleton_bound, DEFAULT_DOM_TOL, DEFAULT_MAX_SWEEPS,
};
use crate::densela::{inverse, singular_values, DenseMat};
use crate::error::{Error, Result};
use crate::genpsolve::{
    adversarial_genp_matrix, genp, genp_supported_solve, newton_inverse, GenpPolicy, GenpRoute,
    DEFAULT_PIVOT_TOL,
};
use crate::matgen::{svd_spec_matrix, SpectrumSpec};
use crate::randmats::{gaussian, normalized_multiplier, KindTag};
use crate::subspace::{trailing_attempt, TrailingMethod};

/// Level `x` of the square-case tail checks.
pub const TAIL_LEVEL: f64 = 100.0;
/// Oversampling of the SRFT support check.
pub const SRFT_OVERSAMPLE: usize = 20;
/// Noise added to the rank-deficient skeleton inputs.
pub const CUR_NOISE: f64 = 1e-3;
/// Initial size of `UVᵀ` relative to `A` when seeding Newton from `(A + UVᵀ)⁻¹`.
pub const NEWTON_SEED_SCALE: f64 = 1e-3;
/// Contraction steps are measured only while `θᵢ²` stays above this.
pub const NEWTON_FLOOR: f64 = 1e-8;
/// Stopping residual for the Newton runs, well above the roundoff floor.
pub const NEWTON_TOL: f64 = 1e-9;

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Three rows per report: the statistic (std column = batch standard
/// error), the bound, and the 95th percentile of the sampled quantity.
fn push_report(sink: &mut RowSink, class: &str, m: usize, n: usize, rep: &BoundReport) {
    let stat = TrialStats {
        mean: rep.empirical_mean,
        std: rep.sigma_hat,
        min: rep.empirical_mean,
        max: rep.empirical_mean,
        failures: 0,
        trials: rep.trials,
    };
    sink.push(class, m, n, "gaussian", &rep.bound_name, stat);
    sink.push(
        class,
        m,
        n,
        "gaussian",
        &format!("{}_bound", rep.bound_name),
        TrialStats::constant(rep.theoretical),
    );
    sink.push(
        class,
        m,
        n,
        "gaussian",
        &format!("{}_p95", rep.bound_name),
        TrialStats::constant(rep.empirical_p95),
    );
}

pub fn bounds(spec: &ExperimentSpec) -> Result<Vec<CsvRow>> {
    let mut sink = RowSink::new(spec);
    for &(m, n) in &spec.sizes {
        log::info!("bounds m={m} n={n}");
        let rep = gauss_norm_check(m, n, spec.trials, cell_stream(spec, 100, m, n))?;
        push_report(&mut sink, "gauss", m, n, &rep);
        if m != n {
            let rep = gauss_pinv_check(m, n, spec.trials, cell_stream(spec, 101, m, n))?;
            push_report(&mut sink, "gauss", m, n, &rep);
        } else {
            let rep =
                square_pinv_tail_check(n, TAIL_LEVEL, spec.trials, cell_stream(spec, 102, m, n))?;
            push_report(&mut sink, "gauss", m, n, &rep);
            let id = DenseMat::identity(n, n);
            let rep =
                perturbed_inverse_tail(&id, TAIL_LEVEL, spec.trials, cell_stream(spec, 103, m, n))?;
            push_report(&mut sink, "identity", m, n, &rep);
        }
    }
    Ok(sink.rows)
}

pub fn srft(spec: &ExperimentSpec) -> Result<Vec<CsvRow>> {
    let mut sink = RowSink::new(spec);
    for &(n, rho) in &spec.sizes {
        log::info!("srft n={n} rho={rho}");
        let rho_plus = rho + SRFT_OVERSAMPLE;
        let rep = srft_support_check(
            rho,
            n,
            rho_plus,
            spec.trials,
            cell_stream(spec, 110, n, rho),
        )?;
        let stat = TrialStats {
            mean: rep.empirical_mean,
            std: rep.sigma_hat,
            min: rep.empirical_mean,
            max: rep.empirical_mean,
            failures: 0,
            trials: rep.trials,
        };
        sink.push("srft", n, rho, "srft", "violation_rate", stat);
        sink.push(
            "srft",
            n,
            rho,
            "srft",
            "failure_envelope",
            TrialStats::constant(rep.theoretical),
        );
        sink.push(
            "srft",
            n,
            rho,
            "srft",
            "inv_sigma_min_p95",
            TrialStats::constant(rep.empirical_p95),
        );
        sink.push(
            "srft",
            n,
            rho,
            "srft",
            "rho_plus_used",
            TrialStats::constant(rho_plus as f64),
        );
        sink.push(
            "srft",
            n,
            rho,
            "srft",
            "rho_plus_ln",
            TrialStats::constant(srft_rho_plus_ln(rho, n) as f64),
        );
        sink.push(
            "srft",
            n,
            rho,
            "srft",
            "rho_plus_log2",
            TrialStats::constant(srft_rho_plus_log2(rho, n) as f64),
        );
    }
    Ok(sink.rows)
}

const ROUTES: [(GenpRoute, &str); 2] = [
    (GenpRoute::Augment, "augment"),
    (GenpRoute::Additive, "additive"),
];

/// Largest `θᵢ₊₁/θᵢ²` over steps with `θᵢ² ≥ NEWTON_FLOOR`, or 0 when
/// no step qualifies.
pub fn newton_contraction(residuals: &[f64]) -> f64 {
    residuals
        .windows(2)
        .filter(|w| w[0] * w[0] >= NEWTON_FLOOR)
        .map(|w| w[1] / (w[0] * w[0]))
        .fold(0.0, f64::max)
}

pub fn genp_suite(spec: &ExperimentSpec) -> Result<Vec<CsvRow>> {
    let mut sink = RowSink::new(spec);
    let kind = spec.kinds[0];
    for &(n, k) in &spec.sizes {
        log::info!("genp n={n} k={k}");
        // slot 0: unaided failure, per route (success, residual, width), then Newton (contraction, iterations)
        let slots = 1 + 3 * ROUTES.len() + 2;
        let outcomes: Vec<Vec<Option<f64>>> =
            per_trial(spec.trials, cell_stream(spec, 120, n, k), |trial| {
                let mut out = vec![None; slots];
                let mut rng = trial.child(0).rng();
                let Ok(a) = adversarial_genp_matrix(n, k, &mut rng) else {
                    return out;
                };
                let b = DVector::from_column_slice(gaussian(n, 1, &mut rng).as_slice());
                out[0] = Some(indicator(genp(&a, DEFAULT_PIVOT_TOL).is_err()));
                for (ri, &(route, _)) in ROUTES.iter().enumerate() {
                    let policy = GenpPolicy {
                        route,
                        kind,
                        ..GenpPolicy::default()
                    };
                    let mut rng = trial.child(1 + ri as u64).rng();
                    match genp_supported_solve(&a, &b, &policy, &mut rng) {
                        Ok(rep) => {
                            out[1 + 3 * ri] = Some(indicator(rep.residual <= spec.tol));
                            out[2 + 3 * ri] = Some(rep.residual);
                            out[3 + 3 * ri] = Some(rep.h as f64);
                        }
                        Err(_) => out[1 + 3 * ri] = Some(0.0),
                    }
                }
                let mut rng = trial.child(10).rng();
                let newton =
                    normalized_multiplier(KindTag::Gaussian, n, k, &mut rng).and_then(|u| {
                        let uv = u * normalized_multiplier(KindTag::Gaussian, n, k, &mut rng)?
                            .transpose();
                        // shrink the perturbation until the seed is contractive
                        let mut scale = NEWTON_SEED_SCALE;
                        loop {
                            let x0 = inverse(&(&a + &uv * scale))?;
                            match newton_inverse(&a, &x0, 50, NEWTON_TOL) {
                                Err(Error::NotContractive(_)) if scale > 1e-9 => scale *= 0.1,
                                other => return other,
                            }
                        }
                    });
                if let Ok(res) = newton {
                    out[slots - 2] = Some(newton_contraction(&res.residuals));
                    out[slots - 1] = Some(res.iterations as f64);
                }
                out
            });
        let label = kind.name();
        sink.push(
            "adversarial",
            n,
            k,
            "none",
            "unaided_failure",
            TrialStats::from_outcomes(&column(&outcomes, 0)),
        );
        for (ri, &(_, name)) in ROUTES.iter().enumerate() {
            sink.push(
                "adversarial",
                n,
                k,
                label,
                &format!("success_{name}"),
                TrialStats::from_outcomes(&column(&outcomes, 1 + 3 * ri)),
            );
            sink.push(
                "adversarial",
                n,
                k,
                label,
                &format!("residual_{name}"),
                TrialStats::from_outcomes(&column(&outcomes, 2 + 3 * ri)),
            );
            sink.push(
                "adversarial",
                n,
                k,
                label,
                &format!("width_{name}"),
                TrialStats::from_outcomes(&column(&outcomes, 3 + 3 * ri)),
            );
        }
        sink.push(
            "adversarial",
            n,
            k,
            "none",
            "newton_contraction",
            TrialStats::from_outcomes(&column(&outcomes, slots - 2)),
        );
        sink.push(
            "adversarial",
            n,
            k,
            "none",
            "newton_iterations",
            TrialStats::from_outcomes(&column(&outcomes, slots - 1)),
        );
    }
    Ok(sink.rows)
}

/// Rank-`rho` n×n matrix plus small Gaussian noise.
pub fn skeleton_input<R: rand::Rng + ?Sized>(n: usize, rho: usize, rng: &mut R) -> DenseMat {
    let low = gaussian(n, rho, rng) * gaussian(rho, n, rng);
    low + gaussian(n, n, rng) * CUR_NOISE
}

pub fn cur_suite(spec: &ExperimentSpec) -> Result<Vec<CsvRow>> {
    let mut sink = RowSink::new(spec);
    for &(n, rho) in &spec.sizes {
        log::info!("cur n={n} rho={rho}");
        // exact, gap, bound ratio, violation, exact at default tol, gap at default tol
        let outcomes: Vec<Vec<Option<f64>>> =
            per_trial(spec.trials, cell_stream(spec, 130, n, rho), |trial| {
                let mut out = vec![None; 6];
                let a = skeleton_input(n, rho, &mut trial.child(0).rng());
                let Ok(best) = exhaustive_max_volume(&a, rho) else {
                    return out;
                };
                if let Ok(mut pick) = maxvol(&a, rho, DEFAULT_MAX_SWEEPS, spec.tol) {
                    let gap = best.volume / pick.volume - 1.0;
                    out[0] = Some(indicator(gap.abs() <= 1e-12));
                    out[1] = Some(gap);
                    let sv = singular_values(&a).unwrap_or_default();
                    if pick.certify(&a).is_ok() {
                        if let (Ok(c), Some(&sigma)) = (cur(&a, &pick), sv.get(rho)) {
                            let bound = skeleton_bound(sigma, rho, pick.nu);
                            out[2] = Some(c.err_cheb / bound);
                            out[3] = Some(indicator(c.err_cheb > bound));
                        }
                    }
                }
                if let Ok(pick) = maxvol(&a, rho, DEFAULT_MAX_SWEEPS, DEFAULT_DOM_TOL) {
                    let gap = best.volume / pick.volume - 1.0;
                    out[4] = Some(indicator(gap.abs() <= 1e-12));
                    out[5] = Some(gap);
                }
                out
            });
        let names = [
            "exact",
            "volume_gap",
            "bound_ratio",
            "bound_violation",
            "exact_default_tol",
            "volume_gap_default_tol",
        ];
        for (j, name) in names.iter().enumerate() {
            sink.push(
                "skeleton",
                n,
                rho,
                "none",
                name,
                TrialStats::from_outcomes(&column(&outcomes, j)),
            );
        }
    }
    Ok(sink.rows)
}

/// Ordered list of multiplier kinds tried until the monitor accepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub kinds: Vec<KindTag>,
}

impl Policy {
    pub fn name(&self) -> String {
        self.kinds
            .iter()
            .map(|k| k.name())
            .collect::<Vec<_>>()
            .join(">")
    }

    /// Single Gaussian, and signed-sparse with a Gaussian fallback.
    pub fn defaults() -> Vec<Policy> {
        vec![
            Policy {
                kinds: vec![KindTag::Gaussian],
            },
            Policy {
                kinds: vec![KindTag::SignedSparse, KindTag::Gaussian],
            },
        ]
    }
}

/// Runs each policy with the northwest trailing solver on the reciprocal
/// spectrum inputs. The draw for the j-th use of a kind is keyed by the kind
/// and j, so a policy that extends another never does worse on a trial.
pub fn policy_sweep(spec: &ExperimentSpec, policies: &[Policy]) -> Result<Vec<CsvRow>> {
    if policies.is_empty() {
        return Err(config("policies", "at least one policy is required"));
    }
    if let Some(p) = policies.iter().find(|p| p.kinds.is_empty()) {
        return Err(config(
            "policies",
            format!("policy {:?} tries no kind", p.name()),
        ));
    }
    spec.validate()?;
    if let Some(k) = policies
        .iter()
        .flat_map(|p| &p.kinds)
        .find(|&&k| k == KindTag::Srft)
    {
        return Err(config("policies", format!("{k} multipliers are complex")));
    }
    let mut sink = RowSink::new(spec);
    for &(n, r) in &spec.sizes {
        log::info!("policy n={n} r={r}");
        let outcomes: Vec<Vec<Option<f64>>> =
            per_trial(spec.trials, cell_stream(spec, 140, n, r), |trial| {
                let Ok((a, _)) = svd_spec_matrix(
                    &SpectrumSpec::reciprocal(n, n - r, TAIL_SIGMA),
                    false,
                    &mut trial.child(0).rng(),
                ) else {
                    return vec![None; policies.len()];
                };
                policies
                    .iter()
                    .map(|p| {
                        let mut used = [0u64; 5];
                        for (j, &kind) in p.kinds.iter().enumerate() {
                            let slot = kind as usize;
                            let key = 1 + 16 * slot as u64 + used[slot];
                            used[slot] += 1;
                            let mut rng = trial.child(key).rng();
                            if let Ok(res) =
                                trailing_attempt(&a, r, TrailingMethod::Northwest, kind, &mut rng)
                            {
                                if res.residual <= spec.tau {
                                    return Some((j + 1) as f64);
                                }
                            }
                        }
                        None
                    })
                    .collect()
            });
        for (pi, p) in policies.iter().enumerate() {
            let col = column(&outcomes, pi);
            let name = p.name();
            let success: Vec<f64> = col.iter().map(|o| indicator(o.is_some())).collect();
            sink.push(
                &name,
                n,
                r,
                "policy",
                "success_rate",
                TrialStats::from_values(&success, 0),
            );
            sink.push(
                &name,
                n,
                r,
                "policy",
                "attempts",
                TrialStats::from_outcomes(&col),
            );
            for j in 1..=p.kinds.len() {
                let hits: Vec<f64> = col
                    .iter()
                    .map(|o| indicator(*o == Some(j as f64)))
                    .collect();
                sink.push(
                    &name,
                    n,
                    r,
                    "policy",
                    &format!("attempts_eq_{j}"),
                    TrialStats::from_values(&hits, 0),
                );
            }
        }
    }
    Ok(sink.rows)
}
