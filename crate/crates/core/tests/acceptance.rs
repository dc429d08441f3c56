//! Acceptance suite: one PASS/FAIL line per criterion, details indented.
//!
//! Exits 0 after reporting so that the workspace test run stays usable;
//! set `ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use randpre::densela::{pinv, singular_values};
use randpre::experiment::{check, run, CheckOutcome, Experiment, ExperimentSpec};
use randpre::genpsolve::schur_after_h;
use randpre::precond::k_factorization;
use randpre::randmats::{gaussian, random_orthogonal, RngStream};
use randpre::subspace::power_transform;

use common::{jacobi_singular_values, lcg_matrix, max_abs};

const SEED: u64 = 42;

struct Criterion {
    id: u8,
    title: &'static str,
    lines: Vec<(bool, bool, String)>,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Criterion {
    fn new(id: u8, title: &'static str, limit_secs: Option<u64>) -> Self {
        Criterion {
            id,
            title,
            lines: Vec::new(),
            elapsed: Duration::ZERO,
            limit: limit_secs.map(Duration::from_secs),
        }
    }

    fn add(&mut self, passed: bool, detail: String) {
        self.lines.push((passed, false, detail));
    }

    fn outcomes(&mut self, outcomes: Vec<CheckOutcome>) {
        for c in outcomes {
            self.lines.push((
                c.passed,
                c.informational,
                format!("{}: {}", c.name, c.detail),
            ));
        }
    }

    fn passed(&self) -> bool {
        let in_time = self.limit.is_none_or(|l| self.elapsed <= l);
        in_time && self.lines.iter().all(|(p, info, _)| *p || *info)
    }

    fn report(&self) -> bool {
        let ok = self.passed();
        let limit = self
            .limit
            .map_or(String::new(), |l| format!(", limit {}s", l.as_secs()));
        println!(
            "{} criterion {}: {} ({:.1}s{limit})",
            if ok { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64()
        );
        for (p, info, d) in &self.lines {
            let tag = if *info {
                "info"
            } else if *p {
                "ok"
            } else {
                "VIOLATED"
            };
            println!("    [{tag}] {d}");
        }
        ok
    }
}

fn experiment(c: &mut Criterion, exp: Experiment, adjust: impl FnOnce(&mut ExperimentSpec)) {
    let mut spec = ExperimentSpec::defaults(exp);
    spec.seed = SEED;
    adjust(&mut spec);
    let start = Instant::now();
    match run(&spec) {
        Ok(report) => {
            c.elapsed += start.elapsed();
            c.outcomes(check(&report));
        }
        Err(e) => {
            c.elapsed += start.elapsed();
            c.add(false, format!("{exp} run failed: {e}"));
        }
    }
}

fn identities() -> Criterion {
    let mut c = Criterion::new(6, "exact identities", None);
    let start = Instant::now();
    let stream = RngStream::new(SEED, 6);
    let (mut fact, mut schur, mut mp, mut power) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..20u64 {
        let mut rng = stream.child(i).rng();
        let n = 8 + (i as usize % 5) * 6;
        let r = 1 + (i as usize % 4);
        let a = gaussian(n, n, &mut rng);
        let u = gaussian(n, r, &mut rng);
        let v = gaussian(n, r, &mut rng);
        let scale = 1.0 + a.norm() + u.norm() * v.norm();

        let kf = k_factorization(&a, &u, &v).expect("factorization");
        let worst = kf
            .forward_residual
            .max(kf.inverse_residual)
            .max(kf.extraction_residual);
        fact = fact.max(worst / scale);

        let s = schur_after_h(&kf.k, r).expect("schur complement");
        schur = schur.max(max_abs(&(s - (&a - &u * v.transpose()))) / scale);

        let m = gaussian(n + 3, n - r, &mut rng);
        let x = pinv(&m, 1e-12).expect("pinv");
        let mx = &m * &x;
        let xm = &x * &m;
        let mscale = 1.0 + m.norm() * x.norm();
        let e = [
            max_abs(&(&mx * &m - &m)),
            max_abs(&(&xm * &x - &x)),
            max_abs(&(&mx - mx.transpose())),
            max_abs(&(&xm - xm.transpose())),
        ];
        mp = mp.max(e.iter().fold(0.0f64, |acc, &v| acc.max(v)) / mscale);

        let sigma: Vec<f64> = (0..n).map(|j| 1.0 - 0.5 * j as f64 / n as f64).collect();
        let left = random_orthogonal(n, &mut rng);
        let right = random_orthogonal(n, &mut rng);
        let am = &left
            * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sigma.clone()))
            * right.transpose();
        for h in 1..=2 {
            let b = power_transform(&am, h);
            let sb = singular_values(&b).expect("svd");
            let top = sb[0];
            for (j, s) in sb.iter().enumerate() {
                power = power.max((s - sigma[j].powi(2 * h as i32 + 1)).abs() / top);
            }
        }
    }
    c.elapsed = start.elapsed();
    c.add(
        fact <= 1e-12,
        format!("K = U diag(C, I) V and its inverse form: max scaled residual {fact:.3e}"),
    );
    c.add(
        schur <= 1e-12,
        format!("Schur complement after h steps equals A - UV^T: max scaled residual {schur:.3e}"),
    );
    c.add(
        mp <= 1e-12,
        format!("Moore-Penrose identities: max scaled residual {mp:.3e}"),
    );
    c.add(
        power <= 1e-12,
        format!("power transform spectrum law: max relative deviation {power:.3e}"),
    );
    c
}

/// Orthogonal factors around singular values 1, 1e-2, …, 1e-14.
fn graded_input() -> DMatrix<f64> {
    let q1 = lcg_matrix(8, 8, 101).qr().q();
    let q2 = lcg_matrix(8, 8, 202).qr().q();
    let d = DMatrix::from_fn(8, 8, |i, j| {
        if i == j {
            10f64.powi(-2 * i as i32)
        } else {
            0.0
        }
    });
    q1 * d * q2.transpose()
}

fn oracle(c: &mut Criterion) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let shapes = [(6, 6), (8, 5), (5, 9), (12, 12), (20, 7), (3, 3)];
    for (k, &(m, n)) in shapes.iter().cycle().take(60).enumerate() {
        let a = lcg_matrix(m, n, k as u64 + 1);
        let lib = singular_values(&a).expect("svd");
        let ora = jacobi_singular_values(&a);
        for (x, y) in lib.iter().zip(&ora) {
            worst = worst.max((x - y).abs() / ora[0]);
        }
    }
    // graded spectrum, where relative accuracy of small values matters
    let a = graded_input();
    let lib = singular_values(&a).expect("svd");
    let ora = jacobi_singular_values(&a);
    for (x, y) in lib.iter().zip(&ora) {
        worst = worst.max((x - y).abs() / ora[0]);
    }
    c.elapsed += start.elapsed();
    c.add(
        worst <= 1e-12,
        format!("SVD against one-sided Jacobi oracle: max relative deviation {worst:.3e}"),
    );
}

fn main() {
    let total = Instant::now();
    let mut criteria = Vec::new();

    let mut c = Criterion::new(1, "trailing singular spaces", Some(180));
    experiment(&mut c, Experiment::Table1, |_| {});
    criteria.push(c);

    let mut c = Criterion::new(2, "leading singular spaces and low-rank error", Some(120));
    experiment(&mut c, Experiment::Table2, |_| {});
    criteria.push(c);

    let mut c = Criterion::new(3, "trailing spaces from leading complements", Some(120));
    experiment(&mut c, Experiment::Table3, |_| {});
    criteria.push(c);

    let mut c = Criterion::new(4, "preconditioning of the test classes", Some(240));
    experiment(&mut c, Experiment::Table4, |_| {});
    criteria.push(c);

    let mut c = Criterion::new(5, "condition growth under scaled updates", None);
    experiment(&mut c, Experiment::Scaling, |_| {});
    criteria.push(c);

    criteria.push(identities());

    let mut c = Criterion::new(7, "probabilistic bounds", Some(180));
    experiment(&mut c, Experiment::Bounds, |s| {
        s.sizes = vec![(32, 32), (64, 16), (64, 32), (16, 16)]
    });
    experiment(&mut c, Experiment::Srft, |s| s.sizes = vec![(256, 8)]);
    criteria.push(c);

    let mut c = Criterion::new(8, "oracle equivalence on small instances", None);
    oracle(&mut c);
    experiment(&mut c, Experiment::Cur, |s| {
        s.sizes = vec![(6, 2)];
        s.trials = 200;
        s.tol = 1e-10;
    });
    criteria.push(c);

    let mut c = Criterion::new(9, "elimination without pivoting", None);
    experiment(&mut c, Experiment::Genp, |s| {
        s.sizes = vec![(32, 1), (32, 2)];
        s.trials = 200;
        s.tol = 1e-8;
    });
    criteria.push(c);

    let mut failed = 0;
    for c in &criteria {
        if !c.report() {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        total.elapsed().as_secs_f64()
    );
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
