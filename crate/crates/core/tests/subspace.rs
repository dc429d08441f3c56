use nalgebra::DMatrix;

use randpre::densela::{qr_thin, singular_values, spectral_norm};
use randpre::matgen::{svd_spec_matrix, SpectrumSpec};
use randpre::randmats::{gaussian, KindTag, RngStream};
use randpre::subspace::{
    leading_error_link, leading_sketch, nmb, numrank_search_traced, power_transform, rect_reduce,
    recursive_refine, subspace_residual, svd_from_right_basis, trailing_attempt,
    trailing_via_leading, trailing_via_nw, ComplementMethod, Reduction, TrailingMethod,
    DEFAULT_TAU,
};
use randpre::DenseMat;

fn input(n: usize, rho: usize, tail: f64, seed: u64) -> (DenseMat, randpre::densela::SvdTriple) {
    svd_spec_matrix(
        &SpectrumSpec::reciprocal(n, rho, tail),
        false,
        &mut RngStream::new(seed, 0).rng(),
    )
    .unwrap()
}

fn orthonormality_gap(q: &DenseMat) -> f64 {
    (q.transpose() * q - DMatrix::identity(q.ncols(), q.ncols()))
        .abs()
        .max()
}

#[test]
fn every_trailing_method_recovers_an_exact_null_space() {
    let (n, r) = (40, 3);
    let (a, truth) = input(n, n - r, 1e-14, 1);
    let t = truth.t_trail(n - r);
    let methods = [
        TrailingMethod::North,
        TrailingMethod::Northwest,
        TrailingMethod::Additive,
        TrailingMethod::LeadingComplement,
    ];
    for (i, method) in methods.into_iter().enumerate() {
        for kind in [KindTag::Gaussian, KindTag::Subcirculant] {
            let mut rng = RngStream::new(2, i as u64).rng();
            let res = trailing_attempt(&a, r, method, kind, &mut rng).unwrap();
            assert_eq!(res.b.shape(), (n, r));
            assert!(orthonormality_gap(&res.b) < 1e-12, "{method:?}");
            assert!(
                subspace_residual(&res.b, &t).unwrap() < 1e-8,
                "{method:?} {kind:?}"
            );
            assert!(res.residual < 1e-8);
        }
    }
}

#[test]
fn monitored_solver_accepts_below_threshold() {
    let (a, _) = input(30, 28, 1e-13, 3);
    let res = trailing_via_nw(
        &a,
        2,
        KindTag::Gaussian,
        &mut RngStream::new(3, 1).rng(),
        DEFAULT_TAU,
    )
    .unwrap();
    assert!(res.residual <= DEFAULT_TAU);
    assert!((1..=2).contains(&res.attempts));
}

#[test]
fn monitored_solver_rejects_without_a_gap() {
    let a = gaussian(20, 20, &mut RngStream::new(4, 0).rng());
    assert!(trailing_via_nw(
        &a,
        2,
        KindTag::Gaussian,
        &mut RngStream::new(4, 1).rng(),
        DEFAULT_TAU
    )
    .is_err());
}

#[test]
fn leading_sketch_captures_a_low_rank_input() {
    let (a, truth) = input(48, 6, 1e-12, 5);
    for kind in [KindTag::Gaussian, KindTag::Subcirculant, KindTag::Srft] {
        let sk = leading_sketch(&a, 8, kind, 0, &mut RngStream::new(5, 1).rng()).unwrap();
        assert_eq!(sk.q.shape(), (48, 8));
        assert!(orthonormality_gap(&sk.q) < 1e-12);
        assert!(sk.rel_err < 1e-9, "{kind:?}: {}", sk.rel_err);
        let link = leading_error_link(&a, &sk.q.columns(0, 6).into_owned(), &truth, 6);
        assert!(link.is_ok());
    }
}

#[test]
fn power_iterations_do_not_increase_error() {
    let (a, _) = input(40, 5, 1e-3, 6);
    let e0 = leading_sketch(&a, 5, KindTag::Gaussian, 0, &mut RngStream::new(6, 1).rng())
        .unwrap()
        .rel_err;
    let e2 = leading_sketch(&a, 5, KindTag::Gaussian, 2, &mut RngStream::new(6, 1).rng())
        .unwrap()
        .rel_err;
    assert!(e2 <= e0 * (1.0 + 1e-9));
}

#[test]
fn power_transform_raises_singular_values() {
    let (a, truth) = input(12, 12, 1.0, 7);
    let b = power_transform(&a, 1);
    let s = singular_values(&b).unwrap();
    for (x, y) in s.iter().zip(&truth.sigma) {
        assert!((x - y.powi(3)).abs() < 1e-13);
    }
}

#[test]
fn complement_is_orthogonal_to_its_input() {
    let b = qr_thin(&gaussian(15, 4, &mut RngStream::new(8, 0).rng()))
        .unwrap()
        .0;
    let c = nmb(&b).unwrap();
    assert_eq!(c.shape(), (15, 11));
    assert!((b.transpose() * &c).abs().max() < 1e-13);
    assert!(orthonormality_gap(&c) < 1e-13);
}

#[test]
fn randomized_complement_matches_full_qr() {
    let (n, r) = (32, 2);
    let (a, truth) = input(n, n - r, 1e-13, 9);
    let t = truth.t_trail(n - r);
    for how in [ComplementMethod::FullQr, ComplementMethod::RandomizedNorth] {
        let res = trailing_via_leading(
            &a,
            n - r,
            KindTag::Gaussian,
            how,
            &mut RngStream::new(9, 1).rng(),
        )
        .unwrap();
        assert!(subspace_residual(&res.b, &t).unwrap() < 1e-6, "{how:?}");
    }
}

#[test]
fn rank_search_finds_the_gap() {
    let (a, _) = input(40, 7, 1e-12, 10);
    let trace = numrank_search_traced(
        &a,
        1e-8,
        KindTag::Gaussian,
        &mut RngStream::new(10, 1).rng(),
    )
    .unwrap();
    assert_eq!(trace.rank, 7);
    assert!(trace.probes.len() <= 8);
}

#[test]
fn approximate_svd_from_exact_basis() {
    let (a, truth) = input(20, 4, 1e-15, 11);
    let (_, sigma, _) = svd_from_right_basis(&a, &truth.t_lead(4)).unwrap();
    for (got, want) in sigma.iter().zip(&truth.sigma) {
        assert!((got - want).abs() < 1e-13);
    }
}

#[test]
fn reductions_preserve_the_null_space() {
    let mut rng = RngStream::new(12, 0).rng();
    let tall = gaussian(30, 6, &mut rng) * gaussian(6, 10, &mut rng);
    for red in [
        Reduction::Gram,
        Reduction::Premultiply,
        Reduction::PadBottom,
    ] {
        let sq = rect_reduce(&tall.transpose(), red, &mut rng).unwrap();
        assert!(sq.square.is_square());
    }
    let sq = rect_reduce(&tall, Reduction::Premultiply, &mut rng).unwrap();
    assert_eq!(sq.square.shape(), (10, 10));
    let res = trailing_attempt(
        &sq.square,
        4,
        TrailingMethod::North,
        KindTag::Gaussian,
        &mut rng,
    )
    .unwrap();
    let back = sq.restrict(&res.b).unwrap();
    assert!(spectral_norm(&(&tall * back)).unwrap() < 1e-9 * spectral_norm(&tall).unwrap());
    assert!(rect_reduce(&tall, Reduction::Identity, &mut rng).is_err());
}

#[test]
fn refinement_tightens_a_coarse_basis() {
    let (n, r) = (30, 2);
    let (a, truth) = input(n, n - r, 1e-14, 13);
    // coarse basis: true trailing space plus two leading directions
    let y = randpre::densela::hstack(&[&truth.t_trail(n - r), &truth.t_lead(2)]).unwrap();
    let res = recursive_refine(
        &a,
        &y,
        1e-8,
        KindTag::Gaussian,
        &mut RngStream::new(13, 1).rng(),
    )
    .unwrap();
    assert_eq!(res.b.ncols(), r);
    assert!(res.residual < 1e-10);
}
