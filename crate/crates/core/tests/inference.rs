use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use sfpc_core::dist::GroundPoint;
use sfpc_core::inference::{
    iota, normalize_exact, normalize_mc, normalize_quadrature, McConfig, NormResult, QuadConfig, WeightedMeasure,
};
use sfpc_core::lang::{Term, Ty};
use sfpc_core::parser::parse;
use sfpc_core::Error;

fn program(rel: &str) -> Term {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs").join(rel);
    parse(&fs::read_to_string(p).unwrap()).unwrap()
}

fn body(t: Term) -> Term {
    match t {
        Term::Norm(b) => *b,
        other => other,
    }
}

fn p_true(r: &NormResult) -> f64 {
    r.posterior().unwrap().expectation(|x| x.as_bool().unwrap() as u8 as f64).unwrap()
}

#[test]
fn exact_bern_exp() {
    let r = normalize_exact(&program("discrete/bern_exp.sfpc")).unwrap();
    assert!((r.evidence().unwrap() - 2.75).abs() <= 1e-12);
    assert!((p_true(&r) - 5.0 / 11.0).abs() <= 1e-12);
    let atoms = r.posterior().unwrap().enumerate().unwrap();
    assert!((atoms.iter().map(|a| a.0).sum::<f64>() - 1.0).abs() <= 1e-12);
}

#[test]
fn exact_never_reports_infinite_and_rejects_continuous() {
    let e = normalize_exact(&body(program("continuous/exp_infinite.sfpc"))).unwrap_err();
    assert!(matches!(e, Error::NotEnumerable(_)));
    assert_eq!(normalize_exact(&program("discrete/zero_evidence.sfpc")).unwrap(), NormResult::ZeroEvidence);
}

#[test]
fn quadrature_gaussian_conditioning() {
    // Marginal of the datum: N(5; 0, sqrt(3^2 + 1^2)).
    let var = 9.0 + 1.0;
    let z = (-(5.0f64 * 5.0) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
    // Posterior mean is 9/10 * 5 = 4.5, exactly the threshold, so P(true) = 1/2.
    let r = normalize_quadrature(&body(program("continuous/gauss_cond.sfpc")), &QuadConfig::default()).unwrap();
    assert!((r.evidence().unwrap() - z).abs() <= 1e-4, "{r:?} vs {z}");
    assert!((p_true(&r) - 0.5).abs() <= 1e-3, "{}", p_true(&r));
    assert!((z - 0.036144).abs() < 1e-6);
}

#[test]
fn quadrature_infinite_evidence() {
    let r = normalize_quadrature(&body(program("continuous/exp_infinite.sfpc")), &QuadConfig::default()).unwrap();
    assert_eq!(r, NormResult::InfiniteEvidence);
}

#[test]
fn quadrature_beta_bernoulli() {
    // E[x] under beta(1, 3) is 1/4; the posterior beta(2, 3) has mean 2/5.
    let r = normalize_quadrature(&body(program("continuous/beta_bernoulli.sfpc")), &QuadConfig::default()).unwrap();
    assert!((r.evidence().unwrap() - 0.25).abs() < 1e-4);
    let mean = r.posterior().unwrap().expectation(|x| x.as_real().unwrap()).unwrap();
    assert!((mean - 0.4).abs() < 1e-4);
}

#[test]
fn quadrature_site_limit() {
    let t = parse(
        "let a = sample(gauss(0.0, 1.0)) in let b = sample(gauss(0.0, 1.0)) in
         let c = sample(gauss(0.0, 1.0)) in let d = sample(gauss(0.0, 1.0)) in return(a)",
    )
    .unwrap();
    let cfg = QuadConfig { nodes: 4, ..QuadConfig::default() };
    assert!(matches!(normalize_quadrature(&t, &cfg), Err(Error::TooManyContinuousSites(3))));
}

#[test]
fn mc_bern_exp() {
    let r = normalize_mc(&program("discrete/bern_exp.sfpc"), &McConfig { trials: 100_000, seed: 0 }).unwrap();
    assert!((r.evidence - 2.75).abs() <= 4.0 * r.evidence_se);
    assert!(r.evidence_se < 0.02);
    let (atom, se) = r.atom_se.iter().find(|(x, _)| *x == GroundPoint::bool(true)).unwrap().clone();
    let p = r.result.posterior().unwrap().enumerate().unwrap().into_iter().find(|(_, x)| *x == atom).unwrap().0;
    assert!((p - 5.0 / 11.0).abs() <= 4.0 * se, "{p} ± {se}");
}

#[test]
fn mc_beta_bernoulli() {
    let r =
        normalize_mc(&body(program("continuous/beta_bernoulli.sfpc")), &McConfig { trials: 100_000, seed: 0 }).unwrap();
    assert!((r.evidence - 0.25).abs() <= 4.0 * r.evidence_se);
    let post = r.result.posterior().unwrap();
    let mean = post.expectation(|x| x.as_real().unwrap()).unwrap();
    let m2 = post.expectation(|x| x.as_real().unwrap().powi(2)).unwrap();
    // Self-normalized estimator error, generous delta-method bound.
    let se = ((m2 - mean * mean) / 100_000f64).sqrt() * 2.0;
    assert!((mean - 0.4).abs() <= 4.0 * se, "{mean}");
}

#[test]
fn mc_zero_is_flagged_best_effort() {
    let r = normalize_mc(&program("discrete/zero_evidence.sfpc"), &McConfig { trials: 50, seed: 1 }).unwrap();
    assert_eq!(r.result, NormResult::ZeroEvidence);
    assert!(r.zero_is_best_effort);
}

#[test]
fn mc_deterministic_in_seed() {
    let t = body(program("continuous/importance.sfpc"));
    let cfg = McConfig { trials: 3_000, seed: 12 };
    assert_eq!(normalize_mc(&t, &cfg).unwrap(), normalize_mc(&t, &cfg).unwrap());
    assert_ne!(normalize_mc(&t, &cfg).unwrap(), normalize_mc(&t, &McConfig { seed: 13, ..cfg }).unwrap());
}

#[test]
fn iota_success_masses_sum_to_one() {
    let m = WeightedMeasure::new(
        (0..7).map(|i| (1.0 / 7.0, i as f64 * 0.3, GroundPoint::Real(i as f64))).collect(),
        Ty::Real,
    );
    let r = iota(&m);
    let total: f64 = r.posterior().unwrap().enumerate().unwrap().iter().map(|a| a.0).sum();
    assert!((total - 1.0).abs() < 1e-12 && r.evidence().unwrap() > 0.0);
}
