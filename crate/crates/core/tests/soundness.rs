//! The operational enumerator against the denotational oracle.

use std::fs;
use std::path::PathBuf;

use sfpc_core::dist::GroundPoint;
use sfpc_core::inference::{denote_prob, Exact, WeightedMeasure};
use sfpc_core::lang::Term;
use sfpc_core::opsem::{CanonicalEnv, Config, Machine};
use sfpc_core::parser::parse;

fn corpus(dir: &str) -> Vec<(String, Term)> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs").join(dir);
    let mut out: Vec<(String, Term)> = fs::read_dir(&root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "sfpc"))
        .map(|p| {
            let src = fs::read_to_string(&p).unwrap();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let t = parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, t)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn operational(t: &Term) -> WeightedMeasure {
    let m = Machine::new(&Exact);
    WeightedMeasure::from_config(&m, Config::closed(t.clone()).unwrap()).unwrap()
}

fn oracle(t: &Term) -> WeightedMeasure {
    denote_prob(t, &CanonicalEnv::new()).unwrap()
}

#[test]
fn enumerator_agrees_with_oracle_on_discrete_corpus() {
    let programs = corpus("discrete");
    assert!(programs.len() >= 20);
    let mut nested = 0;
    let mut higher_order = 0;
    for (name, t) in &programs {
        let src = t.to_string();
        nested += src.contains("norm") as usize;
        higher_order += (src.contains('\\') || src.contains("thunk")) as usize;
        let (a, b) = (operational(t), oracle(t));
        let total: f64 = a.entries.iter().map(|e| e.0).sum();
        assert!((total - 1.0).abs() < 1e-12, "{name}: probabilities sum to {total}");
        assert!(a.approx_eq(&b, 1e-12), "{name}:\n{:?}\n{:?}", a, b);
    }
    assert!(nested >= 3 && higher_order >= 3);
}

#[test]
fn worked_measures() {
    let m = oracle(&parse("return(true)").unwrap());
    assert_eq!(m.entries, vec![(1.0, 1.0, GroundPoint::bool(true))]);

    let m = oracle(&parse("let x = score(2.0) in score(3.0); return(*)").unwrap());
    assert_eq!(m.entries, vec![(1.0, 6.0, GroundPoint::Unit)]);

    let bern_exp = corpus("discrete").into_iter().find(|(n, _)| n == "bern_exp.sfpc").unwrap().1;
    let mut e = oracle(&bern_exp).entries;
    e.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(e, vec![(0.25, 5.0, GroundPoint::bool(true)), (0.75, 2.0, GroundPoint::bool(false))]);
}

/// Monad laws instantiated with each corpus program.
#[test]
fn monad_laws_on_corpus() {
    use sfpc_core::lang::{fresh_name, subst};
    for (name, t) in corpus("discrete") {
        // let x = t in return(x)  ==  t
        let x = fresh_name("x");
        let wrapped = Term::Let(x.clone(), Box::new(t.clone()), Box::new(Term::ret(Term::Var(x.clone()))));
        assert!(oracle(&wrapped).approx_eq(&oracle(&t), 1e-12), "{name}: right unit");

        // let x = return(v) in u  ==  u[v/x], with u = t; return(x)
        let v = Term::lit(2.5);
        let u = Term::seq(t.clone(), Term::ret(Term::Var(x.clone())));
        let lhs = Term::Let(x.clone(), Box::new(Term::ret(v.clone())), Box::new(u.clone()));
        assert!(oracle(&lhs).approx_eq(&oracle(&subst(u, &x, &v)), 1e-12), "{name}: left unit");

        // let y = (let x = t in u) in w  ==  let x = t in let y = u in w
        let y = fresh_name("y");
        let u = Term::seq(Term::score(Term::lit(0.5)), Term::ret(Term::Var(x.clone())));
        let w = Term::ret(Term::pair(Term::Var(y.clone()), Term::Star));
        let nested = Term::Let(
            y.clone(),
            Box::new(Term::Let(x.clone(), Box::new(t.clone()), Box::new(u.clone()))),
            Box::new(w.clone()),
        );
        let flat = Term::Let(x.clone(), Box::new(t.clone()), Box::new(Term::Let(y.clone(), Box::new(u), Box::new(w))));
        assert!(oracle(&nested).approx_eq(&oracle(&flat), 1e-12), "{name}: associativity");

        // let x = t in let y = s in return((x, y))  ==  swapped
        let s = parse("let c = sample(bern(0.35)) in score(if c then 1.5 else 0.5); return(c)").unwrap();
        let pair = Term::ret(Term::pair(Term::Var(x.clone()), Term::Var(y.clone())));
        let ts = Term::Let(
            x.clone(),
            Box::new(t.clone()),
            Box::new(Term::Let(y.clone(), Box::new(s.clone()), Box::new(pair.clone()))),
        );
        let st = Term::Let(y.clone(), Box::new(s), Box::new(Term::Let(x.clone(), Box::new(t), Box::new(pair))));
        assert!(oracle(&ts).approx_eq(&oracle(&st), 1e-12), "{name}: commutativity");
    }
}

#[test]
fn score_fusion_and_clamping() {
    for (a, b) in [(7.0, 6.1), (0.0, 3.0), (0.5, 0.25), (1e3, 1e-3)] {
        let split = parse(&format!("score({a:?}); score({b:?}); return(true)")).unwrap();
        let fused = parse(&format!("score({:?}); return(true)", a * b)).unwrap();
        assert!(oracle(&split).approx_eq(&oracle(&fused), 1e-12));
    }
    let neg = oracle(&parse("score(-1.0); return(*)").unwrap());
    let zero = oracle(&parse("score(0.0); return(*)").unwrap());
    assert_eq!(neg, zero);
}

#[test]
fn oracle_rejects_continuous_and_closures() {
    use sfpc_core::Error;
    let e = denote_prob(&parse("sample(gauss(0.0, 1.0))").unwrap(), &CanonicalEnv::new()).unwrap_err();
    assert!(matches!(e, Error::NotEnumerable(_)));
}
