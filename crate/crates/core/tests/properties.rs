mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{point, rng, ty, TermGen};
use sfpc_core::dist::{decompose, ordered_patterns, reconstruct, GroundPoint};
use sfpc_core::inference::{iota, Exact, QuadConfig, Quadrature, WeightedMeasure};
use sfpc_core::lang::{alpha_eq, name, subst, Term, Ty};
use sfpc_core::opsem::{Config, Machine};
use sfpc_core::parser::{parse, pretty};
use sfpc_core::prims::PrimRegistry;
use sfpc_core::typecheck::{infer, Mode, TyCtx};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn decompose_reconstruct_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = ty(&mut r, 3);
        let p = point(&mut r, &t);
        let d = decompose(&p, &t).unwrap();
        prop_assert_eq!(d.pattern.slot_count(), d.slots.len());
        prop_assert!(ordered_patterns(&t).contains(&d.pattern));
        prop_assert!(d.slots.iter().all(|s| s.slot_ty().is_some()));
        prop_assert_eq!(reconstruct(&d.pattern, &d.slots), p);
    }

    #[test]
    fn types_are_preserved_by_steps(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut g = TermGen::new(&mut r);
        let t = if g.rng.random_bool(0.5) { Ty::Real } else { Ty::bool() };
        let prob = g.rng.random_bool(0.7);
        g.continuous = false;
        let term = if prob { g.prob(&t, 4) } else { g.det(&t, 4) };
        let mode = if prob { Mode::Prob } else { Mode::Det };
        prop_assert_eq!(infer(mode, &TyCtx::new(), &term).unwrap(), t.clone());
        let m = Machine::new(&Exact);
        let mut c = Config::closed(term).unwrap();
        let mut steps = 0;
        while !c.is_terminal() && steps < 500 {
            c = if prob {
                m.step_prob_sample(c, &mut rng(seed ^ steps)).unwrap().next
            } else {
                m.step_det(c).unwrap()
            };
            prop_assert_eq!(c.recheck().unwrap(), t.clone());
            steps += 1;
        }
        prop_assert!(c.is_terminal());
        prop_assert!(c.value_point().unwrap().has_type(&t));
    }

    #[test]
    fn pretty_then_parse_is_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut g = TermGen::new(&mut r);
        let term = g.prob(&Ty::Real, 4);
        let back = parse(&pretty(&term)).unwrap();
        prop_assert!(alpha_eq(&term, &back), "{}\n{}", term, back);
    }

    #[test]
    fn substitution_of_closed_values_commutes(seed in any::<u64>(), a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let mut r = rng(seed);
        let mut g = TermGen::new(&mut r);
        let open = g.prob(&Ty::Real, 3);
        let body = Term::let_("u", Term::ret(Term::var("fx")), Term::let_("w", Term::ret(Term::var("fy")), open));
        let (x, y) = (name("fx"), name("fy"));
        let (v, w) = (Term::lit(a), Term::lit(b));
        let one = subst(subst(body.clone(), &x, &v), &y, &w);
        let two = subst(subst(body, &y, &w), &x, &v);
        prop_assert!(alpha_eq(&one, &two));
        prop_assert!(one.free_vars().is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn parser_is_total(src in "\\PC{0,60}") {
        let _ = parse(&src);
    }

    #[test]
    fn parser_is_total_on_token_soup(toks in prop::collection::vec(prop::sample::select(vec![
        "let", "x", "=", "in", "(", ")", ",", ";", "sample", "bern", "0.5", "return", "score", "if", "then",
        "else", "case", "of", "{", "}", "|", "=>", "\\", ".", ":", "R", "bool", "+", "*", "norm", "thunk", "force",
    ]), 0..40)) {
        let _ = parse(&toks.join(" "));
    }

    #[test]
    fn fixed_prims_are_total(a in prop::num::f64::ANY, b in prop::num::f64::ANY, c in prop::num::f64::ANY) {
        let reg = PrimRegistry::standard();
        for n in reg.names().map(str::to_string).collect::<Vec<_>>() {
            let Some((dom, _)) = reg.lookup(&n) else { continue };
            let arg = match &dom {
                Ty::Real => GroundPoint::Real(a),
                Ty::Prod(x, y) if **x == Ty::Real && **y == Ty::Real => {
                    GroundPoint::pair(GroundPoint::Real(a), GroundPoint::Real(b))
                }
                Ty::Prod(x, _) if **x == Ty::Real => GroundPoint::pair(
                    GroundPoint::Real(a),
                    GroundPoint::pair(GroundPoint::Real(b), GroundPoint::Real(c)),
                ),
                _ => continue,
            };
            let (out, cod) = reg.apply(&n, &arg, &dom).unwrap();
            prop_assert!(out.has_type(&cod));
            if let GroundPoint::Real(v) = out {
                prop_assert!(!v.is_nan(), "{} returned NaN", n);
            }
        }
    }

    #[test]
    fn iota_is_invariant_under_refinement(
        atoms in prop::collection::vec((0.01..1.0f64, 0.0..10.0f64, 0..4u8), 1..8),
        pick in any::<prop::sample::Index>(),
    ) {
        let total: f64 = atoms.iter().map(|a| a.0).sum();
        let entries: Vec<_> = atoms.iter().map(|(p, s, v)| (p / total, *s, GroundPoint::Real(*v as f64))).collect();
        let m = WeightedMeasure::new(entries.clone(), Ty::Real);
        let mut refined = entries;
        let i = pick.index(refined.len());
        let (p, s, v) = refined.remove(i);
        for _ in 0..4 {
            refined.push((p / 4.0, s, v.clone()));
        }
        let a = iota(&m);
        prop_assert!(a.approx_eq(&iota(&WeightedMeasure::new(refined, Ty::Real)), 1e-12));
        if let Some(post) = a.posterior() {
            let mass: f64 = post.enumerate().unwrap().iter().map(|x| x.0).sum();
            prop_assert!((mass - 1.0).abs() < 1e-12);
            prop_assert!(a.evidence().unwrap() > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Continuous generated programs evaluate under a quadrature normalizer.
    #[test]
    fn continuous_programs_terminate(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut g = TermGen::new(&mut r);
        g.nested = false;
        let term = g.prob(&Ty::Real, 4);
        let q = Quadrature::new(QuadConfig { nodes: 16, ..QuadConfig::default() });
        let m = Machine::new(&q);
        let out = m.eval_prob_sample(Config::closed(term).unwrap(), &mut rng(seed)).unwrap();
        prop_assert!(out.weight >= 0.0);
        prop_assert!(out.value.value_point().unwrap().has_type(&Ty::Real));
    }
}
