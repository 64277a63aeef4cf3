//! Checking program equations: exact comparison of enumerated measures for
//! discrete programs, and two-sample comparison of Monte Carlo estimates
//! otherwise.

use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::dist::{decompose, json_real, ordered_patterns, GroundPoint};
use crate::error::{Error, Result};
use crate::inference::{run_traces, weighted_expectation, Exact, NormResult, QuadConfig, Quadrature, WeightedMeasure};
use crate::lang::{fresh_name, name, Arm, Term, Ty};
use crate::opsem::{CanonicalEnv, Config, Machine, Mode, Normalizer};
use crate::parser::parse;
use crate::typecheck::check_program;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Both sides are enumerated and compared within 1e-12.
    Exact,
    /// Evidence and probe expectations are estimated by sampling.
    Statistical,
    /// Both sides are normalized by quadrature and the results compared.
    Quadrature,
}

impl CheckMode {
    pub fn name(self) -> &'static str {
        match self {
            CheckMode::Exact => "exact",
            CheckMode::Statistical => "statistical",
            CheckMode::Quadrature => "quadrature",
        }
    }
}

/// A test function `A ⇒ R`.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub name: String,
    pub term: Term,
}

#[derive(Clone, Debug)]
pub struct EquationCase {
    pub name: String,
    pub left: Term,
    pub right: Term,
    pub mode: CheckMode,
    /// Test functions on the result type; generated from the type when empty.
    pub probes: Vec<Probe>,
}

impl EquationCase {
    pub fn new(name: &str, left: Term, right: Term, mode: CheckMode) -> EquationCase {
        EquationCase { name: name.to_string(), left, right, mode, probes: Vec::new() }
    }

    fn parsed(name: &str, left: &str, right: &str, mode: CheckMode) -> EquationCase {
        let side = |s: &str| parse(s).unwrap_or_else(|e| panic!("corpus case {name}: {e}"));
        EquationCase::new(name, side(left), side(right), mode)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    pub trials: usize,
    pub seed: u64,
    /// Pass threshold in pooled standard errors.
    pub k: f64,
    pub quad: QuadConfig,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { trials: 100_000, seed: 0, k: 4.0, quad: QuadConfig::default() }
    }
}

/// One compared quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub left: f64,
    pub left_se: f64,
    pub right: f64,
    pub right_se: f64,
    pub pass: bool,
}

impl Quantity {
    fn to_json(&self) -> Json {
        json!({
            "name": self.name,
            "left": json_real(self.left),
            "left_se": json_real(self.left_se),
            "right": json_real(self.right),
            "right_se": json_real(self.right_se),
            "pass": self.pass,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub case: String,
    pub mode: CheckMode,
    pub pass: bool,
    pub detail: String,
    pub quantities: Vec<Quantity>,
}

impl Verdict {
    pub fn to_json(&self) -> Json {
        json!({
            "case": self.case,
            "mode": self.mode.name(),
            "verdict": if self.pass { "PASS" } else { "FAIL" },
            "detail": self.detail,
            "quantities": self.quantities.iter().map(Quantity::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Checks that both sides are closed, well typed and of the same type.
fn judge(case: &EquationCase) -> Result<(Mode, Ty)> {
    let l = check_program(&case.left)?;
    let r = check_program(&case.right)?;
    if (l.mode, &l.ty) != (r.mode, &r.ty) {
        return Err(Error::internal(format!("case {}: sides have different types {} and {}", case.name, l.ty, r.ty)));
    }
    if !l.ty.is_measurable() {
        return Err(Error::internal(format!("case {}: type {} is not measurable", case.name, l.ty)));
    }
    Ok((l.mode, l.ty))
}

pub fn check(case: &EquationCase, cfg: &CheckConfig) -> Result<Verdict> {
    match case.mode {
        CheckMode::Exact => check_exact(case),
        CheckMode::Statistical => check_statistical(case, cfg),
        CheckMode::Quadrature => check_quadrature(case, cfg),
    }
}

/// Runs cases in parallel; verdicts come back in input order.
pub fn check_all(cases: &[EquationCase], cfg: &CheckConfig) -> Vec<Result<Verdict>> {
    cases.par_iter().map(|c| check(c, cfg)).collect()
}

// ---- exact ----

pub fn check_exact(case: &EquationCase) -> Result<Verdict> {
    const TOL: f64 = 1e-12;
    let (mode, _) = judge(case)?;
    let m = Machine::new(&Exact);
    let (pass, quantities) = match mode {
        Mode::Prob => {
            let l = WeightedMeasure::from_config(&m, Config::closed(case.left.clone())?)?;
            let r = WeightedMeasure::from_config(&m, Config::closed(case.right.clone())?)?;
            let q = exact_quantity("evidence", l.evidence(), r.evidence(), TOL);
            (l.approx_eq(&r, TOL), vec![q])
        }
        Mode::Det => {
            let l = m.eval_det(Config::closed(case.left.clone())?)?.0.value_point()?;
            let r = m.eval_det(Config::closed(case.right.clone())?)?.0.value_point()?;
            match (NormResult::from_point(&l), NormResult::from_point(&r)) {
                (Ok(a), Ok(b)) if matches!(l, GroundPoint::Inj(..)) => {
                    let (ea, eb) = (a.evidence().unwrap_or(0.0), b.evidence().unwrap_or(0.0));
                    (a.approx_eq(&b, TOL), vec![exact_quantity("evidence", ea, eb, TOL)])
                }
                _ => (l.approx_eq(&r, TOL), Vec::new()),
            }
        }
    };
    Ok(Verdict {
        case: case.name.clone(),
        mode: CheckMode::Exact,
        pass,
        detail: if pass { "denotations agree".into() } else { "denotations differ".into() },
        quantities,
    })
}

fn exact_quantity(name: &str, left: f64, right: f64, tol: f64) -> Quantity {
    Quantity {
        name: name.into(),
        left,
        left_se: 0.0,
        right,
        right_se: 0.0,
        pass: crate::dist::reals_close(left, right, tol),
    }
}

// ---- statistical ----

/// Estimates extracted from one side of an equation.
struct Summary {
    /// Tag of the implied norm result; `None` for plain deterministic values.
    tag: Option<usize>,
    evidence: Option<(f64, f64)>,
    probes: Vec<(f64, f64)>,
}

/// The probe test functions of a case.
pub fn case_probes(case: &EquationCase, ty: &Ty, mode: Mode) -> Vec<Probe> {
    if !case.probes.is_empty() {
        return case.probes.clone();
    }
    match (mode, norm_payload(ty)) {
        (Mode::Det, Some(a)) => auto_probes(&a),
        _ => auto_probes(ty),
    }
}

/// `A` when `ty` is `(R × P(A)) + 1 + 1`.
fn norm_payload(ty: &Ty) -> Option<Ty> {
    match ty {
        Ty::Sum(arms) if arms.len() == 3 && arms[1] == Ty::Unit && arms[2] == Ty::Unit => match &arms[0] {
            Ty::Prod(r, p) if **r == Ty::Real => match &**p {
                Ty::Prob(a) => Some((**a).clone()),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

fn side_seed(seed: u64, case: &str, side: &str) -> u64 {
    // FNV-1a over the case name and side, so streams are stable across runs.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in case.bytes().chain(*b"/").chain(side.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    seed ^ h
}

/// Applies a probe to a point of type `ty`.
pub fn eval_probe(m: &Machine<'_>, probe: &Probe, point: &GroundPoint, ty: &Ty) -> Result<f64> {
    let d = decompose(point, ty)?;
    let mut env = CanonicalEnv::new();
    let names: Vec<_> = d.slots.into_iter().map(|p| env.push_fresh(p)).collect();
    let arg = d.pattern.to_term(&mut names.into_iter());
    let c = Config { mode: Mode::Det, env, term: Term::app(probe.term.clone(), arg), ty: Ty::Real, path: 0 };
    m.eval_det(c)?.0.value_point()?.as_real().ok_or_else(|| Error::internal("probe did not return a real"))
}

fn summarize(
    m: &Machine<'_>,
    side: &Term,
    mode: Mode,
    ty: &Ty,
    probes: &[Probe],
    trials: usize,
    seed: u64,
) -> Result<Summary> {
    let body = match (mode, side) {
        (Mode::Prob, t) => Some(t.clone()),
        (Mode::Det, Term::Norm(b)) => Some((**b).clone()),
        _ => None,
    };
    if let Some(body) = body {
        let c = Config::closed(body)?;
        let traces = run_traces(m, &c, trials, seed)?;
        let (z, z_se) = crate::inference::evidence_estimate(&traces);
        let probes =
            probes.iter().map(|p| weighted_expectation_par(m, &traces, p, &c.ty)).collect::<Result<Vec<_>>>()?;
        let tag = if mode == Mode::Det { Some(if z > 0.0 { 0 } else { 1 }) } else { None };
        return Ok(Summary { tag, evidence: Some((z, z_se)), probes });
    }
    let point = m.eval_det(Config::closed(side.clone())?)?.0.value_point()?;
    if let Some(a) = norm_payload(ty) {
        let r = NormResult::from_point(&point)?;
        let probes = match r.posterior() {
            Some(post) => {
                let atoms = post.enumerate().ok_or_else(|| Error::NotEnumerable(post.render()))?;
                probes
                    .iter()
                    .map(|p| {
                        let mut s = 0.0;
                        for (w, x) in &atoms {
                            s += w * eval_probe(m, p, x, &a)?;
                        }
                        Ok((s, 0.0))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            None => Vec::new(),
        };
        return Ok(Summary { tag: Some(r.tag()), evidence: r.evidence().map(|e| (e, 0.0)), probes });
    }
    let probes = probes.iter().map(|p| Ok((eval_probe(m, p, &point, ty)?, 0.0))).collect::<Result<Vec<_>>>()?;
    Ok(Summary { tag: None, evidence: None, probes })
}

fn weighted_expectation_par(
    m: &Machine<'_>,
    traces: &[crate::inference::Trace],
    probe: &Probe,
    ty: &Ty,
) -> Result<(f64, f64)> {
    let vals = traces.par_iter().map(|t| eval_probe(m, probe, &t.value, ty)).collect::<Result<Vec<f64>>>()?;
    let mut i = 0;
    weighted_expectation(traces, |_| {
        let v = vals[i];
        i += 1;
        Ok(v)
    })
}

pub fn check_statistical(case: &EquationCase, cfg: &CheckConfig) -> Result<Verdict> {
    let (mode, ty) = judge(case)?;
    let probes = case_probes(case, &ty, mode);
    // Nested `norm` inside either side is computed by quadrature, so the
    // only sampling error is that of the outer traces.
    let nu = Quadrature::new(cfg.quad.clone());
    let m = Machine::new(&nu);
    let l = summarize(&m, &case.left, mode, &ty, &probes, cfg.trials, side_seed(cfg.seed, &case.name, "left"))?;
    let r = summarize(&m, &case.right, mode, &ty, &probes, cfg.trials, side_seed(cfg.seed, &case.name, "right"))?;
    let compare = |name: &str, (a, sa): (f64, f64), (b, sb): (f64, f64)| Quantity {
        name: name.to_string(),
        left: a,
        left_se: sa,
        right: b,
        right_se: sb,
        pass: (a - b).abs() <= cfg.k * (sa * sa + sb * sb).sqrt() + 1e-9,
    };
    let mut quantities = Vec::new();
    if let (Some(a), Some(b)) = (l.evidence, r.evidence) {
        quantities.push(compare("evidence", a, b));
    }
    let tags_agree = l.tag == r.tag;
    if tags_agree && l.probes.len() == r.probes.len() {
        for ((p, a), b) in probes.iter().zip(l.probes).zip(r.probes) {
            quantities.push(compare(&p.name, a, b));
        }
    }
    let pass = tags_agree && quantities.iter().all(|q| q.pass);
    let detail = if !tags_agree {
        format!("result tags differ: {:?} vs {:?}", l.tag, r.tag)
    } else {
        format!("{} trials per side, k = {}", cfg.trials, cfg.k)
    };
    Ok(Verdict { case: case.name.clone(), mode: CheckMode::Statistical, pass, detail, quantities })
}

// ---- quadrature ----

pub fn check_quadrature(case: &EquationCase, cfg: &CheckConfig) -> Result<Verdict> {
    const TOL: f64 = 1e-6;
    let (mode, _) = judge(case)?;
    let nu = Quadrature::new(cfg.quad.clone());
    let m = Machine::new(&nu);
    let result = |side: &Term| -> Result<NormResult> {
        match (mode, side) {
            (Mode::Prob, t) => nu.normalize(&m, Config::closed(t.clone())?),
            (Mode::Det, Term::Norm(t)) => nu.normalize(&m, Config::closed((**t).clone())?),
            (Mode::Det, t) => NormResult::from_point(&m.eval_det(Config::closed(t.clone())?)?.0.value_point()?),
        }
    };
    let (a, b) = (result(&case.left)?, result(&case.right)?);
    let pass = a.approx_eq(&b, TOL);
    let mut quantities = vec![Quantity {
        name: "tag".into(),
        left: a.tag() as f64,
        left_se: 0.0,
        right: b.tag() as f64,
        right_se: 0.0,
        pass: a.tag() == b.tag(),
    }];
    if let (Some(ea), Some(eb)) = (a.evidence(), b.evidence()) {
        quantities.push(exact_quantity("evidence", ea, eb, TOL));
    }
    Ok(Verdict {
        case: case.name.clone(),
        mode: CheckMode::Quadrature,
        pass,
        detail: format!("left tag {}, right tag {}", a.tag(), b.tag()),
        quantities,
    })
}

// ---- probes, inhabitants and the SMC transform ----

/// Default test functions for a type: identity and square on reals,
/// indicators of summands, projections and a product of the first probes
/// of both components on pairs.
pub fn auto_probes(ty: &Ty) -> Vec<Probe> {
    let v = name("v");
    gen_probes(ty, &Term::Var(v.clone()), "v", 0)
        .into_iter()
        .map(|(n, body)| Probe {
            name: n,
            term: Term::Lam { param: v.clone(), ann: Some(ty.clone()), body: Box::new(body) },
        })
        .collect()
}

fn gen_probes(ty: &Ty, e: &Term, label: &str, depth: usize) -> Vec<(String, Term)> {
    match ty {
        Ty::Real => {
            vec![(label.to_string(), e.clone()), (format!("{label}^2"), Term::prim2("*", e.clone(), e.clone()))]
        }
        Ty::Sum(arms) => {
            let binder = format!("y{depth}");
            let indicator = |i: usize, body: Term| {
                let arms = (0..arms.len())
                    .map(|j| Arm::new(&binder, if j == i { body.clone() } else { Term::lit(0.0) }))
                    .collect();
                Term::CaseD(Box::new(e.clone()), arms)
            };
            let mut out = Vec::new();
            if ty.is_bool() {
                out.push((format!("1[{label}=true]"), indicator(1, Term::lit(1.0))));
            } else {
                for i in 0..arms.len().saturating_sub(1) {
                    out.push((format!("1[{label}.tag={i}]"), indicator(i, Term::lit(1.0))));
                }
            }
            for (i, arm_ty) in arms.iter().enumerate() {
                for (n, body) in gen_probes(arm_ty, &Term::var(&binder), &format!("{label}.{i}"), depth + 1) {
                    out.push((n, indicator(i, body)));
                }
            }
            out
        }
        Ty::Prod(a, b) => {
            let l = gen_probes(a, &Term::proj(0, e.clone()), &format!("{label}.0"), depth);
            let r = gen_probes(b, &Term::proj(1, e.clone()), &format!("{label}.1"), depth);
            let mut out = Vec::new();
            if let (Some((nl, tl)), Some((nr, tr))) = (l.first(), r.first()) {
                out.push((format!("{nl}*{nr}"), Term::prim2("*", tl.clone(), tr.clone())));
            }
            l.into_iter().chain(r).chain(out).collect()
        }
        _ => Vec::new(),
    }
}

/// A closed value of type `ty`: the first ordered value with no slots when
/// there is one, otherwise built structurally with `0.0` for reals.
pub fn canonical_inhabitant(ty: &Ty) -> Term {
    if let Some(p) = ordered_patterns(ty).into_iter().find(|p| p.slot_count() == 0) {
        return p.to_term(&mut std::iter::empty());
    }
    match ty {
        Ty::Real => Term::lit(0.0),
        Ty::Unit => Term::Star,
        Ty::Prod(a, b) => Term::pair(canonical_inhabitant(a), canonical_inhabitant(b)),
        Ty::Sum(arms) => Term::inj(0, ty.clone(), canonical_inhabitant(&arms[0])),
        Ty::Prob(a) => Term::prim("dirac", canonical_inhabitant(a)),
        Ty::Dens(_) => Term::prim("density_gauss", Term::pair(Term::lit(0.0), Term::lit(1.0))),
        Ty::Fun(a, b) => Term::lam("_", Some((**a).clone()), canonical_inhabitant(b)),
        Ty::Thunk(a) => Term::thunk(Term::ret(canonical_inhabitant(a))),
    }
}

/// Rewrites `norm(let x = t in (score(u); v))` into its renormalize and
/// resample form.
pub fn smc_transform(program: &Term) -> Result<Term> {
    let shape_err = || Error::internal(format!("`{program}` is not of the form norm(let x = t in (score(u); v))"));
    let Term::Norm(body) = program else { return Err(shape_err()) };
    let Term::Let(x, t, rest) = &**body else { return Err(shape_err()) };
    let Term::Let(_, score, v) = &**rest else { return Err(shape_err()) };
    let Term::Score(u) = &**score else { return Err(shape_err()) };
    let result_ty = crate::typecheck::infer(Mode::Prob, &Default::default(), body)?;
    let p = fresh_name("p");
    let inner = Term::norm(Term::Let(
        x.clone(),
        t.clone(),
        Box::new(Term::seq(Term::Score(u.clone()), Term::ret(Term::Var(x.clone())))),
    ));
    let resample = Term::seq(
        Term::score(Term::proj(0, Term::Var(p.clone()))),
        Term::Let(x.clone(), Box::new(Term::sample(Term::proj(1, Term::Var(p.clone())))), v.clone()),
    );
    let zero = Term::seq(Term::score(Term::lit(0.0)), Term::ret(canonical_inhabitant(&result_ty)));
    let undo = (**body).clone();
    let arms = vec![Arm { binder: p, body: resample }, Arm::new("_", zero), Arm::new("_", undo)];
    Ok(Term::norm(Term::CaseP(Box::new(inner), arms)))
}

// ---- corpus ----

const BERN_EXP_BODY: &str = "let x = sample(bern(0.25)) in score(if x then 5.0 else 2.0); return(x)";
const GAUSS_BODY: &str = "let x = sample(gauss(0.0, 1.0)) in score(density_gauss(1.0, (x, 1.0))); return(x)";
const EXP_BODY: &str = "let x = sample(expdist(1.0)) in score(exp(x)); return(x)";
const E_H: &str = "(\\dp : T(bool) * (bool -> R).
    case norm(let a = force(fst dp) in score((snd dp) a)) of {
      (0, r) => fst r | (1, _) => 0.0 | (2, _) => 0.0 })";

fn smc_case(name: &str, body: &str, mode: CheckMode) -> EquationCase {
    let left = parse(&format!("norm({body})")).expect("corpus program parses");
    let right = smc_transform(&left).expect("corpus program has the SMC shape");
    EquationCase::new(name, left, right, mode)
}

/// The built-in equation corpus.
pub fn builtin_corpus() -> Vec<EquationCase> {
    use CheckMode::*;
    let cases = vec![
        EquationCase::parsed(
            "monad-left-unit",
            "let x = return(2.0) in score(x); return(x + 1.0)",
            "score(2.0); return(2.0 + 1.0)",
            Exact,
        ),
        EquationCase::parsed("monad-right-unit", "let x = sample(bern(0.3)) in return(x)", "sample(bern(0.3))", Exact),
        EquationCase::parsed(
            "monad-assoc",
            "let y = (let x = sample(bern(0.3)) in score(if x then 2.0 else 0.5); return(x)) in
             let z = sample(bern(0.6)) in return((y, z))",
            "let x = sample(bern(0.3)) in
             let y = (score(if x then 2.0 else 0.5); return(x)) in
             let z = sample(bern(0.6)) in return((y, z))",
            Exact,
        ),
        EquationCase::parsed(
            "commutativity",
            "let x = sample(bern(0.3)) in let y = sample(bern(0.6)) in return((x, y))",
            "let y = sample(bern(0.6)) in let x = sample(bern(0.3)) in return((x, y))",
            Exact,
        ),
        EquationCase::parsed("score-fusion", "score(7.0); score(6.1)", "score(42.7)", Exact),
        EquationCase::parsed("score-clamp", "score(-1.0); return(*)", "score(0.0); return(*)", Exact),
        EquationCase::parsed(
            "gauss-vs-bern",
            "let x = sample(gauss(0.0, 1.0)) in return(x > 0.0)",
            "sample(bern(0.5))",
            Statistical,
        ),
        EquationCase::parsed(
            "x-gt-x",
            "let x = sample(gauss(0.0, 1.0)) in return(x > x)",
            "return(false)",
            Statistical,
        ),
        EquationCase::parsed(
            "beta-bernoulli",
            "norm(let x = sample(beta(1.0, 3.0)) in score(x); return(x))",
            "norm(score(1.0 / (1.0 + 3.0)); sample(beta(2.0, 3.0)))",
            Statistical,
        ),
        smc_case("smc-discrete", BERN_EXP_BODY, Exact),
        smc_case("smc-continuous", GAUSS_BODY, Statistical),
        smc_case("smc-infinite", EXP_BODY, Quadrature),
        EquationCase::parsed(
            "importance-sampling",
            "norm(sample(dist(density_gauss(2.0, 1.0))))",
            "norm(let f = return(density_gauss(2.0, 1.0)) in
                  let g = return(density_gauss(0.0, 1.0)) in
                  let x = sample(dist(g)) in score(ev(f, x) / ev(g, x)); return(x))",
            Statistical,
        ),
        EquationCase::parsed(
            "ho-conservativity-apply",
            "let f = return(\\y : R. y * y) in
             let x = sample(bern(0.5)) in score(f (if x then 1.0 else 3.0)); return(x)",
            "let x = sample(bern(0.5)) in
             score((if x then 1.0 else 3.0) * (if x then 1.0 else 3.0)); return(x)",
            Exact,
        ),
        EquationCase::parsed(
            "ho-conservativity-thunk",
            "let t = return(thunk(sample(bern(0.3)))) in
             let a = force(t) in let b = force(t) in return((a, b))",
            "let a = sample(bern(0.3)) in let b = sample(bern(0.3)) in return((a, b))",
            Exact,
        ),
        EquationCase::parsed(
            "ho-conservativity-Eh",
            &format!("{E_H} (thunk(sample(bern(0.25))), \\b : bool. if b then 1.0 else 0.0)"),
            "0.25",
            Statistical,
        ),
    ];
    cases
}

/// A deliberately false equation; the statistical checker must reject it.
pub fn sentinel_case() -> EquationCase {
    EquationCase::parsed(
        "sentinel-bern-0.5-vs-0.6",
        "norm(sample(bern(0.5)))",
        "norm(sample(bern(0.6)))",
        CheckMode::Statistical,
    )
}

/// The higher-order cases paired with their first-order forms.
pub fn conservativity_cases() -> Vec<EquationCase> {
    builtin_corpus().into_iter().filter(|c| c.name.starts_with("ho-conservativity")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CheckConfig {
        CheckConfig { trials: 20_000, ..CheckConfig::default() }
    }

    #[test]
    fn corpus_typechecks() {
        let corpus = builtin_corpus();
        assert!(corpus.len() >= 12);
        for c in &corpus {
            judge(c).unwrap_or_else(|e| panic!("{}: {e}", c.name));
        }
    }

    #[test]
    fn exact_cases_pass() {
        for c in builtin_corpus().iter().filter(|c| c.mode == CheckMode::Exact) {
            let v = check_exact(c).unwrap();
            assert!(v.pass, "{}: {:?}", c.name, v);
        }
    }

    #[test]
    fn inhabitants_typecheck() {
        for src in ["R", "bool", "R * bool", "P(R) + 1", "1 + R"] {
            let ty = crate::parser::parse_type(src).unwrap();
            let t = canonical_inhabitant(&ty);
            let j = check_program(&t).unwrap();
            assert_eq!(j.ty, ty, "{src}");
        }
        assert_eq!(canonical_inhabitant(&Ty::bool()), Term::ff());
    }

    #[test]
    fn smc_transform_typechecks() {
        let left = parse(&format!("norm({BERN_EXP_BODY})")).unwrap();
        let right = smc_transform(&left).unwrap();
        assert_eq!(check_program(&left).unwrap().ty, check_program(&right).unwrap().ty);
        assert!(smc_transform(&parse("norm(return(1.0))").unwrap()).is_err());
    }

    #[test]
    fn sentinel_fails() {
        let v = check_statistical(&sentinel_case(), &quick()).unwrap();
        assert!(!v.pass, "{v:?}");
    }

    #[test]
    fn probes_for_pairs() {
        let names: Vec<String> = auto_probes(&Ty::prod(Ty::bool(), Ty::Real)).into_iter().map(|p| p.name).collect();
        assert_eq!(names, vec!["1[v.0=true]", "v.1", "v.1^2", "1[v.0=true]*v.1"]);
    }
}
