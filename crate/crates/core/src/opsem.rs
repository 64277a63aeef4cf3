//! Configurations and the small-step reduction relations.
//!
//! Deterministic reduction is small-step and leftmost-innermost. A
//! probabilistic step runs any deterministic subterm in redex position to a
//! value first and then fires one probabilistic rule. `sample` redexes are
//! returned to the caller as a [`PendingSample`], so the same stepping code
//! serves exact enumeration, quadrature and random sampling.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::Rng;

use crate::dist::{decompose, DistValue, GroundPoint};
use crate::error::{Error, Result};
use crate::inference::NormResult;
use crate::lang::{subst, Name, PrimOp, Term, Ty};
use crate::prims::PrimRegistry;
use crate::typecheck::{Checker, TyCtx};

pub use crate::typecheck::Mode;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;
pub const DEFAULT_MAX_NORM_DEPTH: usize = 8;

/// Valuation of a canonical context: every slot is a real, a distribution or
/// a density object.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CanonicalEnv {
    slots: Vec<(Name, GroundPoint)>,
}

impl CanonicalEnv {
    pub fn new() -> CanonicalEnv {
        CanonicalEnv::default()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[(Name, GroundPoint)] {
        &self.slots
    }

    /// Appends a named slot. Only indecomposable points are accepted.
    pub fn push(&mut self, x: Name, p: GroundPoint) -> Result<()> {
        if p.slot_ty().is_none() {
            return Err(Error::internal(format!("{} is not an indecomposable value", p.render())));
        }
        self.slots.push((x, p));
        Ok(())
    }

    /// Appends a slot under a generated name that user programs cannot write.
    pub fn push_fresh(&mut self, p: GroundPoint) -> Name {
        let x: Name = Arc::from(format!("${}", self.slots.len()));
        self.slots.push((x.clone(), p));
        x
    }

    pub fn lookup(&self, x: &str) -> Option<&GroundPoint> {
        if let Some(i) = x.strip_prefix('$').and_then(|i| i.parse::<usize>().ok()) {
            if let Some((y, p)) = self.slots.get(i) {
                if &**y == x {
                    return Some(p);
                }
            }
        }
        self.slots.iter().rev().find(|(y, _)| &**y == x).map(|(_, p)| p)
    }

    /// The canonical context this environment is a valuation of.
    pub fn ty_ctx(&self) -> TyCtx {
        self.slots.iter().map(|(x, p)| (x.clone(), p.slot_ty().expect("slots are indecomposable"))).collect()
    }

    /// `⟦v⟧(γ)` for a measurable value `v`.
    pub fn eval_value(&self, v: &Term) -> Result<GroundPoint> {
        match v {
            Term::Var(x) => self
                .lookup(x)
                .cloned()
                .ok_or_else(|| Error::internal(format!("unbound variable `{x}` in configuration"))),
            Term::Star => Ok(GroundPoint::Unit),
            Term::Pair(a, b) => Ok(GroundPoint::pair(self.eval_value(a)?, self.eval_value(b)?)),
            Term::Inj { tag, body, .. } => Ok(GroundPoint::inj(*tag, self.eval_value(body)?)),
            Term::Lam { .. } | Term::Thunk(_) => Err(Error::HigherOrderUnsupported(v.to_string())),
            other => Err(Error::internal(format!("`{other}` is not a value"))),
        }
    }

    /// Type of a measurable value in the context read off this environment.
    pub fn value_type(&self, v: &Term) -> Result<Ty> {
        match v {
            Term::Var(x) => self
                .lookup(x)
                .and_then(GroundPoint::slot_ty)
                .ok_or_else(|| Error::internal(format!("unbound variable `{x}` in configuration"))),
            Term::Star => Ok(Ty::Unit),
            Term::Pair(a, b) => Ok(Ty::prod(self.value_type(a)?, self.value_type(b)?)),
            Term::Inj { sum, .. } => Ok((**sum).clone()),
            other => Err(Error::internal(format!("cannot type non-measurable value `{other}`"))),
        }
    }
}

/// A closure `⟨Γ, t, γ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub mode: Mode,
    pub env: CanonicalEnv,
    pub term: Term,
    pub ty: Ty,
    /// Hash of the discrete choices taken so far (case branches, sampled
    /// patterns, norm tags). Not part of the semantics; quadrature uses it
    /// to locate discontinuities.
    pub path: u64,
}

impl Config {
    pub fn new(mode: Mode, env: CanonicalEnv, term: Term) -> Result<Config> {
        let ty = Checker::new(PrimRegistry::standard()).infer(mode, &env.ty_ctx(), &term)?;
        Ok(Config { mode, env, term, ty, path: 0 })
    }

    /// A closed program in the judgement matching its syntactic category.
    pub fn closed(term: Term) -> Result<Config> {
        let mode = if term.is_prob() { Mode::Prob } else { Mode::Det };
        Config::new(mode, CanonicalEnv::new(), term)
    }

    pub fn is_terminal(&self) -> bool {
        match self.mode {
            Mode::Det => self.term.is_value(),
            Mode::Prob => self.term.is_p_value(),
        }
    }

    /// The semantic value of a terminal configuration.
    pub fn value_point(&self) -> Result<GroundPoint> {
        match (&self.mode, &self.term) {
            (Mode::Prob, Term::Return(v)) if v.is_value() => self.env.eval_value(v),
            (Mode::Det, v) if v.is_value() => self.env.eval_value(v),
            _ => Err(Error::internal(format!("configuration `{}` is not terminal", self.term))),
        }
    }

    /// Re-checks the term against the context read off the environment.
    pub fn recheck(&self) -> Result<Ty> {
        Ok(Checker::new(PrimRegistry::standard()).infer(self.mode, &self.env.ty_ctx(), &self.term)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub score: f64,
    pub next: Config,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedResult {
    pub weight: f64,
    pub value: Config,
    pub steps: u64,
}

/// A `sample(v)` redex with its surrounding `let` frames, waiting for a
/// point of the distribution.
#[derive(Clone, Debug)]
pub struct PendingSample {
    pub dist: Arc<DistValue>,
    env: CanonicalEnv,
    frames: Vec<(Name, Term)>,
    ty: Ty,
    path: u64,
}

impl PendingSample {
    pub fn env(&self) -> &CanonicalEnv {
        &self.env
    }

    /// Plugs `point` into the hole: decomposes it into an ordered value,
    /// extends the environment with its slots and rebuilds the term.
    pub fn resume(self, point: &GroundPoint) -> Result<Config> {
        let PendingSample { dist, mut env, frames, ty, mut path } = self;
        let d = decompose(point, &dist.over())?;
        mix(&mut path, hash_of(&d.pattern));
        let names: Vec<Name> = d.slots.into_iter().map(|p| env.push_fresh(p)).collect();
        let mut term = Term::ret(d.pattern.to_term(&mut names.into_iter()));
        for (x, u) in frames {
            term = Term::Let(x, Box::new(term), Box::new(u));
        }
        Ok(Config { mode: Mode::Prob, env, term, ty, path })
    }
}

pub enum ProbStep {
    /// The configuration was already a p-value.
    Value(Config),
    Moved {
        score: f64,
        next: Config,
    },
    Sample(PendingSample),
}

enum PStep {
    Stepped { score: f64, term: Term },
    Sample { dist: Arc<DistValue>, frames: Vec<(Name, Term)> },
}

/// A normalization function `ν`, parameter of the machine.
pub trait Normalizer: Sync {
    /// Normalizes a probabilistic configuration of measurable type.
    fn normalize(&self, machine: &Machine<'_>, c: Config) -> Result<NormResult>;
}

/// Mixes a discrete choice into a path hash.
pub fn mix(path: &mut u64, x: u64) {
    *path = (path.rotate_left(5) ^ x).wrapping_mul(0x0100_0000_01b3);
}

fn hash_of<T: Hash>(x: &T) -> u64 {
    let mut h = DefaultHasher::new();
    x.hash(&mut h);
    h.finish()
}

pub struct Machine<'a> {
    pub prims: &'a PrimRegistry,
    pub nu: &'a dyn Normalizer,
    pub budget: u64,
    pub max_depth: usize,
    depth: usize,
}

impl<'a> Machine<'a> {
    pub fn new(nu: &'a dyn Normalizer) -> Machine<'a> {
        Machine {
            prims: PrimRegistry::standard(),
            nu,
            budget: DEFAULT_STEP_BUDGET,
            max_depth: DEFAULT_MAX_NORM_DEPTH,
            depth: 0,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The machine used for evaluation inside a `norm` redex.
    pub fn nested(&self) -> Result<Machine<'a>> {
        if self.depth >= self.max_depth {
            return Err(Error::NormDepth(self.max_depth));
        }
        Ok(Machine {
            prims: self.prims,
            nu: self.nu,
            budget: self.budget,
            max_depth: self.max_depth,
            depth: self.depth + 1,
        })
    }

    /// Same machine with a different normalizer.
    pub fn with_nu<'b>(&self, nu: &'b dyn Normalizer) -> Machine<'b>
    where
        'a: 'b,
    {
        Machine { prims: self.prims, nu, budget: self.budget, max_depth: self.max_depth, depth: self.depth }
    }

    fn tick(&self, steps: &mut u64) -> Result<()> {
        *steps += 1;
        if *steps > self.budget {
            return Err(Error::StepBudget(self.budget));
        }
        Ok(())
    }

    // ---- deterministic reduction ----

    /// One deterministic step.
    pub fn step_det(&self, c: Config) -> Result<Config> {
        if c.mode != Mode::Det {
            return Err(Error::internal("step_det on a probabilistic configuration"));
        }
        let Config { mode, mut env, term, ty, mut path } = c;
        let term = self.step_d(&mut env, &mut path, term)?;
        Ok(Config { mode, env, term, ty, path })
    }

    /// Iterates `step_det` to a value; returns the final configuration and
    /// the number of steps taken.
    pub fn eval_det(&self, c: Config) -> Result<(Config, u64)> {
        if c.mode != Mode::Det {
            return Err(Error::internal("eval_det on a probabilistic configuration"));
        }
        let Config { mode, mut env, term, ty, mut path } = c;
        let mut steps = 0;
        let term = self.eval_d(&mut env, &mut path, term, &mut steps)?;
        Ok((Config { mode, env, term, ty, path }, steps))
    }

    fn eval_d(&self, env: &mut CanonicalEnv, path: &mut u64, mut t: Term, steps: &mut u64) -> Result<Term> {
        while !t.is_value() {
            self.tick(steps)?;
            t = self.step_d(env, path, t)?;
        }
        Ok(t)
    }

    fn step_d(&self, env: &mut CanonicalEnv, path: &mut u64, t: Term) -> Result<Term> {
        let mut sub = |t: Box<Term>| -> Result<Box<Term>> { Ok(Box::new(self.step_d(env, path, *t)?)) };
        match t {
            Term::Pair(a, b) => {
                if !a.is_value() {
                    Ok(Term::Pair(sub(a)?, b))
                } else if !b.is_value() {
                    Ok(Term::Pair(a, sub(b)?))
                } else {
                    Err(Error::internal("no step from a value"))
                }
            }
            Term::Inj { tag, sum, body } => Ok(Term::Inj { tag, sum, body: sub(body)? }),
            Term::Proj(j, a) => {
                if !a.is_value() {
                    return Ok(Term::Proj(j, sub(a)?));
                }
                match *a {
                    Term::Pair(l, r) => Ok(if j == 0 { *l } else { *r }),
                    other => Err(Error::internal(format!("projection from `{other}`"))),
                }
            }
            Term::CaseD(s, arms) => {
                if !s.is_value() {
                    return Ok(Term::CaseD(sub(s)?, arms));
                }
                self.case_redex(path, *s, arms)
            }
            Term::Prim(op, a) => {
                if !a.is_value() {
                    return Ok(Term::Prim(op, sub(a)?));
                }
                self.prim_redex(env, op, &a)
            }
            Term::Norm(body) => self.norm_redex(env, path, *body),
            Term::App(f, a) => {
                if !f.is_value() {
                    return Ok(Term::App(sub(f)?, a));
                }
                if !a.is_value() {
                    return Ok(Term::App(f, sub(a)?));
                }
                match *f {
                    Term::Lam { param, body, .. } => Ok(subst(*body, &param, &a)),
                    other => Err(Error::internal(format!("application of `{other}`"))),
                }
            }
            other if other.is_value() => Err(Error::internal("no step from a value")),
            other => Err(Error::internal(format!("probabilistic term `{other}` in deterministic position"))),
        }
    }

    fn case_redex(&self, path: &mut u64, scrut: Term, mut arms: Vec<crate::lang::Arm>) -> Result<Term> {
        match scrut {
            Term::Inj { tag, body, .. } if tag < arms.len() => {
                mix(path, 0xca5e ^ tag as u64);
                let arm = arms.swap_remove(tag);
                Ok(subst(arm.body, &arm.binder, &body))
            }
            other => Err(Error::internal(format!("case on `{other}`"))),
        }
    }

    fn prim_redex(&self, env: &mut CanonicalEnv, op: PrimOp, arg: &Term) -> Result<Term> {
        let (point, ty) = match op {
            PrimOp::Lit(c) => (GroundPoint::Real(c), Ty::Real),
            PrimOp::Named(f) => {
                let p = env.eval_value(arg)?;
                let aty = env.value_type(arg)?;
                self.prims.apply(&f, &p, &aty)?
            }
        };
        let d = decompose(&point, &ty)?;
        let names: Vec<Name> = d.slots.into_iter().map(|p| env.push_fresh(p)).collect();
        Ok(d.pattern.to_term(&mut names.into_iter()))
    }

    fn norm_redex(&self, env: &mut CanonicalEnv, path: &mut u64, body: Term) -> Result<Term> {
        let a = Checker::new(self.prims).infer(Mode::Prob, &env.ty_ctx(), &body)?;
        let sum = Arc::new(Ty::norm_result(a.clone()));
        let inner = Config { mode: Mode::Prob, env: env.clone(), term: body, ty: a, path: 0 };
        let result = self.nu.normalize(&self.nested()?, inner)?;
        mix(path, 0x4e0 ^ result.tag() as u64);
        Ok(match result {
            NormResult::Success { evidence, posterior } => {
                let e = env.push_fresh(GroundPoint::Real(evidence));
                let d = env.push_fresh(GroundPoint::Dist(posterior));
                Term::Inj { tag: 0, sum, body: Box::new(Term::pair(Term::Var(e), Term::Var(d))) }
            }
            NormResult::ZeroEvidence => Term::Inj { tag: 1, sum, body: Box::new(Term::Star) },
            NormResult::InfiniteEvidence => Term::Inj { tag: 2, sum, body: Box::new(Term::Star) },
        })
    }

    // ---- probabilistic reduction ----

    /// One probabilistic step, with `sample` redexes left to the caller.
    pub fn step_prob(&self, c: Config, steps: &mut u64) -> Result<ProbStep> {
        if c.mode != Mode::Prob {
            return Err(Error::internal("probabilistic step on a deterministic configuration"));
        }
        if c.term.is_p_value() {
            return Ok(ProbStep::Value(c));
        }
        self.tick(steps)?;
        let Config { mode, mut env, term, ty, mut path } = c;
        Ok(match self.step_p(&mut env, &mut path, term, steps)? {
            PStep::Stepped { score, term } => ProbStep::Moved { score, next: Config { mode, env, term, ty, path } },
            PStep::Sample { dist, frames } => ProbStep::Sample(PendingSample { dist, env, frames, ty, path }),
        })
    }

    fn step_p(&self, env: &mut CanonicalEnv, path: &mut u64, t: Term, steps: &mut u64) -> Result<PStep> {
        let stepped = |term| Ok(PStep::Stepped { score: 1.0, term });
        match t {
            Term::Return(a) => {
                if a.is_value() {
                    return Err(Error::internal("no step from a p-value"));
                }
                stepped(Term::Return(Box::new(self.eval_d(env, path, *a, steps)?)))
            }
            Term::Let(x, t1, u) => {
                if let Term::Return(v) = &*t1 {
                    if v.is_value() {
                        let Term::Return(v) = *t1 else { unreachable!() };
                        return stepped(subst(*u, &x, &v));
                    }
                }
                match self.step_p(env, path, *t1, steps)? {
                    PStep::Stepped { score, term } => {
                        Ok(PStep::Stepped { score, term: Term::Let(x, Box::new(term), u) })
                    }
                    PStep::Sample { dist, mut frames } => {
                        frames.push((x, *u));
                        Ok(PStep::Sample { dist, frames })
                    }
                }
            }
            Term::CaseP(s, arms) => {
                if !s.is_value() {
                    let s = self.eval_d(env, path, *s, steps)?;
                    return stepped(Term::CaseP(Box::new(s), arms));
                }
                stepped(self.case_redex(path, *s, arms)?)
            }
            Term::Sample(a) => {
                if !a.is_value() {
                    return stepped(Term::Sample(Box::new(self.eval_d(env, path, *a, steps)?)));
                }
                match env.eval_value(&a)? {
                    GroundPoint::Dist(dist) => Ok(PStep::Sample { dist, frames: Vec::new() }),
                    other => Err(Error::internal(format!("sample from non-distribution {}", other.render()))),
                }
            }
            Term::Score(a) => {
                if !a.is_value() {
                    return stepped(Term::Score(Box::new(self.eval_d(env, path, *a, steps)?)));
                }
                match env.eval_value(&a)? {
                    GroundPoint::Real(r) => Ok(PStep::Stepped { score: r.max(0.0), term: Term::ret(Term::Star) }),
                    other => Err(Error::internal(format!("score of non-real {}", other.render()))),
                }
            }
            Term::Force(a) => {
                if !a.is_value() {
                    return stepped(Term::Force(Box::new(self.eval_d(env, path, *a, steps)?)));
                }
                match *a {
                    Term::Thunk(body) => stepped(*body),
                    other => Err(Error::internal(format!("force of `{other}`"))),
                }
            }
            other => Err(Error::internal(format!("deterministic term `{other}` in probabilistic position"))),
        }
    }

    /// One probabilistic step, drawing `sample` redexes from `rng`.
    pub fn step_prob_sample<R: Rng + ?Sized>(&self, c: Config, rng: &mut R) -> Result<StepOutcome> {
        let mut steps = 0;
        match self.step_prob(c, &mut steps)? {
            ProbStep::Value(_) => Err(Error::internal("no step from a p-value")),
            ProbStep::Moved { score, next } => Ok(StepOutcome { score, next }),
            ProbStep::Sample(pending) => {
                let point = pending.dist.sample(rng);
                Ok(StepOutcome { score: 1.0, next: pending.resume(&point)? })
            }
        }
    }

    /// Runs one trace to a p-value, multiplying the scores.
    pub fn eval_prob_sample<R: Rng + ?Sized>(&self, mut c: Config, rng: &mut R) -> Result<WeightedResult> {
        let mut weight = 1.0;
        let mut steps = 0;
        loop {
            match self.step_prob(c, &mut steps)? {
                ProbStep::Value(value) => return Ok(WeightedResult { weight, value, steps }),
                ProbStep::Moved { score, next } => {
                    weight *= score;
                    c = next;
                }
                ProbStep::Sample(pending) => {
                    let point = pending.dist.sample(rng);
                    c = pending.resume(&point)?;
                }
            }
        }
    }

    /// Exact distribution over `(weight, value)` outcomes; outcomes with
    /// bit-identical weight and equal value are merged.
    pub fn enumerate_prob(&self, c: Config) -> Result<Vec<(f64, f64, Config)>> {
        let mut raw = Vec::new();
        self.enumerate_rec(c, 1.0, 1.0, 0, &mut raw)?;
        let mut out: Vec<(f64, f64, Config, GroundPoint)> = Vec::with_capacity(raw.len());
        for (p, w, cfg) in raw {
            let point = cfg.value_point()?;
            match out.iter_mut().find(|(_, w2, _, q)| w2.to_bits() == w.to_bits() && *q == point) {
                Some(entry) => entry.0 += p,
                None => out.push((p, w, cfg, point)),
            }
        }
        Ok(out.into_iter().map(|(p, w, c, _)| (p, w, c)).collect())
    }

    fn enumerate_rec(
        &self,
        mut c: Config,
        prob: f64,
        mut weight: f64,
        mut steps: u64,
        out: &mut Vec<(f64, f64, Config)>,
    ) -> Result<()> {
        loop {
            match self.step_prob(c, &mut steps)? {
                ProbStep::Value(v) => {
                    out.push((prob, weight, v));
                    return Ok(());
                }
                ProbStep::Moved { score, next } => {
                    weight *= score;
                    c = next;
                }
                ProbStep::Sample(pending) => {
                    let atoms = pending.dist.enumerate().ok_or_else(|| Error::NotEnumerable(pending.dist.render()))?;
                    for (q, point) in atoms {
                        self.enumerate_rec(pending.clone().resume(&point)?, prob * q, weight, steps, out)?;
                    }
                    return Ok(());
                }
            }
        }
    }
}
