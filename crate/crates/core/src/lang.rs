//! Abstract syntax for types and terms of the metalanguage.
//!
//! Terms fall into two syntactic categories: deterministic terms (variables,
//! tuples, injections, primitive applications, `norm`, λ, application,
//! `thunk`) and probabilistic terms (`return`, `let`, `sample`, `score`,
//! `force`). `case` exists in both categories as [`Term::CaseD`] and
//! [`Term::CaseP`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Variable names. Cheap to clone and shareable across threads.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Base spaces a density type may range over.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DensBase {
    Real,
    Bool,
    /// Bounded naturals `{0, .., n-1}`.
    Nat(u32),
    Unit,
    Prod(Box<DensBase>, Box<DensBase>),
}

impl DensBase {
    pub fn to_ty(&self) -> Ty {
        match self {
            DensBase::Real => Ty::Real,
            DensBase::Bool => Ty::bool(),
            DensBase::Nat(n) => Ty::Sum(vec![Ty::Unit; (*n).max(1) as usize]),
            DensBase::Unit => Ty::Unit,
            DensBase::Prod(a, b) => Ty::Prod(Box::new(a.to_ty()), Box::new(b.to_ty())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Real,
    Prob(Box<Ty>),
    Unit,
    Prod(Box<Ty>, Box<Ty>),
    /// Finite, nonempty, ordered sum.
    Sum(Vec<Ty>),
    Fun(Box<Ty>, Box<Ty>),
    Thunk(Box<Ty>),
    Dens(DensBase),
}

impl Ty {
    pub fn bool() -> Ty {
        Ty::Sum(vec![Ty::Unit, Ty::Unit])
    }

    pub fn prob(inner: Ty) -> Ty {
        Ty::Prob(Box::new(inner))
    }

    pub fn prod(a: Ty, b: Ty) -> Ty {
        Ty::Prod(Box::new(a), Box::new(b))
    }

    pub fn fun(a: Ty, b: Ty) -> Ty {
        Ty::Fun(Box::new(a), Box::new(b))
    }

    pub fn thunk(a: Ty) -> Ty {
        Ty::Thunk(Box::new(a))
    }

    /// `(R × P(A)) + 1 + 1`, the result type of `norm` at `A`.
    pub fn norm_result(a: Ty) -> Ty {
        Ty::Sum(vec![Ty::prod(Ty::Real, Ty::prob(a)), Ty::Unit, Ty::Unit])
    }

    pub fn is_bool(&self) -> bool {
        matches!(self, Ty::Sum(arms) if arms.len() == 2 && arms.iter().all(|a| *a == Ty::Unit))
    }

    /// A type is measurable when it mentions neither `⇒` nor `T`.
    pub fn is_measurable(&self) -> bool {
        match self {
            Ty::Real | Ty::Unit | Ty::Dens(_) => true,
            Ty::Prob(a) => a.is_measurable(),
            Ty::Prod(a, b) => a.is_measurable() && b.is_measurable(),
            Ty::Sum(arms) => arms.iter().all(Ty::is_measurable),
            Ty::Fun(..) | Ty::Thunk(_) => false,
        }
    }

    /// Indecomposable types are the ones a canonical environment may hold.
    pub fn is_indecomposable(&self) -> bool {
        matches!(self, Ty::Real | Ty::Prob(_) | Ty::Dens(_))
    }

    /// Checks the structural invariants: sums are nonempty and `P(A)` only
    /// ranges over measurable `A`.
    pub fn well_formed(&self) -> Result<(), String> {
        match self {
            Ty::Real | Ty::Unit | Ty::Dens(_) => Ok(()),
            Ty::Prob(a) => {
                if !a.is_measurable() {
                    return Err(format!("P({a}) ranges over a non-measurable type"));
                }
                a.well_formed()
            }
            Ty::Prod(a, b) | Ty::Fun(a, b) => {
                a.well_formed()?;
                b.well_formed()
            }
            Ty::Sum(arms) => {
                if arms.is_empty() {
                    return Err("empty sum type".into());
                }
                arms.iter().try_for_each(Ty::well_formed)
            }
            Ty::Thunk(a) => a.well_formed(),
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::parser::write_ty(f, self, 0)
    }
}

/// Head of a primitive application: a registry name or a numeric literal
/// (a measurable function `1 → R`).
#[derive(Clone, Debug, PartialEq)]
pub enum PrimOp {
    Named(Name),
    Lit(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arm {
    pub binder: Name,
    pub body: Term,
}

impl Arm {
    pub fn new(binder: &str, body: Term) -> Arm {
        Arm { binder: name(binder), body }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    // deterministic
    Var(Name),
    Star,
    Pair(Box<Term>, Box<Term>),
    Proj(u8, Box<Term>),
    Inj { tag: usize, sum: Arc<Ty>, body: Box<Term> },
    CaseD(Box<Term>, Vec<Arm>),
    Prim(PrimOp, Box<Term>),
    Norm(Box<Term>),
    Lam { param: Name, ann: Option<Ty>, body: Box<Term> },
    App(Box<Term>, Box<Term>),
    Thunk(Box<Term>),
    // probabilistic
    Return(Box<Term>),
    Let(Name, Box<Term>, Box<Term>),
    CaseP(Box<Term>, Vec<Arm>),
    Sample(Box<Term>),
    Score(Box<Term>),
    Force(Box<Term>),
}

/// Smart constructors, mostly for tests and the builtin corpus.
impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(name(x))
    }
    pub fn lit(c: f64) -> Term {
        Term::Prim(PrimOp::Lit(c), Box::new(Term::Star))
    }
    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }
    pub fn proj(j: u8, t: Term) -> Term {
        Term::Proj(j, Box::new(t))
    }
    pub fn inj(tag: usize, sum: Ty, body: Term) -> Term {
        Term::Inj { tag, sum: Arc::new(sum), body: Box::new(body) }
    }
    pub fn tt() -> Term {
        Term::inj(1, Ty::bool(), Term::Star)
    }
    pub fn ff() -> Term {
        Term::inj(0, Ty::bool(), Term::Star)
    }
    pub fn prim(f: &str, arg: Term) -> Term {
        Term::Prim(PrimOp::Named(name(f)), Box::new(arg))
    }
    pub fn prim2(f: &str, a: Term, b: Term) -> Term {
        Term::prim(f, Term::pair(a, b))
    }
    pub fn norm(t: Term) -> Term {
        Term::Norm(Box::new(t))
    }
    pub fn lam(x: &str, ann: Option<Ty>, body: Term) -> Term {
        Term::Lam { param: name(x), ann, body: Box::new(body) }
    }
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }
    pub fn thunk(t: Term) -> Term {
        Term::Thunk(Box::new(t))
    }
    pub fn ret(t: Term) -> Term {
        Term::Return(Box::new(t))
    }
    pub fn let_(x: &str, t: Term, u: Term) -> Term {
        Term::Let(name(x), Box::new(t), Box::new(u))
    }
    /// `t; u`, sugar for a `let` whose binder is unused.
    pub fn seq(t: Term, u: Term) -> Term {
        Term::let_("_", t, u)
    }
    pub fn sample(t: Term) -> Term {
        Term::Sample(Box::new(t))
    }
    pub fn score(t: Term) -> Term {
        Term::Score(Box::new(t))
    }
    pub fn force(t: Term) -> Term {
        Term::Force(Box::new(t))
    }
    /// `if c then a else b`, choosing the deterministic or probabilistic
    /// case by the category of the branches.
    pub fn if_(c: Term, a: Term, b: Term) -> Term {
        let arms = vec![Arm::new("_", b), Arm::new("_", a)];
        if arms[0].body.is_prob() {
            Term::CaseP(Box::new(c), arms)
        } else {
            Term::CaseD(Box::new(c), arms)
        }
    }

    /// Syntactic category: `true` for probabilistic terms.
    pub fn is_prob(&self) -> bool {
        matches!(
            self,
            Term::Return(_) | Term::Let(..) | Term::CaseP(..) | Term::Sample(_) | Term::Score(_) | Term::Force(_)
        )
    }

    /// Syntactic values: `x | * | (v,w) | (i,v) | λx.t | thunk(t)`.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Var(_) | Term::Star | Term::Lam { .. } | Term::Thunk(_) => true,
            Term::Pair(a, b) => a.is_value() && b.is_value(),
            Term::Inj { body, .. } => body.is_value(),
            _ => false,
        }
    }

    /// A p-value is `return(v)` for a value `v`.
    pub fn is_p_value(&self) -> bool {
        matches!(self, Term::Return(v) if v.is_value())
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        free_vars_into(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn size(&self) -> usize {
        let mut n = 1;
        self.for_each_child(|c| n += c.size());
        n
    }

    fn for_each_child(&self, mut f: impl FnMut(&Term)) {
        match self {
            Term::Var(_) | Term::Star => {}
            Term::Pair(a, b) | Term::App(a, b) | Term::Let(_, a, b) => {
                f(a);
                f(b)
            }
            Term::Proj(_, a)
            | Term::Prim(_, a)
            | Term::Norm(a)
            | Term::Thunk(a)
            | Term::Return(a)
            | Term::Sample(a)
            | Term::Score(a)
            | Term::Force(a) => f(a),
            Term::Inj { body, .. } | Term::Lam { body, .. } => f(body),
            Term::CaseD(s, arms) | Term::CaseP(s, arms) => {
                f(s);
                arms.iter().for_each(|a| f(&a.body));
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::pretty(self))
    }
}

fn free_vars_into(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Let(x, a, b) => {
            free_vars_into(a, bound, out);
            bound.push(x.clone());
            free_vars_into(b, bound, out);
            bound.pop();
        }
        Term::Lam { param, body, .. } => {
            bound.push(param.clone());
            free_vars_into(body, bound, out);
            bound.pop();
        }
        Term::CaseD(s, arms) | Term::CaseP(s, arms) => {
            free_vars_into(s, bound, out);
            for arm in arms {
                bound.push(arm.binder.clone());
                free_vars_into(&arm.body, bound, out);
                bound.pop();
            }
        }
        other => other.for_each_child(|c| free_vars_into(c, bound, out)),
    }
}

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A globally fresh variant of `base`, of the form `base'N`.
pub fn fresh_name(base: &str) -> Name {
    let stem = base.split('\'').next().unwrap_or(base);
    let stem = if stem.is_empty() || stem == "_" { "v" } else { stem };
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    Arc::from(format!("{stem}'{n}"))
}

/// Capture-avoiding substitution `t[v/x]`.
pub fn substitute(t: &Term, x: &str, v: &Term) -> Term {
    subst(t.clone(), x, v)
}

/// Owned variant of [`substitute`]; avoids cloning `t`.
pub fn subst(t: Term, x: &str, v: &Term) -> Term {
    let fv = v.free_vars();
    Subst { x, v, fv: &fv }.go(t)
}

struct Subst<'a> {
    x: &'a str,
    v: &'a Term,
    fv: &'a BTreeSet<Name>,
}

impl Subst<'_> {
    /// Enters the scope of `binder`; returns `None` when the binder shadows
    /// `x`, otherwise the (possibly renamed) binder and body.
    fn under(&self, binder: Name, body: Term) -> Option<(Name, Term)> {
        if &*binder == self.x {
            return None;
        }
        if self.fv.contains(&binder) {
            let fresh = fresh_name(&binder);
            let renamed = subst(body, &binder, &Term::Var(fresh.clone()));
            Some((fresh, self.go(renamed)))
        } else {
            Some((binder, self.go(body)))
        }
    }

    fn arms(&self, arms: Vec<Arm>) -> Vec<Arm> {
        arms.into_iter()
            .map(|Arm { binder, body }| match self.under(binder.clone(), body.clone()) {
                Some((binder, body)) => Arm { binder, body },
                None => Arm { binder, body },
            })
            .collect()
    }

    fn go(&self, t: Term) -> Term {
        let b = |t: Box<Term>| Box::new(self.go(*t));
        match t {
            Term::Var(y) => {
                if &*y == self.x {
                    self.v.clone()
                } else {
                    Term::Var(y)
                }
            }
            Term::Star => Term::Star,
            Term::Pair(l, r) => Term::Pair(b(l), b(r)),
            Term::Proj(j, a) => Term::Proj(j, b(a)),
            Term::Inj { tag, sum, body } => Term::Inj { tag, sum, body: b(body) },
            Term::CaseD(s, arms) => Term::CaseD(b(s), self.arms(arms)),
            Term::CaseP(s, arms) => Term::CaseP(b(s), self.arms(arms)),
            Term::Prim(op, a) => Term::Prim(op, b(a)),
            Term::Norm(a) => Term::Norm(b(a)),
            Term::Lam { param, ann, body } => match self.under(param.clone(), (*body).clone()) {
                Some((param, body)) => Term::Lam { param, ann, body: Box::new(body) },
                None => Term::Lam { param, ann, body },
            },
            Term::App(f, a) => Term::App(b(f), b(a)),
            Term::Thunk(a) => Term::Thunk(b(a)),
            Term::Return(a) => Term::Return(b(a)),
            Term::Let(y, t1, t2) => {
                let t1 = b(t1);
                match self.under(y.clone(), (*t2).clone()) {
                    Some((y, t2)) => Term::Let(y, t1, Box::new(t2)),
                    None => Term::Let(y, t1, t2),
                }
            }
            Term::Sample(a) => Term::Sample(b(a)),
            Term::Score(a) => Term::Score(b(a)),
            Term::Force(a) => Term::Force(b(a)),
        }
    }
}

/// Renames every bound variable consistently; used to make α-equivalent
/// terms syntactically comparable.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    AlphaEq { left: Vec::new(), right: Vec::new() }.eq(a, b)
}

struct AlphaEq {
    left: Vec<Name>,
    right: Vec<Name>,
}

impl AlphaEq {
    fn index(stack: &[Name], x: &Name) -> Option<usize> {
        stack.iter().rposition(|y| y == x)
    }

    fn bind<R>(&mut self, x: &Name, y: &Name, f: impl FnOnce(&mut Self) -> R) -> R {
        self.left.push(x.clone());
        self.right.push(y.clone());
        let r = f(self);
        self.left.pop();
        self.right.pop();
        r
    }

    fn arms(&mut self, xs: &[Arm], ys: &[Arm]) -> bool {
        xs.len() == ys.len()
            && xs.iter().zip(ys).all(|(a, b)| self.bind(&a.binder, &b.binder, |s| s.eq(&a.body, &b.body)))
    }

    fn eq(&mut self, a: &Term, b: &Term) -> bool {
        use Term::*;
        match (a, b) {
            (Var(x), Var(y)) => match (Self::index(&self.left, x), Self::index(&self.right, y)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            },
            (Star, Star) => true,
            (Pair(a1, a2), Pair(b1, b2)) | (App(a1, a2), App(b1, b2)) => self.eq(a1, b1) && self.eq(a2, b2),
            (Proj(i, a), Proj(j, b)) => i == j && self.eq(a, b),
            (Inj { tag: i, sum: s, body: a }, Inj { tag: j, sum: t, body: b }) => i == j && s == t && self.eq(a, b),
            (CaseD(s, xs), CaseD(t, ys)) | (CaseP(s, xs), CaseP(t, ys)) => self.eq(s, t) && self.arms(xs, ys),
            (Prim(f, a), Prim(g, b)) => {
                let same_op = match (f, g) {
                    (PrimOp::Lit(x), PrimOp::Lit(y)) => x.to_bits() == y.to_bits(),
                    (PrimOp::Named(x), PrimOp::Named(y)) => x == y,
                    _ => false,
                };
                same_op && self.eq(a, b)
            }
            (Norm(a), Norm(b))
            | (Thunk(a), Thunk(b))
            | (Return(a), Return(b))
            | (Sample(a), Sample(b))
            | (Score(a), Score(b))
            | (Force(a), Force(b)) => self.eq(a, b),
            (Lam { param: x, ann: s, body: a }, Lam { param: y, ann: t, body: b }) => {
                s == t && self.bind(x, y, |st| st.eq(a, b))
            }
            (Let(x, a1, a2), Let(y, b1, b2)) => self.eq(a1, b1) && self.bind(x, y, |s| s.eq(a2, b2)),
            _ => false,
        }
    }
}

/// Renames bound variables to `#b0, #b1, ..` and free variables to
/// `#f0, #f1, ..` in order of first occurrence. Two terms that differ only
/// by variable names map to the same form; the original free variables are
/// returned in the order they were numbered.
pub fn canonical_form(t: &Term) -> (Term, Vec<Name>) {
    let mut c = Canon { bound: Vec::new(), free: Vec::new(), next: 0 };
    let out = c.go(t);
    (out, c.free.into_iter().map(|(x, _)| x).collect())
}

struct Canon {
    bound: Vec<(Name, Name)>,
    free: Vec<(Name, Name)>,
    next: usize,
}

impl Canon {
    fn var(&mut self, x: &Name) -> Name {
        if let Some((_, y)) = self.bound.iter().rev().find(|(b, _)| b == x) {
            return y.clone();
        }
        if let Some((_, y)) = self.free.iter().find(|(f, _)| f == x) {
            return y.clone();
        }
        let y: Name = Arc::from(format!("#f{}", self.free.len()));
        self.free.push((x.clone(), y.clone()));
        y
    }

    fn bind<R>(&mut self, x: &Name, f: impl FnOnce(&mut Self, Name) -> R) -> R {
        let y: Name = Arc::from(format!("#b{}", self.next));
        self.next += 1;
        self.bound.push((x.clone(), y.clone()));
        let r = f(self, y);
        self.bound.pop();
        r
    }

    fn arms(&mut self, arms: &[Arm]) -> Vec<Arm> {
        arms.iter().map(|a| self.bind(&a.binder, |c, binder| Arm { binder, body: c.go(&a.body) })).collect()
    }

    fn go(&mut self, t: &Term) -> Term {
        let b = |c: &mut Self, t: &Term| Box::new(c.go(t));
        match t {
            Term::Var(x) => Term::Var(self.var(x)),
            Term::Star => Term::Star,
            Term::Pair(l, r) => {
                let l = b(self, l);
                Term::Pair(l, b(self, r))
            }
            Term::App(l, r) => {
                let l = b(self, l);
                Term::App(l, b(self, r))
            }
            Term::Proj(j, a) => Term::Proj(*j, b(self, a)),
            Term::Inj { tag, sum, body } => Term::Inj { tag: *tag, sum: sum.clone(), body: b(self, body) },
            Term::CaseD(s, arms) => {
                let s = b(self, s);
                Term::CaseD(s, self.arms(arms))
            }
            Term::CaseP(s, arms) => {
                let s = b(self, s);
                Term::CaseP(s, self.arms(arms))
            }
            Term::Prim(op, a) => Term::Prim(op.clone(), b(self, a)),
            Term::Norm(a) => Term::Norm(b(self, a)),
            Term::Thunk(a) => Term::Thunk(b(self, a)),
            Term::Return(a) => Term::Return(b(self, a)),
            Term::Sample(a) => Term::Sample(b(self, a)),
            Term::Score(a) => Term::Score(b(self, a)),
            Term::Force(a) => Term::Force(b(self, a)),
            Term::Lam { param, ann, body } => {
                self.bind(param, |c, param| Term::Lam { param, ann: ann.clone(), body: Box::new(c.go(body)) })
            }
            Term::Let(x, a, body) => {
                let a = b(self, a);
                self.bind(x, |c, x| Term::Let(x, a, Box::new(c.go(body))))
            }
        }
    }
}
