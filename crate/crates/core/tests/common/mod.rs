//! Random generators for well-typed terms, types and points.
#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sfpc_core::dist::{DistValue, GroundPoint};
use sfpc_core::lang::{Arm, Term, Ty};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A measurable type of bounded depth.
pub fn ty(r: &mut impl Rng, depth: u32) -> Ty {
    let k = if depth == 0 { r.random_range(0..4) } else { r.random_range(0..7) };
    match k {
        0 => Ty::Real,
        1 => Ty::Unit,
        2 => Ty::bool(),
        3 => Ty::prob(Ty::Real),
        4 => Ty::prod(ty(r, depth - 1), ty(r, depth - 1)),
        5 => Ty::Sum((0..r.random_range(1..4)).map(|_| ty(r, depth - 1)).collect()),
        _ => Ty::prob(ty(r, depth - 1)),
    }
}

/// A point of a measurable type without density components.
pub fn point(r: &mut impl Rng, t: &Ty) -> GroundPoint {
    match t {
        Ty::Real => GroundPoint::Real(r.random_range(-10.0..10.0)),
        Ty::Unit => GroundPoint::Unit,
        Ty::Prod(a, b) => GroundPoint::pair(point(r, a), point(r, b)),
        Ty::Sum(arms) => {
            let i = r.random_range(0..arms.len());
            GroundPoint::inj(i, point(r, &arms[i]))
        }
        Ty::Prob(a) => {
            let d = if **a == Ty::Real {
                DistValue::gauss(r.random_range(-1.0..1.0), r.random_range(0.1..2.0))
            } else {
                DistValue::dirac(point(r, a), (**a).clone())
            };
            GroundPoint::Dist(Arc::new(d))
        }
        other => panic!("no points of type {other}"),
    }
}

/// Generates closed, well-typed terms over reals and booleans.
pub struct TermGen<'r, R: Rng> {
    pub rng: &'r mut R,
    /// Variables in scope with their types.
    scope: Vec<(String, Ty)>,
    counter: usize,
    /// Whether `sample` may draw from continuous distributions.
    pub continuous: bool,
    /// Whether `norm` may appear.
    pub nested: bool,
}

impl<'r, R: Rng> TermGen<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        TermGen { rng, scope: Vec::new(), counter: 0, continuous: true, nested: true }
    }

    fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        format!("{base}{}", self.counter)
    }

    fn pick_var(&mut self, t: &Ty) -> Option<Term> {
        let vars: Vec<&String> = self.scope.iter().filter(|(_, u)| u == t).map(|(x, _)| x).collect();
        if vars.is_empty() {
            return None;
        }
        let i = self.rng.random_range(0..vars.len());
        Some(Term::var(vars[i]))
    }

    fn under<T>(&mut self, x: &str, t: Ty, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((x.to_string(), t));
        let out = f(self);
        self.scope.pop();
        out
    }

    fn small_lit(&mut self) -> Term {
        let c: f64 = self.rng.random_range(-4.0..4.0);
        Term::lit((c * 4.0).round() / 4.0)
    }

    pub fn real(&mut self, depth: u32) -> Term {
        if depth == 0 {
            return match self.pick_var(&Ty::Real) {
                Some(v) if self.rng.random_bool(0.5) => v,
                _ => self.small_lit(),
            };
        }
        match self.rng.random_range(0..9) {
            0 => self.small_lit(),
            1 => self.pick_var(&Ty::Real).unwrap_or_else(|| self.small_lit()),
            2 => {
                let op = ["+", "-", "*", "/", "max"][self.rng.random_range(0..5)];
                Term::prim2(op, self.real(depth - 1), self.real(depth - 1))
            }
            3 => Term::if_(self.boolean(depth - 1), self.real(depth - 1), self.real(depth - 1)),
            4 => Term::proj(0, Term::pair(self.real(depth - 1), self.boolean(depth - 1))),
            5 => {
                let y = self.fresh("y");
                let body = self.under(&y, Ty::Real, |g| g.real(depth - 1));
                Term::app(Term::lam(&y, Some(Ty::Real), body), self.real(depth - 1))
            }
            6 if self.nested => {
                let inner = self.prob(&Ty::Real, depth - 1);
                let p = self.fresh("p");
                let arms = vec![
                    Arm::new(&p, Term::proj(0, Term::var(&p))),
                    Arm::new("_", Term::lit(0.0)),
                    Arm::new("_", Term::lit(-1.0)),
                ];
                Term::CaseD(Box::new(Term::norm(inner)), arms)
            }
            7 => Term::prim("exp", Term::prim2("min", self.real(depth - 1), Term::lit(5.0))),
            _ => Term::prim(
                "density_gauss",
                Term::pair(self.real(depth - 1), Term::pair(Term::lit(0.0), Term::lit(1.0))),
            ),
        }
    }

    pub fn boolean(&mut self, depth: u32) -> Term {
        if depth == 0 {
            return match self.pick_var(&Ty::bool()) {
                Some(v) if self.rng.random_bool(0.5) => v,
                _ => {
                    if self.rng.random_bool(0.5) {
                        Term::tt()
                    } else {
                        Term::ff()
                    }
                }
            };
        }
        match self.rng.random_range(0..5) {
            0 => self.boolean(0),
            1 => Term::prim2("<", self.real(depth - 1), self.real(depth - 1)),
            2 => Term::prim("not", self.boolean(depth - 1)),
            3 => Term::if_(self.boolean(depth - 1), self.boolean(depth - 1), self.boolean(depth - 1)),
            _ => Term::proj(1, Term::pair(self.real(depth - 1), self.boolean(depth - 1))),
        }
    }

    pub fn det(&mut self, t: &Ty, depth: u32) -> Term {
        if t.is_bool() {
            self.boolean(depth)
        } else {
            self.real(depth)
        }
    }

    fn sample(&mut self, t: &Ty, depth: u32) -> Term {
        if t.is_bool() {
            Term::sample(Term::prim("bern", self.real(depth)))
        } else if self.continuous && self.rng.random_bool(0.5) {
            Term::sample(Term::prim2("gauss", self.real(depth), Term::lit(1.0)))
        } else {
            Term::sample(Term::prim("dirac", self.real(depth)))
        }
    }

    /// A probabilistic term of type `t` (real or bool).
    pub fn prob(&mut self, t: &Ty, depth: u32) -> Term {
        if depth == 0 {
            return if self.rng.random_bool(0.5) { Term::ret(self.det(t, 0)) } else { self.sample(t, 0) };
        }
        match self.rng.random_range(0..7) {
            0 => Term::ret(self.det(t, depth - 1)),
            1 => self.sample(t, depth - 1),
            2 | 3 => {
                let xt = if self.rng.random_bool(0.5) { Ty::Real } else { Ty::bool() };
                let x = self.fresh("x");
                let bound = self.prob(&xt, depth - 1);
                let body = self.under(&x, xt, |g| g.prob(t, depth - 1));
                Term::let_(&x, bound, body)
            }
            4 => {
                let s = Term::score(Term::prim("abs", self.real(depth - 1)));
                Term::seq(s, self.prob(t, depth - 1))
            }
            5 => Term::if_(self.boolean(depth - 1), self.prob(t, depth - 1), self.prob(t, depth - 1)),
            _ => Term::force(Term::thunk(self.prob(t, depth - 1))),
        }
    }
}
