//! A direct denotational interpreter for discrete programs, used as an
//! oracle against the operational machine. It shares no code with `opsem`
//! beyond primitives and normalization on finite measures.

use std::sync::Arc;

use crate::dist::{DensityObj, DistValue, GroundPoint};
use crate::error::{Error, Result};
use crate::inference::{iota, WeightedMeasure};
use crate::lang::{Name, PrimOp, Term, Ty};
use crate::opsem::CanonicalEnv;
use crate::prims::PrimRegistry;
use crate::typecheck::{Checker, Mode, TyCtx};

/// Semantic values, including closures for higher-order terms.
#[derive(Clone, Debug)]
pub enum DVal {
    Real(f64),
    Unit,
    Pair(Box<DVal>, Box<DVal>),
    Inj(usize, Box<DVal>),
    Dist(Arc<DistValue>),
    Density(DensityObj),
    Closure { param: Name, body: Arc<Term>, env: DEnv },
    Suspended { body: Arc<Term>, env: DEnv },
}

impl DVal {
    fn from_point(p: GroundPoint) -> DVal {
        match p {
            GroundPoint::Real(r) => DVal::Real(r),
            GroundPoint::Unit => DVal::Unit,
            GroundPoint::Pair(a, b) => DVal::Pair(Box::new(DVal::from_point(*a)), Box::new(DVal::from_point(*b))),
            GroundPoint::Inj(i, b) => DVal::Inj(i, Box::new(DVal::from_point(*b))),
            GroundPoint::Dist(d) => DVal::Dist(d),
            GroundPoint::Density(f) => DVal::Density(f),
        }
    }

    pub fn to_point(&self) -> Result<GroundPoint> {
        Ok(match self {
            DVal::Real(r) => GroundPoint::Real(*r),
            DVal::Unit => GroundPoint::Unit,
            DVal::Pair(a, b) => GroundPoint::pair(a.to_point()?, b.to_point()?),
            DVal::Inj(i, b) => GroundPoint::inj(*i, b.to_point()?),
            DVal::Dist(d) => GroundPoint::Dist(d.clone()),
            DVal::Density(f) => GroundPoint::Density(f.clone()),
            DVal::Closure { .. } | DVal::Suspended { .. } => {
                return Err(Error::HigherOrderUnsupported("function or thunk in a ground position".into()))
            }
        })
    }
}

/// Values and types of the variables in scope.
#[derive(Clone, Debug, Default)]
pub struct DEnv {
    vals: Vec<(Name, DVal)>,
    ctx: TyCtx,
}

impl DEnv {
    fn lookup(&self, x: &str) -> Result<&DVal> {
        self.vals
            .iter()
            .rev()
            .find(|(y, _)| &**y == x)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::internal(format!("unbound variable `{x}`")))
    }

    fn bind(&self, x: &Name, v: DVal, ty: Ty) -> DEnv {
        let mut e = self.clone();
        e.vals.push((x.clone(), v));
        e.ctx.push(x.clone(), ty);
        e
    }
}

struct Oracle<'a> {
    prims: &'a PrimRegistry,
}

type Outcomes = Vec<(f64, f64, DVal)>;

impl Oracle<'_> {
    fn ty(&self, mode: Mode, env: &DEnv, t: &Term) -> Result<Ty> {
        Ok(Checker::new(self.prims).infer(mode, &env.ctx, t)?)
    }

    fn det(&self, env: &DEnv, t: &Term) -> Result<DVal> {
        Ok(match t {
            Term::Var(x) => env.lookup(x)?.clone(),
            Term::Star => DVal::Unit,
            Term::Pair(a, b) => DVal::Pair(Box::new(self.det(env, a)?), Box::new(self.det(env, b)?)),
            Term::Proj(j, a) => match self.det(env, a)? {
                DVal::Pair(l, r) => *if *j == 0 { l } else { r },
                _ => return Err(Error::internal("projection from a non-pair")),
            },
            Term::Inj { tag, body, .. } => DVal::Inj(*tag, Box::new(self.det(env, body)?)),
            Term::CaseD(s, arms) => {
                let (tag, v) = self.scrutinee(env, s)?;
                let (arm, ty) = (&arms[tag], self.summand(env, s, tag)?);
                self.det(&env.bind(&arm.binder, v, ty), &arm.body)?
            }
            Term::Prim(PrimOp::Lit(c), _) => DVal::Real(*c),
            Term::Prim(PrimOp::Named(f), a) => {
                let arg = self.det(env, a)?.to_point()?;
                let aty = self.ty(Mode::Det, env, a)?;
                DVal::from_point(self.prims.apply(f, &arg, &aty)?.0)
            }
            Term::Norm(body) => {
                let over = self.ty(Mode::Prob, env, body)?;
                let entries = self
                    .prob(env, body)?
                    .into_iter()
                    .map(|(p, w, v)| Ok((p, w, v.to_point()?)))
                    .collect::<Result<Vec<_>>>()?;
                DVal::from_point(iota(&WeightedMeasure::new(entries, over)).to_point())
            }
            Term::Lam { param, body, .. } => {
                DVal::Closure { param: param.clone(), body: Arc::new((**body).clone()), env: env.clone() }
            }
            Term::App(f, a) => {
                let fv = self.det(env, f)?;
                let av = self.det(env, a)?;
                let aty = self.ty(Mode::Det, env, a)?;
                match fv {
                    DVal::Closure { param, body, env: cenv } => self.det(&cenv.bind(&param, av, aty), &body)?,
                    _ => return Err(Error::internal("application of a non-function")),
                }
            }
            Term::Thunk(body) => DVal::Suspended { body: Arc::new((**body).clone()), env: env.clone() },
            other => return Err(Error::internal(format!("probabilistic term `{other}` in deterministic position"))),
        })
    }

    fn scrutinee(&self, env: &DEnv, s: &Term) -> Result<(usize, DVal)> {
        match self.det(env, s)? {
            DVal::Inj(tag, v) => Ok((tag, *v)),
            _ => Err(Error::internal("case on a non-injection")),
        }
    }

    fn summand(&self, env: &DEnv, s: &Term, tag: usize) -> Result<Ty> {
        match self.ty(Mode::Det, env, s)? {
            Ty::Sum(mut tys) if tag < tys.len() => Ok(tys.swap_remove(tag)),
            other => Err(Error::internal(format!("scrutinee of type {other}"))),
        }
    }

    fn prob(&self, env: &DEnv, t: &Term) -> Result<Outcomes> {
        Ok(match t {
            Term::Return(v) => vec![(1.0, 1.0, self.det(env, v)?)],
            Term::Let(x, t1, u) => {
                let xty = self.ty(Mode::Prob, env, t1)?;
                let mut out = Vec::new();
                for (p, w, v) in self.prob(env, t1)? {
                    for (q, w2, r) in self.prob(&env.bind(x, v, xty.clone()), u)? {
                        out.push((p * q, w * w2, r));
                    }
                }
                out
            }
            Term::CaseP(s, arms) => {
                let (tag, v) = self.scrutinee(env, s)?;
                let (arm, ty) = (&arms[tag], self.summand(env, s, tag)?);
                self.prob(&env.bind(&arm.binder, v, ty), &arm.body)?
            }
            Term::Sample(a) => match self.det(env, a)? {
                DVal::Dist(d) => d
                    .enumerate()
                    .ok_or_else(|| Error::NotEnumerable(d.render()))?
                    .into_iter()
                    .map(|(p, x)| (p, 1.0, DVal::from_point(x)))
                    .collect(),
                _ => return Err(Error::internal("sample from a non-distribution")),
            },
            Term::Score(a) => match self.det(env, a)? {
                DVal::Real(r) => vec![(1.0, r.max(0.0), DVal::Unit)],
                _ => return Err(Error::internal("score of a non-real")),
            },
            Term::Force(a) => match self.det(env, a)? {
                DVal::Suspended { body, env: tenv } => self.prob(&tenv, &body)?,
                _ => return Err(Error::internal("force of a non-thunk")),
            },
            other => return Err(Error::internal(format!("deterministic term `{other}` in probabilistic position"))),
        })
    }
}

impl DEnv {
    fn from_canonical(env: &CanonicalEnv) -> DEnv {
        DEnv {
            vals: env.slots().iter().map(|(x, p)| (x.clone(), DVal::from_point(p.clone()))).collect(),
            ctx: env.ty_ctx(),
        }
    }
}

/// The measure denoted by a probabilistic term of measurable type under
/// `env`, with equal outcomes merged.
pub fn denote_prob(t: &Term, env: &CanonicalEnv) -> Result<WeightedMeasure> {
    let oracle = Oracle { prims: PrimRegistry::standard() };
    let env = DEnv::from_canonical(env);
    let over = oracle.ty(Mode::Prob, &env, t)?;
    let entries =
        oracle.prob(&env, t)?.into_iter().map(|(p, w, v)| Ok((p, w, v.to_point()?))).collect::<Result<Vec<_>>>()?;
    Ok(WeightedMeasure::new(entries, over).merged())
}

/// The value denoted by a deterministic term of measurable type under `env`.
pub fn denote_det(t: &Term, env: &CanonicalEnv) -> Result<GroundPoint> {
    let oracle = Oracle { prims: PrimRegistry::standard() };
    let env = DEnv::from_canonical(env);
    oracle.ty(Mode::Det, &env, t)?;
    oracle.det(&env, t)?.to_point()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn higher_order_discrete_program() {
        let t = parse(
            "let f = return(\\b : bool. if b then 3.0 else 1.0) in
             let x = sample(bern(0.5)) in score(f x); return(x)",
        )
        .unwrap();
        let m = denote_prob(&t, &CanonicalEnv::new()).unwrap();
        assert_eq!(m.evidence(), 2.0);
    }

    #[test]
    fn nested_norm() {
        let t = parse("norm(let x = sample(bern(0.25)) in score(if x then 5.0 else 2.0); return(x))").unwrap();
        let GroundPoint::Inj(0, body) = denote_det(&t, &CanonicalEnv::new()).unwrap() else { panic!() };
        let GroundPoint::Pair(z, _) = *body else { panic!() };
        assert_eq!(*z, GroundPoint::Real(2.75));
    }

    #[test]
    fn closures_cannot_be_outputs() {
        let t = parse("return(\\x : R. x)").unwrap();
        assert!(matches!(
            denote_prob(&t, &CanonicalEnv::new()),
            Err(Error::HigherOrderUnsupported(_)) | Err(Error::Type(_))
        ));
    }
}
