//! The deterministic (`⊢d`) and probabilistic (`⊢p`) typing judgements.

use crate::error::TypeError;
use crate::lang::{Arm, Name, PrimOp, Term, Ty};
use crate::prims::PrimRegistry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Det,
    Prob,
}

/// Typing context; later entries shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TyCtx {
    entries: Vec<(Name, Ty)>,
}

impl TyCtx {
    pub fn new() -> TyCtx {
        TyCtx::default()
    }

    pub fn lookup(&self, x: &str) -> Option<&Ty> {
        self.entries.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn push(&mut self, x: Name, ty: Ty) {
        self.entries.push((x, ty));
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn extended(&self, x: Name, ty: Ty) -> TyCtx {
        let mut c = self.clone();
        c.push(x, ty);
        c
    }

    pub fn entries(&self) -> &[(Name, Ty)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(Name, Ty)> for TyCtx {
    fn from_iter<I: IntoIterator<Item = (Name, Ty)>>(iter: I) -> Self {
        TyCtx { entries: iter.into_iter().collect() }
    }
}

/// A derived judgement `Γ ⊢z t : A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Judgement {
    pub mode: Mode,
    pub ctx: TyCtx,
    pub term: Term,
    pub ty: Ty,
}

pub fn is_measurable(ty: &Ty) -> bool {
    ty.is_measurable()
}

/// Infers the type of `t` against the standard registry.
pub fn infer(mode: Mode, ctx: &TyCtx, t: &Term) -> Result<Ty, TypeError> {
    Checker::new(PrimRegistry::standard()).infer(mode, ctx, t)
}

/// Checks a closed program, trying the probabilistic judgement first for
/// probabilistic terms and the deterministic one otherwise.
pub fn check_program(t: &Term) -> Result<Judgement, TypeError> {
    let mode = if t.is_prob() { Mode::Prob } else { Mode::Det };
    let ctx = TyCtx::new();
    let ty = infer(mode, &ctx, t)?;
    Ok(Judgement { mode, ctx, term: t.clone(), ty })
}

pub struct Checker<'a> {
    prims: &'a PrimRegistry,
}

fn err(reason: impl Into<String>, t: &Term) -> TypeError {
    let mut location = t.to_string();
    if location.chars().count() > 120 {
        location = location.chars().take(117).collect::<String>() + "...";
    }
    TypeError { reason: reason.into(), location }
}

impl<'a> Checker<'a> {
    pub fn new(prims: &'a PrimRegistry) -> Self {
        Checker { prims }
    }

    pub fn infer(&self, mode: Mode, ctx: &TyCtx, t: &Term) -> Result<Ty, TypeError> {
        let mut ctx = ctx.clone();
        self.go(mode, &mut ctx, t)
    }

    fn well_formed(&self, ty: &Ty, t: &Term) -> Result<(), TypeError> {
        ty.well_formed().map_err(|reason| err(reason, t))
    }

    fn under(&self, mode: Mode, ctx: &mut TyCtx, x: &Name, ty: Ty, body: &Term) -> Result<Ty, TypeError> {
        ctx.push(x.clone(), ty);
        let r = self.go(mode, ctx, body);
        ctx.pop();
        r
    }

    fn case(&self, mode: Mode, ctx: &mut TyCtx, t: &Term, scrut: &Term, arms: &[Arm]) -> Result<Ty, TypeError> {
        let sty = self.go(Mode::Det, ctx, scrut)?;
        let Ty::Sum(tys) = sty else {
            return Err(err(format!("case scrutinee has type {sty}, expected a sum"), t));
        };
        if tys.len() != arms.len() {
            return Err(err(format!("case has {} arms but the scrutinee has {} summands", arms.len(), tys.len()), t));
        }
        let mut result: Option<Ty> = None;
        for (arm, aty) in arms.iter().zip(tys) {
            let bty = self.under(mode, ctx, &arm.binder, aty, &arm.body)?;
            match &result {
                None => result = Some(bty),
                Some(r) if *r == bty => {}
                Some(r) => return Err(err(format!("case arms disagree: {r} vs {bty}"), t)),
            }
        }
        Ok(result.expect("sum types are nonempty"))
    }

    fn go(&self, mode: Mode, ctx: &mut TyCtx, t: &Term) -> Result<Ty, TypeError> {
        if t.is_prob() != (mode == Mode::Prob) {
            let (want, got) =
                if mode == Mode::Det { ("deterministic", "probabilistic") } else { ("probabilistic", "deterministic") };
            return Err(err(format!("expected a {want} term, found a {got} one"), t));
        }
        match t {
            Term::Var(x) => ctx.lookup(x).cloned().ok_or_else(|| err(format!("unknown variable `{x}`"), t)),
            Term::Star => Ok(Ty::Unit),
            Term::Pair(a, b) => {
                let ta = self.go(Mode::Det, ctx, a)?;
                Ok(Ty::prod(ta, self.go(Mode::Det, ctx, b)?))
            }
            Term::Proj(j, a) => match self.go(Mode::Det, ctx, a)? {
                Ty::Prod(l, r) => Ok(if *j == 0 { *l } else { *r }),
                other => Err(err(format!("projection from non-product type {other}"), t)),
            },
            Term::Inj { tag, sum, body } => {
                self.well_formed(sum, t)?;
                let Ty::Sum(arms) = &**sum else {
                    return Err(err(format!("injection ascribed non-sum type {sum}"), t));
                };
                let Some(arm) = arms.get(*tag) else {
                    return Err(err(format!("tag {tag} out of range for {sum}"), t));
                };
                let bty = self.go(Mode::Det, ctx, body)?;
                if bty != *arm {
                    return Err(err(format!("injection body has type {bty}, expected {arm}"), t));
                }
                Ok((**sum).clone())
            }
            Term::CaseD(s, arms) => self.case(Mode::Det, ctx, t, s, arms),
            Term::CaseP(s, arms) => self.case(Mode::Prob, ctx, t, s, arms),
            Term::Prim(PrimOp::Lit(_), arg) => match self.go(Mode::Det, ctx, arg)? {
                Ty::Unit => Ok(Ty::Real),
                other => Err(err(format!("literal applied to {other}"), t)),
            },
            Term::Prim(PrimOp::Named(f), arg) => {
                if !self.prims.contains(f) {
                    return Err(err(format!("unknown primitive `{f}`"), t));
                }
                let aty = self.go(Mode::Det, ctx, arg)?;
                match self.prims.resolve(f, &aty) {
                    Some((_, cod)) => Ok(cod),
                    None => {
                        let sigs: Vec<String> = self.prims.overloads(f).iter().map(|o| o.sig.describe()).collect();
                        Err(err(format!("`{f}` cannot be applied to {aty} (signatures: {})", sigs.join("; ")), t))
                    }
                }
            }
            Term::Norm(body) => {
                let a = self.go(Mode::Prob, ctx, body)?;
                if !a.is_measurable() {
                    return Err(err(format!("norm of non-measurable type {a}"), t));
                }
                Ok(Ty::norm_result(a))
            }
            Term::Lam { param, ann, body } => match ann {
                Some(a) => {
                    self.well_formed(a, t)?;
                    let b = self.under(Mode::Det, ctx, param, a.clone(), body)?;
                    Ok(Ty::fun(a.clone(), b))
                }
                None => Err(err(format!("λ-bound `{param}` needs a type annotation"), t)),
            },
            Term::App(f, a) => {
                if let Term::Lam { param, ann: None, body } = &**f {
                    let aty = self.go(Mode::Det, ctx, a)?;
                    return self.under(Mode::Det, ctx, param, aty, body);
                }
                match self.go(Mode::Det, ctx, f)? {
                    Ty::Fun(dom, cod) => {
                        let aty = self.go(Mode::Det, ctx, a)?;
                        if aty != *dom {
                            return Err(err(format!("argument has type {aty}, expected {dom}"), t));
                        }
                        Ok(*cod)
                    }
                    other => Err(err(format!("application of non-function type {other}"), t)),
                }
            }
            Term::Thunk(body) => Ok(Ty::thunk(self.go(Mode::Prob, ctx, body)?)),
            Term::Return(a) => self.go(Mode::Det, ctx, a),
            Term::Let(x, a, b) => {
                let ta = self.go(Mode::Prob, ctx, a)?;
                self.under(Mode::Prob, ctx, x, ta, b)
            }
            Term::Sample(a) => match self.go(Mode::Det, ctx, a)? {
                Ty::Prob(inner) => Ok(*inner),
                other => Err(err(format!("sample from non-distribution type {other}"), t)),
            },
            Term::Score(a) => match self.go(Mode::Det, ctx, a)? {
                Ty::Real => Ok(Ty::Unit),
                other => Err(err(format!("score of type {other}, expected R"), t)),
            },
            Term::Force(a) => match self.go(Mode::Det, ctx, a)? {
                Ty::Thunk(inner) => Ok(*inner),
                other => Err(err(format!("force of non-thunk type {other}"), t)),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::name;
    use crate::parser::parse;

    fn infer_src(mode: Mode, src: &str) -> Result<Ty, TypeError> {
        infer(mode, &TyCtx::new(), &parse(src).unwrap())
    }

    #[test]
    fn gaussian_body_is_bool() {
        let body = "let x = sample(gauss(0.0,3.0)) in score(density_gauss(5.0,(x,1.0))); return(x < 4.5)";
        assert_eq!(infer_src(Mode::Prob, body).unwrap(), Ty::bool());
    }

    #[test]
    fn reified_sampler_type() {
        let ty = infer_src(Mode::Det, "\\x : P(R). thunk(sample(x))").unwrap();
        assert_eq!(ty, Ty::fun(Ty::prob(Ty::Real), Ty::thunk(Ty::Real)));
    }

    #[test]
    fn norm_rule() {
        assert_eq!(infer_src(Mode::Det, "norm(return(42.0))").unwrap(), Ty::norm_result(Ty::Real));
    }

    #[test]
    fn measurability_examples() {
        assert!(is_measurable(&Ty::Real));
        assert!(!is_measurable(&Ty::thunk(Ty::Real)));
        assert!(is_measurable(&Ty::prod(Ty::Real, Ty::bool())));
    }

    #[test]
    fn mode_mismatch() {
        assert!(infer_src(Mode::Det, "sample(bern(0.5))").is_err());
        assert!(infer_src(Mode::Prob, "1.0").is_err());
    }

    #[test]
    fn unknown_variable() {
        let e = infer_src(Mode::Det, "y").unwrap_err();
        assert!(e.reason.contains("unknown variable"));
    }

    #[test]
    fn arm_count_mismatch() {
        let src = "case ((0, *) : 1 + 1 + 1) of { (0, a) => 1.0 | (1, b) => 2.0 }";
        assert!(infer_src(Mode::Det, src).unwrap_err().reason.contains("arms"));
    }

    #[test]
    fn norm_over_thunks_rejected() {
        let src = "norm(return(thunk(return(1.0))))";
        assert!(infer_src(Mode::Det, src).unwrap_err().reason.contains("measurable"));
    }

    #[test]
    fn primitive_mismatch() {
        assert!(infer_src(Mode::Det, "gauss(1.0)").is_err());
        assert!(infer_src(Mode::Det, "true + 1.0").is_err());
    }

    #[test]
    fn density_objects() {
        let ty = infer_src(Mode::Det, "ev(density_gauss(0.0, 1.0), 0.5)").unwrap();
        assert_eq!(ty, Ty::Real);
        let ty = infer_src(Mode::Prob, "sample(dist(density_gauss(2.0, 1.0)))").unwrap();
        assert_eq!(ty, Ty::Real);
    }

    #[test]
    fn unannotated_redex_is_checked_by_argument() {
        assert_eq!(infer_src(Mode::Det, "(\\x. x < 4.5) 5.0").unwrap(), Ty::bool());
    }

    #[test]
    fn weakening() {
        let t = parse("return(x + 1.0)").unwrap();
        let ctx: TyCtx = [(name("x"), Ty::Real)].into_iter().collect();
        let wider = ctx.extended(name("z"), Ty::bool());
        assert_eq!(infer(Mode::Prob, &ctx, &t).unwrap(), infer(Mode::Prob, &wider, &t).unwrap());
    }
}
