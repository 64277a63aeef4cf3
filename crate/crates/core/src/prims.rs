//! The registry of measurable-function constants.
//!
//! A name may carry several overloads; the one whose domain matches the
//! argument type is selected, both by the type checker and at run time.

use std::collections::BTreeMap;
use std::sync::{Arc, LazyLock};

use crate::dist::{density_at, dist_of, family_density, DensityObj, DistValue, Family, GroundPoint};
use crate::error::{Error, Result};
use crate::lang::{DensBase, Ty};

/// Evaluation function: argument point and argument type to result point.
pub type EvalFn = fn(&GroundPoint, &Ty) -> GroundPoint;

#[derive(Clone, Debug, PartialEq)]
pub enum Signature {
    Fixed {
        dom: Ty,
        cod: Ty,
    },
    /// `A → P(A)` for measurable `A`.
    Dirac,
    /// `A × A → bool` for measurable `A`.
    Equality,
    /// `D(𝔻) × 𝔻 → R`.
    DensityEval,
    /// `D(𝔻) → P(𝔻)`.
    DensityDist,
}

impl Signature {
    /// The codomain when applied to an argument of type `arg`.
    pub fn codomain(&self, arg: &Ty) -> Option<Ty> {
        match self {
            Signature::Fixed { dom, cod } => (dom == arg).then(|| cod.clone()),
            Signature::Dirac => arg.is_measurable().then(|| Ty::prob(arg.clone())),
            Signature::Equality => match arg {
                Ty::Prod(a, b) if a == b && a.is_measurable() => Some(Ty::bool()),
                _ => None,
            },
            Signature::DensityEval => match arg {
                Ty::Prod(d, x) => match &**d {
                    Ty::Dens(base) if base.to_ty() == **x => Some(Ty::Real),
                    _ => None,
                },
                _ => None,
            },
            Signature::DensityDist => match arg {
                Ty::Dens(base) => Some(Ty::prob(base.to_ty())),
                _ => None,
            },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Signature::Fixed { dom, cod } => format!("{dom} -> {cod}"),
            Signature::Dirac => "A -> P(A)".into(),
            Signature::Equality => "A * A -> bool".into(),
            Signature::DensityEval => "D(B) * B -> R".into(),
            Signature::DensityDist => "D(B) -> P(B)".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Overload {
    pub sig: Signature,
    pub eval: EvalFn,
}

#[derive(Clone, Debug, Default)]
pub struct PrimRegistry {
    map: BTreeMap<String, Vec<Overload>>,
}

impl PrimRegistry {
    pub fn empty() -> PrimRegistry {
        PrimRegistry::default()
    }

    /// The shared default registry.
    pub fn standard() -> &'static PrimRegistry {
        static STANDARD: LazyLock<PrimRegistry> = LazyLock::new(register_default_prims);
        &STANDARD
    }

    pub fn register(&mut self, name: &str, sig: Signature, eval: EvalFn) {
        self.map.entry(name.to_string()).or_default().push(Overload { sig, eval });
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn overloads(&self, name: &str) -> &[Overload] {
        self.map.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `(domain, codomain)` of the first fixed-signature overload.
    pub fn lookup(&self, name: &str) -> Option<(Ty, Ty)> {
        self.overloads(name).iter().find_map(|o| match &o.sig {
            Signature::Fixed { dom, cod } => Some((dom.clone(), cod.clone())),
            _ => None,
        })
    }

    /// Selects the overload applicable to `arg` and returns its codomain.
    pub fn resolve(&self, name: &str, arg: &Ty) -> Option<(&Overload, Ty)> {
        self.overloads(name).iter().find_map(|o| o.sig.codomain(arg).map(|cod| (o, cod)))
    }

    pub fn apply(&self, name: &str, arg: &GroundPoint, arg_ty: &Ty) -> Result<(GroundPoint, Ty)> {
        let (o, cod) = self
            .resolve(name, arg_ty)
            .ok_or_else(|| Error::internal(format!("no overload of `{name}` accepts {arg_ty}")))?;
        if !arg.has_type(arg_ty) {
            return Err(Error::internal(format!("`{name}` applied to {} which is not of type {arg_ty}", arg.render())));
        }
        Ok(((o.eval)(arg, arg_ty), cod))
    }
}

fn total(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x
    }
}

fn real(p: &GroundPoint) -> f64 {
    p.as_real().unwrap_or(0.0)
}

fn reals2(p: &GroundPoint) -> (f64, f64) {
    match p {
        GroundPoint::Pair(a, b) => (real(a), real(b)),
        _ => (0.0, 0.0),
    }
}

/// `x × (a × b)`
fn reals3(p: &GroundPoint) -> (f64, f64, f64) {
    match p {
        GroundPoint::Pair(x, ab) => {
            let (a, b) = reals2(ab);
            (real(x), a, b)
        }
        _ => (0.0, 0.0, 0.0),
    }
}

fn r(x: f64) -> GroundPoint {
    GroundPoint::Real(total(x))
}

fn dist(d: DistValue) -> GroundPoint {
    GroundPoint::Dist(Arc::new(d))
}

fn bool_arg(p: &GroundPoint) -> bool {
    p.as_bool().unwrap_or(false)
}

pub fn register_default_prims() -> PrimRegistry {
    use Signature::*;
    let rr = Ty::prod(Ty::Real, Ty::Real);
    let rrr = Ty::prod(Ty::Real, rr.clone());
    let bb = Ty::prod(Ty::bool(), Ty::bool());
    let dr = Ty::Dens(DensBase::Real);
    let binary = |cod: Ty| Fixed { dom: rr.clone(), cod };
    let unary = |cod: Ty| Fixed { dom: Ty::Real, cod };

    let mut reg = PrimRegistry::empty();

    reg.register("+", binary(Ty::Real), |p, _| {
        let (a, b) = reals2(p);
        r(a + b)
    });
    reg.register("-", binary(Ty::Real), |p, _| {
        let (a, b) = reals2(p);
        r(a - b)
    });
    reg.register("*", binary(Ty::Real), |p, _| {
        let (a, b) = reals2(p);
        r(a * b)
    });
    reg.register("/", binary(Ty::Real), |p, _| {
        let (a, b) = reals2(p);
        r(if b == 0.0 { 0.0 } else { a / b })
    });
    reg.register("pow", binary(Ty::Real), |p, _| {
        let (a, b) = reals2(p);
        r(a.powf(b))
    });
    reg.register("min", binary(Ty::Real), |p, _| {
        let (a, b) = reals2(p);
        r(a.min(b))
    });
    reg.register("max", binary(Ty::Real), |p, _| {
        let (a, b) = reals2(p);
        r(a.max(b))
    });

    reg.register("neg", unary(Ty::Real), |p, _| r(-real(p)));
    reg.register("exp", unary(Ty::Real), |p, _| r(real(p).exp()));
    reg.register("log", unary(Ty::Real), |p, _| {
        let x = real(p);
        r(if x <= 0.0 { 0.0 } else { x.ln() })
    });
    reg.register("sqrt", unary(Ty::Real), |p, _| {
        let x = real(p);
        r(if x <= 0.0 { 0.0 } else { x.sqrt() })
    });
    reg.register("abs", unary(Ty::Real), |p, _| r(real(p).abs()));
    reg.register("floor", unary(Ty::Real), |p, _| r(real(p).floor()));

    reg.register("<", binary(Ty::bool()), |p, _| {
        let (a, b) = reals2(p);
        GroundPoint::bool(a < b)
    });
    reg.register(">", binary(Ty::bool()), |p, _| {
        let (a, b) = reals2(p);
        GroundPoint::bool(a > b)
    });
    reg.register("<=", binary(Ty::bool()), |p, _| {
        let (a, b) = reals2(p);
        GroundPoint::bool(a <= b)
    });
    reg.register(">=", binary(Ty::bool()), |p, _| {
        let (a, b) = reals2(p);
        GroundPoint::bool(a >= b)
    });
    reg.register("==", Equality, |p, _| match p {
        GroundPoint::Pair(a, b) => GroundPoint::bool(a == b),
        _ => GroundPoint::bool(false),
    });
    reg.register("not", Fixed { dom: Ty::bool(), cod: Ty::bool() }, |p, _| GroundPoint::bool(!bool_arg(p)));
    reg.register("and", Fixed { dom: bb.clone(), cod: Ty::bool() }, |p, _| match p {
        GroundPoint::Pair(a, b) => GroundPoint::bool(bool_arg(a) && bool_arg(b)),
        _ => GroundPoint::bool(false),
    });
    reg.register("or", Fixed { dom: bb, cod: Ty::bool() }, |p, _| match p {
        GroundPoint::Pair(a, b) => GroundPoint::bool(bool_arg(a) || bool_arg(b)),
        _ => GroundPoint::bool(false),
    });

    reg.register("dirac", Dirac, |p, ty| dist(DistValue::dirac(p.clone(), ty.clone())));
    reg.register("gauss", binary(Ty::prob(Ty::Real)), |p, _| {
        let (a, b) = reals2(p);
        dist(DistValue::parametric(Family::Gauss, &[a, b]))
    });
    reg.register("bern", unary(Ty::prob(Ty::bool())), |p, _| dist(DistValue::bern(real(p))));
    reg.register("expdist", unary(Ty::prob(Ty::Real)), |p, _| dist(DistValue::parametric(Family::ExpDist, &[real(p)])));
    reg.register("beta", binary(Ty::prob(Ty::Real)), |p, _| {
        let (a, b) = reals2(p);
        dist(DistValue::parametric(Family::Beta, &[a, b]))
    });
    reg.register("uniform", binary(Ty::prob(Ty::Real)), |p, _| {
        let (a, b) = reals2(p);
        dist(DistValue::parametric(Family::Uniform, &[a, b]))
    });

    // density_f(x, params) evaluates; density_f(params) builds a D(R) object
    reg.register("density_gauss", Fixed { dom: rrr.clone(), cod: Ty::Real }, |p, _| {
        let (x, mu, sigma) = reals3(p);
        r(family_density(Family::Gauss, &[mu, sigma], x))
    });
    reg.register("density_gauss", Fixed { dom: rr.clone(), cod: dr.clone() }, |p, _| {
        let (mu, sigma) = reals2(p);
        GroundPoint::Density(DensityObj::new(Family::Gauss, &[mu, sigma]))
    });
    reg.register("density_exp", Fixed { dom: rr.clone(), cod: Ty::Real }, |p, _| {
        let (x, rate) = reals2(p);
        r(family_density(Family::ExpDist, &[rate], x))
    });
    reg.register("density_exp", Fixed { dom: Ty::Real, cod: dr.clone() }, |p, _| {
        GroundPoint::Density(DensityObj::new(Family::ExpDist, &[real(p)]))
    });
    reg.register("density_beta", Fixed { dom: rrr, cod: Ty::Real }, |p, _| {
        let (x, a, b) = reals3(p);
        r(family_density(Family::Beta, &[a, b], x))
    });
    reg.register("density_beta", Fixed { dom: rr, cod: dr }, |p, _| {
        let (a, b) = reals2(p);
        GroundPoint::Density(DensityObj::new(Family::Beta, &[a, b]))
    });
    reg.register("ev", DensityEval, |p, _| match p {
        GroundPoint::Pair(f, x) => match &**f {
            GroundPoint::Density(f) => r(density_at(f, x)),
            _ => r(0.0),
        },
        _ => r(0.0),
    });
    reg.register("dist", DensityDist, |p, _| match p {
        GroundPoint::Density(f) => dist(dist_of(f)),
        _ => dist(DistValue::gauss(0.0, 1.0)),
    });
    reg
}
