//! Runtime distributions and the semantic points they range over.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::Distribution;
use serde_json::{json, Value as Json};
use statrs::distribution::{Continuous, ContinuousCDF};

use crate::error::{Error, Result};
use crate::lang::{DensBase, Name, Term, Ty};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Gauss,
    Bern,
    ExpDist,
    Beta,
    Uniform,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gauss => "gauss",
            Family::Bern => "bern",
            Family::ExpDist => "expdist",
            Family::Beta => "beta",
            Family::Uniform => "uniform",
        }
    }

    /// Replaces out-of-domain parameters by the family's defaults so that
    /// every constructor is total.
    pub fn sanitize(self, params: &[f64]) -> Vec<f64> {
        let p = |i: usize| params.get(i).copied().unwrap_or(f64::NAN);
        let positive_or_one = |x: f64| if x.is_finite() && x > 0.0 { x } else { 1.0 };
        match self {
            Family::Gauss => {
                let mu = p(0);
                vec![if mu.is_finite() { mu } else { 0.0 }, positive_or_one(p(1))]
            }
            Family::Bern => {
                let q = p(0);
                vec![if q.is_nan() { 0.5 } else { q.clamp(0.0, 1.0) }]
            }
            Family::ExpDist => vec![positive_or_one(p(0))],
            Family::Beta => vec![positive_or_one(p(0)), positive_or_one(p(1))],
            Family::Uniform => {
                let (a, b) = (p(0), p(1));
                if a.is_finite() && b.is_finite() && a < b {
                    vec![a, b]
                } else {
                    vec![0.0, 1.0]
                }
            }
        }
    }
}

/// A symbolic density function over the reals.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityObj {
    pub family: Family,
    pub params: Vec<f64>,
}

impl DensityObj {
    pub fn new(family: Family, params: &[f64]) -> DensityObj {
        DensityObj { family, params: family.sanitize(params) }
    }

    pub fn base(&self) -> DensBase {
        DensBase::Real
    }
}

/// Closed-form density of a continuous parametric family at `x`.
pub fn family_density(family: Family, params: &[f64], x: f64) -> f64 {
    let p = family.sanitize(params);
    let d = match family {
        Family::Gauss => statrs::distribution::Normal::new(p[0], p[1]).map(|n| n.pdf(x)).unwrap_or(0.0),
        Family::ExpDist => {
            if x < 0.0 {
                0.0
            } else {
                p[0] * (-p[0] * x).exp()
            }
        }
        Family::Beta => {
            if x <= 0.0 || x >= 1.0 {
                0.0
            } else {
                let (a, b) = (p[0], p[1]);
                ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - statrs::function::beta::ln_beta(a, b)).exp()
            }
        }
        Family::Uniform => {
            if x >= p[0] && x <= p[1] {
                1.0 / (p[1] - p[0])
            } else {
                0.0
            }
        }
        Family::Bern => 0.0,
    };
    if d.is_nan() {
        0.0
    } else {
        d
    }
}

pub fn density_at(f: &DensityObj, x: &GroundPoint) -> f64 {
    match x {
        GroundPoint::Real(x) => family_density(f.family, &f.params, *x),
        _ => 0.0,
    }
}

pub fn dist_of(f: &DensityObj) -> DistValue {
    DistValue::Parametric { family: f.family, params: f.params.clone() }
}

/// A point of a measurable type.
#[derive(Clone, Debug, PartialEq)]
pub enum GroundPoint {
    Real(f64),
    Unit,
    Pair(Box<GroundPoint>, Box<GroundPoint>),
    Inj(usize, Box<GroundPoint>),
    Dist(Arc<DistValue>),
    Density(DensityObj),
}

impl GroundPoint {
    pub fn bool(b: bool) -> GroundPoint {
        GroundPoint::Inj(b as usize, Box::new(GroundPoint::Unit))
    }

    pub fn pair(a: GroundPoint, b: GroundPoint) -> GroundPoint {
        GroundPoint::Pair(Box::new(a), Box::new(b))
    }

    pub fn inj(tag: usize, body: GroundPoint) -> GroundPoint {
        GroundPoint::Inj(tag, Box::new(body))
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            GroundPoint::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            GroundPoint::Inj(t, body) if **body == GroundPoint::Unit && *t < 2 => Some(*t == 1),
            _ => None,
        }
    }

    /// Type of an indecomposable slot.
    pub fn slot_ty(&self) -> Option<Ty> {
        match self {
            GroundPoint::Real(_) => Some(Ty::Real),
            GroundPoint::Dist(d) => Some(Ty::prob(d.over())),
            GroundPoint::Density(f) => Some(Ty::Dens(f.base())),
            _ => None,
        }
    }

    pub fn has_type(&self, ty: &Ty) -> bool {
        match (self, ty) {
            (GroundPoint::Real(_), Ty::Real) | (GroundPoint::Unit, Ty::Unit) => true,
            (GroundPoint::Pair(a, b), Ty::Prod(s, t)) => a.has_type(s) && b.has_type(t),
            (GroundPoint::Inj(i, body), Ty::Sum(arms)) => arms.get(*i).is_some_and(|a| body.has_type(a)),
            (GroundPoint::Dist(d), Ty::Prob(a)) => d.over() == **a,
            (GroundPoint::Density(f), Ty::Dens(b)) => f.base() == *b,
            _ => false,
        }
    }

    /// Total order used for canonical sorting and merging.
    pub fn canonical_cmp(&self, other: &GroundPoint) -> Ordering {
        use GroundPoint::*;
        fn rank(p: &GroundPoint) -> u8 {
            match p {
                Real(_) => 0,
                Unit => 1,
                Pair(..) => 2,
                Inj(..) => 3,
                Dist(_) => 4,
                Density(_) => 5,
            }
        }
        match (self, other) {
            (Real(a), Real(b)) => a.total_cmp(b),
            (Unit, Unit) => Ordering::Equal,
            (Pair(a1, a2), Pair(b1, b2)) => a1.canonical_cmp(b1).then_with(|| a2.canonical_cmp(b2)),
            (Inj(i, a), Inj(j, b)) => i.cmp(j).then_with(|| a.canonical_cmp(b)),
            (Dist(a), Dist(b)) => a.canonical_cmp(b),
            (Density(a), Density(b)) => a.family.cmp(&b.family).then_with(|| cmp_reals(&a.params, &b.params)),
            _ => rank(self).cmp(&rank(other)),
        }
    }

    /// Structural equality with relative tolerance on reals.
    pub fn approx_eq(&self, other: &GroundPoint, tol: f64) -> bool {
        use GroundPoint::*;
        match (self, other) {
            (Real(a), Real(b)) => reals_close(*a, *b, tol),
            (Unit, Unit) => true,
            (Pair(a1, a2), Pair(b1, b2)) => a1.approx_eq(b1, tol) && a2.approx_eq(b2, tol),
            (Inj(i, a), Inj(j, b)) => i == j && a.approx_eq(b, tol),
            (Dist(a), Dist(b)) => a.approx_eq(b, tol),
            (Density(a), Density(b)) => {
                a.family == b.family
                    && a.params.len() == b.params.len()
                    && a.params.iter().zip(&b.params).all(|(x, y)| reals_close(*x, *y, tol))
            }
            _ => false,
        }
    }

    /// Human-readable rendering; booleans print as `true`/`false`.
    pub fn render(&self) -> String {
        match self {
            GroundPoint::Real(x) => format!("{x:?}"),
            GroundPoint::Unit => "*".into(),
            GroundPoint::Pair(a, b) => format!("({}, {})", a.render(), b.render()),
            GroundPoint::Inj(..) if self.as_bool().is_some() => self.as_bool().unwrap().to_string(),
            GroundPoint::Inj(i, body) => format!("({i}, {})", body.render()),
            GroundPoint::Dist(d) => d.render(),
            GroundPoint::Density(f) => {
                format!("density_{}({})", density_family_name(f.family), render_reals(&f.params))
            }
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            GroundPoint::Real(x) => json!({"kind": "real", "value": json_real(*x)}),
            GroundPoint::Unit => json!({"kind": "unit"}),
            GroundPoint::Pair(a, b) => json!({"kind": "pair", "left": a.to_json(), "right": b.to_json()}),
            GroundPoint::Inj(i, body) => match self.as_bool() {
                Some(b) => json!({"kind": "bool", "value": b}),
                None => json!({"kind": "inj", "tag": i, "value": body.to_json()}),
            },
            GroundPoint::Dist(d) => json!({"kind": "dist", "dist": d.to_json()}),
            GroundPoint::Density(f) => json!({
                "kind": "density",
                "family": density_family_name(f.family),
                "params": f.params.iter().map(|x| json_real(*x)).collect::<Vec<_>>(),
            }),
        }
    }
}

impl fmt::Display for GroundPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn density_family_name(f: Family) -> &'static str {
    match f {
        Family::ExpDist => "exp",
        other => other.name(),
    }
}

/// JSON has no representation for non-finite numbers; they are emitted as
/// strings.
pub fn json_real(x: f64) -> Json {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn render_reals(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn cmp_reals(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub fn reals_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// A first-class probability distribution over a measurable type.
#[derive(Clone, Debug, PartialEq)]
pub enum DistValue {
    Parametric {
        family: Family,
        params: Vec<f64>,
    },
    /// Normalized table; probabilities sum to one.
    FiniteSupport {
        entries: Vec<(f64, GroundPoint)>,
        over: Ty,
    },
    /// Weighted ensemble with positive total weight.
    Empirical {
        entries: Vec<(f64, GroundPoint)>,
        over: Ty,
    },
}

impl DistValue {
    pub fn parametric(family: Family, params: &[f64]) -> DistValue {
        DistValue::Parametric { family, params: family.sanitize(params) }
    }

    pub fn gauss(mu: f64, sigma: f64) -> DistValue {
        DistValue::parametric(Family::Gauss, &[mu, sigma])
    }

    pub fn bern(p: f64) -> DistValue {
        DistValue::parametric(Family::Bern, &[p])
    }

    pub fn dirac(point: GroundPoint, over: Ty) -> DistValue {
        DistValue::FiniteSupport { entries: vec![(1.0, point)], over }
    }

    /// Builds a normalized table from nonnegative masses, merging equal
    /// points and sorting canonically. `None` if the total mass is not a
    /// positive finite number.
    pub fn finite(masses: Vec<(f64, GroundPoint)>, over: Ty) -> Option<DistValue> {
        let merged = merge_points(masses);
        let total: f64 = merged.iter().map(|(w, _)| w).sum();
        if !(total > 0.0 && total.is_finite()) {
            return None;
        }
        let entries = merged.into_iter().map(|(w, p)| (w / total, p)).collect();
        Some(DistValue::FiniteSupport { entries, over })
    }

    /// An empirical ensemble; `None` if the total weight is not positive.
    pub fn empirical(weights: Vec<(f64, GroundPoint)>, over: Ty) -> Option<DistValue> {
        let entries = merge_points(weights);
        let total: f64 = entries.iter().map(|(w, _)| w).sum();
        if !(total > 0.0 && total.is_finite()) {
            return None;
        }
        Some(DistValue::Empirical { entries, over })
    }

    pub fn over(&self) -> Ty {
        match self {
            DistValue::Parametric { family: Family::Bern, .. } => Ty::bool(),
            DistValue::Parametric { .. } => Ty::Real,
            DistValue::FiniteSupport { over, .. } | DistValue::Empirical { over, .. } => over.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DistValue::Parametric { .. } => "parametric",
            DistValue::FiniteSupport { .. } => "finite",
            DistValue::Empirical { .. } => "empirical",
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, DistValue::Parametric { family, .. } if *family != Family::Bern)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GroundPoint {
        match self {
            DistValue::Parametric { family, params } => {
                let p = params;
                match family {
                    Family::Gauss => {
                        GroundPoint::Real(rand_distr::Normal::new(p[0], p[1]).expect("sanitized").sample(rng))
                    }
                    Family::Bern => GroundPoint::bool(rng.random::<f64>() < p[0]),
                    Family::ExpDist => GroundPoint::Real(rand_distr::Exp::new(p[0]).expect("sanitized").sample(rng)),
                    Family::Beta => {
                        GroundPoint::Real(rand_distr::Beta::new(p[0], p[1]).expect("sanitized").sample(rng))
                    }
                    Family::Uniform => GroundPoint::Real(p[0] + (p[1] - p[0]) * rng.random::<f64>()),
                }
            }
            DistValue::FiniteSupport { entries, .. } | DistValue::Empirical { entries, .. } => {
                let total: f64 = entries.iter().map(|(w, _)| w).sum();
                let mut u = rng.random::<f64>() * total;
                for (w, point) in entries {
                    if u < *w {
                        return point.clone();
                    }
                    u -= w;
                }
                // rounding can leave u just above the last cumulative weight
                entries.iter().rev().find(|(w, _)| *w > 0.0).map(|(_, p)| p.clone()).expect("positive total")
            }
        }
    }

    /// The atoms of a finitely supported distribution, zero-mass atoms
    /// dropped; `None` for continuous families.
    pub fn enumerate(&self) -> Option<Vec<(f64, GroundPoint)>> {
        match self {
            DistValue::Parametric { family: Family::Bern, params } => {
                let p = params[0];
                let atoms = [(1.0 - p, GroundPoint::bool(false)), (p, GroundPoint::bool(true))];
                Some(atoms.into_iter().filter(|(q, _)| *q > 0.0).collect())
            }
            DistValue::Parametric { .. } => None,
            DistValue::FiniteSupport { entries, .. } => {
                Some(entries.iter().filter(|(q, _)| *q > 0.0).cloned().collect())
            }
            DistValue::Empirical { entries, .. } => {
                let total: f64 = entries.iter().map(|(w, _)| w).sum();
                Some(entries.iter().filter(|(w, _)| *w > 0.0).map(|(w, p)| (w / total, p.clone())).collect())
            }
        }
    }

    /// Expectation of `f` for finitely supported distributions.
    pub fn expectation(&self, f: impl Fn(&GroundPoint) -> f64) -> Option<f64> {
        self.enumerate().map(|atoms| atoms.iter().map(|(p, x)| p * f(x)).sum())
    }

    /// Cumulative distribution function of a continuous family.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        let DistValue::Parametric { family, params: p } = self else { return None };
        Some(match family {
            Family::Gauss => statrs::distribution::Normal::new(p[0], p[1]).ok()?.cdf(x),
            Family::ExpDist => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-p[0] * x).exp_m1()
                }
            }
            Family::Beta => statrs::distribution::Beta::new(p[0], p[1]).ok()?.cdf(x.clamp(0.0, 1.0)),
            Family::Uniform => ((x - p[0]) / (p[1] - p[0])).clamp(0.0, 1.0),
            Family::Bern => return None,
        })
    }

    /// Quantile function of a continuous family; `q` is clamped to [0, 1].
    pub fn inverse_cdf(&self, q: f64) -> Option<f64> {
        let DistValue::Parametric { family, params: p } = self else { return None };
        let q = q.clamp(0.0, 1.0);
        Some(match family {
            Family::Gauss => statrs::distribution::Normal::new(p[0], p[1]).ok()?.inverse_cdf(q),
            Family::ExpDist => -(-q).ln_1p() / p[0],
            Family::Beta => statrs::distribution::Beta::new(p[0], p[1]).ok()?.inverse_cdf(q),
            Family::Uniform => p[0] + q * (p[1] - p[0]),
            Family::Bern => return None,
        })
    }

    /// Center, scale and hard support bounds of a continuous family, used to
    /// place quadrature grids.
    pub fn location_scale(&self) -> Option<(f64, f64, f64, f64)> {
        let DistValue::Parametric { family, params: p } = self else { return None };
        match family {
            Family::Gauss => Some((p[0], p[1], f64::NEG_INFINITY, f64::INFINITY)),
            Family::ExpDist => Some((1.0 / p[0], 1.0 / p[0], 0.0, f64::INFINITY)),
            Family::Beta => {
                let (a, b) = (p[0], p[1]);
                let mean = a / (a + b);
                let var = a * b / ((a + b).powi(2) * (a + b + 1.0));
                Some((mean, var.sqrt(), 0.0, 1.0))
            }
            Family::Uniform => Some(((p[0] + p[1]) / 2.0, (p[1] - p[0]) / 12f64.sqrt(), p[0], p[1])),
            Family::Bern => None,
        }
    }

    pub fn canonical_cmp(&self, other: &DistValue) -> Ordering {
        use DistValue::*;
        let rank = |d: &DistValue| match d {
            Parametric { .. } => 0,
            FiniteSupport { .. } => 1,
            Empirical { .. } => 2,
        };
        match (self, other) {
            (Parametric { family: f, params: p }, Parametric { family: g, params: q }) => {
                f.cmp(g).then_with(|| cmp_reals(p, q))
            }
            (FiniteSupport { entries: a, .. }, FiniteSupport { entries: b, .. })
            | (Empirical { entries: a, .. }, Empirical { entries: b, .. }) => {
                for ((p, x), (q, y)) in a.iter().zip(b) {
                    let o = x.canonical_cmp(y).then_with(|| p.total_cmp(q));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                a.len().cmp(&b.len())
            }
            _ => rank(self).cmp(&rank(other)),
        }
    }

    /// Equality up to `tol`: parametric families compare parameters, finite
    /// tables compare normalized atom masses.
    pub fn approx_eq(&self, other: &DistValue, tol: f64) -> bool {
        match (self, other) {
            (DistValue::Parametric { family: f, params: p }, DistValue::Parametric { family: g, params: q }) => {
                f == g && p.iter().zip(q).all(|(x, y)| reals_close(*x, *y, tol))
            }
            _ => match (self.enumerate(), other.enumerate()) {
                (Some(a), Some(b)) => atoms_approx_eq(&a, &b, tol),
                _ => false,
            },
        }
    }

    pub fn render(&self) -> String {
        match self {
            DistValue::Parametric { family, params } => format!("{}({})", family.name(), render_reals(params)),
            DistValue::FiniteSupport { entries, .. } | DistValue::Empirical { entries, .. } => {
                let body: Vec<String> = entries.iter().map(|(p, x)| format!("{}: {p:?}", x.render())).collect();
                format!("{}{{{}}}", self.kind(), body.join(", "))
            }
        }
    }

    /// `{kind, params}` for parametric families, `{kind, atoms}` otherwise;
    /// atoms are `[rendering, probability]` sorted by rendering.
    pub fn to_json(&self) -> Json {
        match self {
            DistValue::Parametric { family, params } => json!({
                "kind": "parametric",
                "family": family.name(),
                "params": params.iter().map(|x| json_real(*x)).collect::<Vec<_>>(),
            }),
            _ => {
                let atoms = self.enumerate().unwrap_or_default();
                let mut rendered: Vec<(String, f64)> = atoms.iter().map(|(p, x)| (x.render(), *p)).collect();
                rendered.sort_by(|a, b| a.0.cmp(&b.0));
                json!({
                    "kind": self.kind(),
                    "atoms": rendered.into_iter().map(|(r, p)| json!([r, json_real(p)])).collect::<Vec<_>>(),
                })
            }
        }
    }
}

impl fmt::Display for DistValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Merges atoms at identical points and sorts them canonically.
pub fn merge_points(mut atoms: Vec<(f64, GroundPoint)>) -> Vec<(f64, GroundPoint)> {
    atoms.sort_by(|a, b| a.1.canonical_cmp(&b.1));
    let mut out: Vec<(f64, GroundPoint)> = Vec::with_capacity(atoms.len());
    for (w, p) in atoms {
        match out.last_mut() {
            Some((acc, q)) if *q == p => *acc += w,
            _ => out.push((w, p)),
        }
    }
    out
}

/// Compares two atom lists as measures: atoms whose points agree within
/// `tol` are pooled before masses are compared.
pub fn atoms_approx_eq(a: &[(f64, GroundPoint)], b: &[(f64, GroundPoint)], tol: f64) -> bool {
    let pa = cluster(a, tol);
    let pb = cluster(b, tol);
    if pa.len() != pb.len() {
        return false;
    }
    let mut used = vec![false; pb.len()];
    'outer: for (m, x) in &pa {
        for (j, (n, y)) in pb.iter().enumerate() {
            if !used[j] && x.approx_eq(y, tol) && reals_close(*m, *n, tol) {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn cluster(atoms: &[(f64, GroundPoint)], tol: f64) -> Vec<(f64, GroundPoint)> {
    let mut out: Vec<(f64, GroundPoint)> = Vec::new();
    for (m, x) in atoms {
        match out.iter_mut().find(|(_, y)| y.approx_eq(x, tol)) {
            Some((acc, _)) => *acc += m,
            None => out.push((*m, x.clone())),
        }
    }
    out
}

/// An ordered value with its context variables left as holes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Slot,
    Unit,
    Pair(Box<Pattern>, Box<Pattern>),
    Inj { tag: usize, sum: Arc<Ty>, body: Box<Pattern> },
}

impl Pattern {
    pub fn slot_count(&self) -> usize {
        match self {
            Pattern::Slot => 1,
            Pattern::Unit => 0,
            Pattern::Pair(a, b) => a.slot_count() + b.slot_count(),
            Pattern::Inj { body, .. } => body.slot_count(),
        }
    }

    /// Instantiates the holes with `names` in left-to-right order.
    pub fn to_term(&self, names: &mut impl Iterator<Item = Name>) -> Term {
        match self {
            Pattern::Slot => Term::Var(names.next().expect("one name per slot")),
            Pattern::Unit => Term::Star,
            Pattern::Pair(a, b) => {
                let l = a.to_term(names);
                Term::pair(l, b.to_term(names))
            }
            Pattern::Inj { tag, sum, body } => {
                Term::Inj { tag: *tag, sum: sum.clone(), body: Box::new(body.to_term(names)) }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderedDecomposition {
    pub pattern: Pattern,
    pub slots: Vec<GroundPoint>,
}

/// Splits a point into its ordered-value pattern and the indecomposable
/// components, left to right.
pub fn decompose(p: &GroundPoint, ty: &Ty) -> Result<OrderedDecomposition> {
    let mut slots = Vec::new();
    let pattern = decompose_into(p, ty, &mut slots)?;
    Ok(OrderedDecomposition { pattern, slots })
}

fn decompose_into(p: &GroundPoint, ty: &Ty, slots: &mut Vec<GroundPoint>) -> Result<Pattern> {
    match (p, ty) {
        (GroundPoint::Unit, Ty::Unit) => Ok(Pattern::Unit),
        (GroundPoint::Real(_), Ty::Real)
        | (GroundPoint::Dist(_), Ty::Prob(_))
        | (GroundPoint::Density(_), Ty::Dens(_)) => {
            slots.push(p.clone());
            Ok(Pattern::Slot)
        }
        (GroundPoint::Pair(a, b), Ty::Prod(s, t)) => {
            let l = decompose_into(a, s, slots)?;
            Ok(Pattern::Pair(Box::new(l), Box::new(decompose_into(b, t, slots)?)))
        }
        (GroundPoint::Inj(i, body), Ty::Sum(arms)) if *i < arms.len() => Ok(Pattern::Inj {
            tag: *i,
            sum: Arc::new(ty.clone()),
            body: Box::new(decompose_into(body, &arms[*i], slots)?),
        }),
        _ => Err(Error::internal(format!("point {} does not have type {ty}", p.render()))),
    }
}

/// Inverse of [`decompose`].
pub fn reconstruct(pattern: &Pattern, slots: &[GroundPoint]) -> GroundPoint {
    fn go(p: &Pattern, it: &mut std::slice::Iter<'_, GroundPoint>) -> GroundPoint {
        match p {
            Pattern::Slot => it.next().expect("slot count matches").clone(),
            Pattern::Unit => GroundPoint::Unit,
            Pattern::Pair(a, b) => {
                let l = go(a, it);
                GroundPoint::pair(l, go(b, it))
            }
            Pattern::Inj { tag, body, .. } => GroundPoint::inj(*tag, go(body, it)),
        }
    }
    go(pattern, &mut slots.iter())
}

/// The ordered-value patterns of a measurable type: one per summand of its
/// sum-of-products normal form.
pub fn ordered_patterns(ty: &Ty) -> Vec<Pattern> {
    match ty {
        Ty::Unit => vec![Pattern::Unit],
        Ty::Real | Ty::Prob(_) | Ty::Dens(_) => vec![Pattern::Slot],
        Ty::Prod(a, b) => {
            let right = ordered_patterns(b);
            ordered_patterns(a)
                .into_iter()
                .flat_map(|l| right.iter().map(move |r| Pattern::Pair(Box::new(l.clone()), Box::new(r.clone()))))
                .collect()
        }
        Ty::Sum(arms) => {
            let sum = Arc::new(ty.clone());
            arms.iter()
                .enumerate()
                .flat_map(|(tag, a)| {
                    let sum = sum.clone();
                    ordered_patterns(a).into_iter().map(move |body| Pattern::Inj {
                        tag,
                        sum: sum.clone(),
                        body: Box::new(body),
                    })
                })
                .collect()
        }
        Ty::Fun(..) | Ty::Thunk(_) => Vec::new(),
    }
}
