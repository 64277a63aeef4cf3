//! Normalization: the map from weighted measures to `(evidence, posterior)`
//! and its three realizations (exact enumeration, deterministic quadrature,
//! Monte Carlo).

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::dist::{atoms_approx_eq, json_real, reals_close, DistValue, GroundPoint};
use crate::error::{Error, Result};
use crate::lang::{canonical_form, Term, Ty};
use crate::opsem::{Config, Machine, Normalizer, ProbStep};

pub use crate::denote::{denote_det, denote_prob};

/// A finitely supported element of `P(R≥0 × A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedMeasure {
    /// `(probability, score, value)` triples.
    pub entries: Vec<(f64, f64, GroundPoint)>,
    pub over: Ty,
}

impl WeightedMeasure {
    pub fn new(entries: Vec<(f64, f64, GroundPoint)>, over: Ty) -> WeightedMeasure {
        WeightedMeasure { entries, over }
    }

    /// Operational pushforward of a configuration via the exact enumerator.
    pub fn from_config(m: &Machine<'_>, c: Config) -> Result<WeightedMeasure> {
        let over = c.ty.clone();
        let entries = m
            .enumerate_prob(c)?
            .into_iter()
            .map(|(p, w, cfg)| Ok((p, w, cfg.value_point()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightedMeasure { entries, over }.merged())
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|(p, _, _)| p).sum()
    }

    pub fn evidence(&self) -> f64 {
        self.entries.iter().map(|(p, s, _)| p * s).sum()
    }

    /// Merges entries with bit-identical scores and equal values, sorted
    /// canonically.
    pub fn merged(&self) -> WeightedMeasure {
        let mut entries = self.entries.clone();
        entries.sort_by(|a, b| a.2.canonical_cmp(&b.2).then_with(|| a.1.total_cmp(&b.1)));
        let mut out: Vec<(f64, f64, GroundPoint)> = Vec::with_capacity(entries.len());
        for (p, s, v) in entries {
            match out.last_mut() {
                Some((q, s2, v2)) if s2.to_bits() == s.to_bits() && *v2 == v => *q += p,
                _ => out.push((p, s, v)),
            }
        }
        WeightedMeasure { entries: out, over: self.over.clone() }
    }

    /// Measure equality up to `tol`: entries whose scores and values agree
    /// within `tol` are pooled, then pooled masses are compared.
    pub fn approx_eq(&self, other: &WeightedMeasure, tol: f64) -> bool {
        let pool = |m: &WeightedMeasure| {
            let mut out: Vec<(f64, f64, GroundPoint)> = Vec::new();
            for (p, s, v) in &m.entries {
                if *p == 0.0 {
                    continue;
                }
                match out.iter_mut().find(|(_, s2, v2)| reals_close(*s, *s2, tol) && v.approx_eq(v2, tol)) {
                    Some(e) => e.0 += p,
                    None => out.push((*p, *s, v.clone())),
                }
            }
            out
        };
        let (a, b) = (pool(self), pool(other));
        if a.len() != b.len() {
            return false;
        }
        let mut used = vec![false; b.len()];
        a.iter().all(|(p, s, v)| {
            let hit = b.iter().enumerate().position(|(j, (q, s2, v2))| {
                !used[j] && reals_close(*s, *s2, tol) && v.approx_eq(v2, tol) && reals_close(*p, *q, tol)
            });
            match hit {
                Some(j) => {
                    used[j] = true;
                    true
                }
                None => false,
            }
        })
    }

    pub fn to_json(&self) -> Json {
        Json::Array(
            self.entries
                .iter()
                .map(|(p, s, v)| json!({"prob": json_real(*p), "score": json_real(*s), "value": v.to_json()}))
                .collect(),
        )
    }
}

/// `(evidence, posterior) + 1 + 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum NormResult {
    Success { evidence: f64, posterior: Arc<DistValue> },
    ZeroEvidence,
    InfiniteEvidence,
}

impl NormResult {
    pub fn tag(&self) -> usize {
        match self {
            NormResult::Success { .. } => 0,
            NormResult::ZeroEvidence => 1,
            NormResult::InfiniteEvidence => 2,
        }
    }

    pub fn evidence(&self) -> Option<f64> {
        match self {
            NormResult::Success { evidence, .. } => Some(*evidence),
            _ => None,
        }
    }

    pub fn posterior(&self) -> Option<&DistValue> {
        match self {
            NormResult::Success { posterior, .. } => Some(posterior),
            _ => None,
        }
    }

    /// Reads a value of type `(R × P(A)) + 1 + 1` back.
    pub fn from_point(p: &GroundPoint) -> Result<NormResult> {
        match p {
            GroundPoint::Inj(0, body) => match &**body {
                GroundPoint::Pair(e, d) => match (&**e, &**d) {
                    (GroundPoint::Real(evidence), GroundPoint::Dist(posterior)) => {
                        Ok(NormResult::Success { evidence: *evidence, posterior: posterior.clone() })
                    }
                    _ => Err(Error::internal("malformed norm result")),
                },
                _ => Err(Error::internal("malformed norm result")),
            },
            GroundPoint::Inj(1, _) => Ok(NormResult::ZeroEvidence),
            GroundPoint::Inj(2, _) => Ok(NormResult::InfiniteEvidence),
            other => Err(Error::internal(format!("{} is not a norm result", other.render()))),
        }
    }

    pub fn to_point(&self) -> GroundPoint {
        match self {
            NormResult::Success { evidence, posterior } => GroundPoint::inj(
                0,
                GroundPoint::pair(GroundPoint::Real(*evidence), GroundPoint::Dist(posterior.clone())),
            ),
            NormResult::ZeroEvidence => GroundPoint::inj(1, GroundPoint::Unit),
            NormResult::InfiniteEvidence => GroundPoint::inj(2, GroundPoint::Unit),
        }
    }

    pub fn approx_eq(&self, other: &NormResult, tol: f64) -> bool {
        match (self, other) {
            (
                NormResult::Success { evidence: e1, posterior: p1 },
                NormResult::Success { evidence: e2, posterior: p2 },
            ) => reals_close(*e1, *e2, tol) && p1.approx_eq(p2, tol),
            _ => self.tag() == other.tag(),
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            NormResult::Success { evidence, posterior } => {
                json!({"tag": 0, "evidence": json_real(*evidence), "posterior": posterior.to_json()})
            }
            NormResult::ZeroEvidence => json!({"tag": 1}),
            NormResult::InfiniteEvidence => json!({"tag": 2}),
        }
    }
}

/// The normalization map on finitely supported measures.
pub fn iota(m: &WeightedMeasure) -> NormResult {
    let evidence = m.evidence();
    if evidence == 0.0 {
        return NormResult::ZeroEvidence;
    }
    if !evidence.is_finite() {
        return NormResult::InfiniteEvidence;
    }
    let masses = m.entries.iter().map(|(p, s, v)| (p * s, v.clone())).filter(|(w, _)| *w > 0.0).collect();
    match DistValue::finite(masses, m.over.clone()) {
        Some(posterior) => NormResult::Success { evidence, posterior: Arc::new(posterior) },
        None => NormResult::InfiniteEvidence,
    }
}

// ---- memoization shared by the backends ----

const MEMO_CAPACITY: usize = 200_000;

/// Caches `ν` on configurations identified up to variable renaming.
#[derive(Default)]
struct Memo {
    map: Mutex<HashMap<String, NormResult>>,
}

impl Memo {
    fn get_or(&self, key: String, f: impl FnOnce() -> Result<NormResult>) -> Result<NormResult> {
        if let Some(r) = self.map.lock().expect("memo lock").get(&key) {
            return Ok(r.clone());
        }
        let r = f()?;
        let mut map = self.map.lock().expect("memo lock");
        if map.len() < MEMO_CAPACITY {
            map.insert(key, r.clone());
        }
        Ok(r)
    }
}

/// A key identifying a configuration up to renaming: the canonical term
/// plus the values of its free variables.
fn config_key(m: &Machine<'_>, c: &Config) -> Result<String> {
    let (term, free) = canonical_form(&c.term);
    let mut key = format!("{}@{}|", m.depth(), term);
    for x in free {
        let v = c.env.lookup(&x).ok_or_else(|| Error::internal(format!("unbound `{x}`")))?;
        key.push_str(&format!("{v:?};"));
    }
    Ok(key)
}

fn hash_str(s: &str) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

// ---- exact ----

/// `ν` by exhaustive enumeration; fails on continuous sample sites.
#[derive(Clone, Copy, Debug, Default)]
pub struct Exact;

impl Normalizer for Exact {
    fn normalize(&self, m: &Machine<'_>, c: Config) -> Result<NormResult> {
        Ok(iota(&WeightedMeasure::from_config(m, c)?))
    }
}

/// Exact normalization of a closed probabilistic term.
pub fn normalize_exact(t: &Term) -> Result<NormResult> {
    let m = Machine::new(&Exact);
    Exact.normalize(&m, Config::closed(t.clone())?)
}

// ---- quadrature ----

#[derive(Clone, Debug, PartialEq)]
pub struct QuadConfig {
    /// Equal-mass cells per continuous site inside the truncation window.
    pub nodes: usize,
    /// Initial truncation radius in prior standard deviations.
    pub radius: f64,
    /// Number of radius doublings for the divergence test.
    pub doublings: u32,
    /// Relative tolerance of the divergence test.
    pub tolerance: f64,
    pub max_sites: usize,
    /// Rounds of bisection of cells that straddle a discontinuity.
    pub refine_rounds: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { nodes: 512, radius: 8.0, doublings: 3, tolerance: 1e-4, max_sites: 3, refine_rounds: 40 }
    }
}

/// `ν` by deterministic quadrature over continuous sample sites.
///
/// Each continuous site is replaced by a grid of cells of equal prior mass
/// over `[center - r·scale, center + r·scale]` plus one cell per tail, the
/// node of a cell being its midpoint quantile. Cells whose discrete outcome
/// structure differs from a neighbour's are bisected repeatedly. The whole
/// computation is repeated for `doublings` doublings of `r`; if the last two
/// evidence estimates disagree by more than `tolerance` (relative), the
/// evidence is declared infinite.
#[derive(Default)]
pub struct Quadrature {
    pub cfg: QuadConfig,
    memo: Memo,
}

struct Outcome {
    prob: f64,
    weight: f64,
    value: GroundPoint,
    path: u64,
}

struct Cell {
    lo: f64,
    hi: f64,
    outcomes: Vec<Outcome>,
    signature: u64,
}

struct QuadRun<'r, 'm> {
    m: &'r Machine<'m>,
    cfg: &'r QuadConfig,
    radius: f64,
    saw_continuous: bool,
}

fn shape_hash(p: &GroundPoint, h: &mut DefaultHasher) {
    match p {
        GroundPoint::Real(_) => 1u8.hash(h),
        GroundPoint::Unit => 2u8.hash(h),
        GroundPoint::Pair(a, b) => {
            3u8.hash(h);
            shape_hash(a, h);
            shape_hash(b, h);
        }
        GroundPoint::Inj(i, b) => {
            4u8.hash(h);
            i.hash(h);
            shape_hash(b, h);
        }
        GroundPoint::Dist(_) => 5u8.hash(h),
        GroundPoint::Density(_) => 6u8.hash(h),
    }
}

fn signature(outcomes: &[Outcome]) -> u64 {
    let mut keys: Vec<(u64, u64, bool)> = outcomes
        .iter()
        .map(|o| {
            let mut h = DefaultHasher::new();
            shape_hash(&o.value, &mut h);
            (o.path, h.finish(), o.weight == 0.0)
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let mut h = DefaultHasher::new();
    keys.hash(&mut h);
    h.finish()
}

impl QuadRun<'_, '_> {
    fn explore(
        &mut self,
        mut c: Config,
        prob: f64,
        mut weight: f64,
        sites: usize,
        out: &mut Vec<Outcome>,
    ) -> Result<()> {
        let mut steps = 0;
        loop {
            match self.m.step_prob(c, &mut steps)? {
                ProbStep::Value(v) => {
                    out.push(Outcome { prob, weight, value: v.value_point()?, path: v.path });
                    return Ok(());
                }
                ProbStep::Moved { score, next } => {
                    weight *= score;
                    c = next;
                }
                ProbStep::Sample(pending) => {
                    if let Some(atoms) = pending.dist.enumerate() {
                        for (q, point) in atoms {
                            self.explore(pending.clone().resume(&point)?, prob * q, weight, sites, out)?;
                        }
                        return Ok(());
                    }
                    if sites >= self.cfg.max_sites {
                        return Err(Error::TooManyContinuousSites(self.cfg.max_sites));
                    }
                    self.saw_continuous = true;
                    let cells = self.integrate_site(&pending, sites + 1)?;
                    for cell in cells {
                        let mass = cell.hi - cell.lo;
                        for o in cell.outcomes {
                            out.push(Outcome { prob: prob * mass * o.prob, weight: weight * o.weight, ..o });
                        }
                    }
                    return Ok(());
                }
            }
        }
    }

    fn eval_cell(&mut self, pending: &crate::opsem::PendingSample, lo: f64, hi: f64, sites: usize) -> Result<Cell> {
        let d = &pending.dist;
        let x = d.inverse_cdf(0.5 * (lo + hi)).ok_or_else(|| Error::NotEnumerable(d.render()))?;
        let mut outcomes = Vec::new();
        self.explore(pending.clone().resume(&GroundPoint::Real(x))?, 1.0, 1.0, sites, &mut outcomes)?;
        let signature = signature(&outcomes);
        Ok(Cell { lo, hi, outcomes, signature })
    }

    fn integrate_site(&mut self, pending: &crate::opsem::PendingSample, sites: usize) -> Result<Vec<Cell>> {
        let d = &pending.dist;
        let (center, scale, lower, upper) = d.location_scale().ok_or_else(|| Error::NotEnumerable(d.render()))?;
        let (a, b) = if lower.is_finite() && upper.is_finite() {
            (lower, upper)
        } else {
            ((center - self.radius * scale).max(lower), (center + self.radius * scale).min(upper))
        };
        let cdf = |x: f64| d.cdf(x).unwrap_or(0.0);
        let (qa, qb) = (cdf(a), cdf(b));
        let n = self.cfg.nodes.max(2);
        let mut bounds = Vec::with_capacity(n + 3);
        if qa > 0.0 {
            bounds.push(0.0);
        }
        for i in 0..=n {
            bounds.push(qa + (qb - qa) * i as f64 / n as f64);
        }
        if qb < 1.0 {
            bounds.push(1.0);
        }
        let mut cells = Vec::with_capacity(bounds.len());
        for w in bounds.windows(2) {
            if w[1] > w[0] {
                cells.push(self.eval_cell(pending, w[0], w[1], sites)?);
            }
        }
        for _ in 0..self.cfg.refine_rounds {
            let mut split = vec![false; cells.len()];
            for i in 0..cells.len().saturating_sub(1) {
                if cells[i].signature != cells[i + 1].signature {
                    split[i] = true;
                    split[i + 1] = true;
                }
            }
            if !split.iter().any(|s| *s) {
                break;
            }
            let mut next = Vec::with_capacity(cells.len() + 8);
            for (cell, s) in cells.into_iter().zip(split) {
                let mid = 0.5 * (cell.lo + cell.hi);
                if s && mid > cell.lo && mid < cell.hi {
                    next.push(self.eval_cell(pending, cell.lo, mid, sites)?);
                    next.push(self.eval_cell(pending, mid, cell.hi, sites)?);
                } else {
                    next.push(cell);
                }
            }
            cells = next;
        }
        Ok(cells)
    }
}

impl Quadrature {
    pub fn new(cfg: QuadConfig) -> Quadrature {
        Quadrature { cfg, memo: Memo::default() }
    }

    fn measure_at(&self, m: &Machine<'_>, c: &Config, radius: f64) -> Result<(WeightedMeasure, bool)> {
        let mut run = QuadRun { m, cfg: &self.cfg, radius, saw_continuous: false };
        let mut outcomes = Vec::new();
        run.explore(c.clone(), 1.0, 1.0, 0, &mut outcomes)?;
        let entries = outcomes.into_iter().map(|o| (o.prob, o.weight, o.value)).collect();
        Ok((WeightedMeasure::new(entries, c.ty.clone()), run.saw_continuous))
    }

    fn run(&self, m: &Machine<'_>, c: Config) -> Result<NormResult> {
        let (first, continuous) = self.measure_at(m, &c, self.cfg.radius)?;
        if !continuous {
            return Ok(iota(&first));
        }
        let mut prev = first;
        for k in 1..=self.cfg.doublings.max(1) {
            let (next, _) = self.measure_at(m, &c, self.cfg.radius * 2f64.powi(k as i32))?;
            let (z0, z1) = (prev.evidence(), next.evidence());
            if !z1.is_finite() {
                return Ok(NormResult::InfiniteEvidence);
            }
            if k == self.cfg.doublings.max(1) && z1 > 0.0 && (z1 - z0).abs() > self.cfg.tolerance * z0 {
                return Ok(NormResult::InfiniteEvidence);
            }
            prev = next;
        }
        Ok(iota(&prev))
    }
}

impl Normalizer for Quadrature {
    fn normalize(&self, m: &Machine<'_>, c: Config) -> Result<NormResult> {
        let key = config_key(m, &c)?;
        self.memo.get_or(key, || self.run(m, c))
    }
}

pub fn normalize_quadrature(t: &Term, cfg: &QuadConfig) -> Result<NormResult> {
    let q = Quadrature::new(cfg.clone());
    let m = Machine::new(&q);
    q.normalize(&m, Config::closed(t.clone())?)
}

// ---- Monte Carlo ----

#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { trials: 100_000, seed: 0 }
    }
}

/// The random stream of trace `index` under `seed`.
pub fn trace_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One weighted trace.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub weight: f64,
    pub value: GroundPoint,
    pub steps: u64,
}

/// Runs `trials` independent traces in parallel; the result is in trace
/// order and does not depend on the number of workers.
pub fn run_traces(m: &Machine<'_>, c: &Config, trials: usize, seed: u64) -> Result<Vec<Trace>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trace_rng(seed, i as u64);
            let r = m.eval_prob_sample(c.clone(), &mut rng)?;
            Ok(Trace { weight: r.weight, value: r.value.value_point()?, steps: r.steps })
        })
        .collect()
}

/// Estimates with standard errors from a set of weighted traces.
#[derive(Clone, Debug, PartialEq)]
pub struct McReport {
    pub result: NormResult,
    pub evidence: f64,
    pub evidence_se: f64,
    pub trials: usize,
    /// Set when `result` is `ZeroEvidence`: no trace had positive weight,
    /// which does not prove that the evidence is zero.
    pub zero_is_best_effort: bool,
    /// Standard error of each posterior atom's mass.
    pub atom_se: Vec<(GroundPoint, f64)>,
}

impl McReport {
    pub fn from_traces(traces: &[Trace], over: Ty) -> Result<McReport> {
        let n = traces.len().max(1) as f64;
        if let Some(t) = traces.iter().find(|t| !t.weight.is_finite()) {
            return Err(Error::internal(format!("trace weight {} is not finite", t.weight)));
        }
        let total: f64 = traces.iter().map(|t| t.weight).sum();
        let mean = total / n;
        let var = if traces.len() > 1 {
            traces.iter().map(|t| (t.weight - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let evidence_se = (var / n).sqrt();
        if total == 0.0 {
            return Ok(McReport {
                result: NormResult::ZeroEvidence,
                evidence: 0.0,
                evidence_se,
                trials: traces.len(),
                zero_is_best_effort: true,
                atom_se: Vec::new(),
            });
        }
        let posterior = DistValue::empirical(traces.iter().map(|t| (t.weight, t.value.clone())).collect(), over)
            .ok_or_else(|| Error::internal("empirical posterior with no mass"))?;
        let sum_sq: f64 = traces.iter().map(|t| t.weight * t.weight).sum();
        let mut order: Vec<&Trace> = traces.iter().filter(|t| t.weight > 0.0).collect();
        order.sort_by(|a, b| a.value.canonical_cmp(&b.value));
        let mut atom_se = Vec::new();
        for group in order.chunk_by(|a, b| a.value == b.value) {
            let mass: f64 = group.iter().map(|t| t.weight).sum();
            let sq_in: f64 = group.iter().map(|t| t.weight * t.weight).sum();
            let p = mass / total;
            let v = (sq_in * (1.0 - p).powi(2) + (sum_sq - sq_in) * p * p) / (total * total);
            atom_se.push((group[0].value.clone(), v.sqrt()));
        }
        Ok(McReport {
            result: NormResult::Success { evidence: mean, posterior: Arc::new(posterior) },
            evidence: mean,
            evidence_se,
            trials: traces.len(),
            zero_is_best_effort: false,
            atom_se,
        })
    }

    pub fn to_json(&self) -> Json {
        let mut j = self.result.to_json();
        j["stderr"] = json_real(self.evidence_se);
        j["trials"] = json!(self.trials);
        if !self.atom_se.is_empty() {
            j["atom_stderr"] = self.atom_se.iter().map(|(p, se)| json!([p.render(), json_real(*se)])).collect();
        }
        if self.zero_is_best_effort {
            j["best_effort"] = json!(true);
            j["evidence"] = json!(0.0);
        }
        j
    }
}

/// `ν` by importance sampling from the prior. A nested `norm` draws from a
/// stream derived from the configuration, so the same configuration always
/// normalizes to the same result.
pub struct MonteCarlo {
    pub cfg: McConfig,
    memo: Memo,
}

impl MonteCarlo {
    pub fn new(cfg: McConfig) -> MonteCarlo {
        MonteCarlo { cfg, memo: Memo::default() }
    }
}

impl Normalizer for MonteCarlo {
    fn normalize(&self, m: &Machine<'_>, c: Config) -> Result<NormResult> {
        let key = config_key(m, &c)?;
        let seed = self.cfg.seed ^ hash_str(&key);
        self.memo.get_or(key, || {
            let traces = run_traces(m, &c, self.cfg.trials, seed)?;
            Ok(McReport::from_traces(&traces, c.ty.clone())?.result)
        })
    }
}

pub fn normalize_mc(t: &Term, cfg: &McConfig) -> Result<McReport> {
    let mc = MonteCarlo::new(cfg.clone());
    let m = Machine::new(&mc);
    let c = Config::closed(t.clone())?;
    let traces = run_traces(&m, &c, cfg.trials, cfg.seed)?;
    McReport::from_traces(&traces, c.ty)
}

/// Weighted mean of `f` with its delta-method standard error.
pub fn weighted_expectation(traces: &[Trace], mut f: impl FnMut(&GroundPoint) -> Result<f64>) -> Result<(f64, f64)> {
    let total: f64 = traces.iter().map(|t| t.weight).sum();
    if total == 0.0 {
        return Ok((0.0, 0.0));
    }
    let vals = traces.iter().map(|t| f(&t.value)).collect::<Result<Vec<f64>>>()?;
    let mean = traces.iter().zip(&vals).map(|(t, v)| t.weight * v).sum::<f64>() / total;
    let var = traces.iter().zip(&vals).map(|(t, v)| (t.weight * (v - mean)).powi(2)).sum::<f64>() / (total * total);
    Ok((mean, var.sqrt()))
}

/// Mean weight and its standard error.
pub fn evidence_estimate(traces: &[Trace]) -> (f64, f64) {
    let n = traces.len().max(1) as f64;
    let mean = traces.iter().map(|t| t.weight).sum::<f64>() / n;
    let var =
        if traces.len() > 1 { traces.iter().map(|t| (t.weight - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// Posterior atoms compared with tolerance.
pub fn posteriors_approx_eq(a: &DistValue, b: &DistValue, tol: f64) -> bool {
    match (a.enumerate(), b.enumerate()) {
        (Some(x), Some(y)) => atoms_approx_eq(&x, &y, tol),
        _ => a.approx_eq(b, tol),
    }
}
