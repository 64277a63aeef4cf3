//! Acceptance suite: one pass/fail line per criterion. Exits non-zero if any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value as Json;

use sfpc_core::dist::{decompose, ordered_patterns, reconstruct};
use sfpc_core::eqcheck::{check, conservativity_cases, CheckConfig};
use sfpc_core::inference::{denote_prob, run_traces, Exact, QuadConfig, Quadrature, WeightedMeasure};
use sfpc_core::lang::{alpha_eq, Term, Ty};
use sfpc_core::opsem::{CanonicalEnv, Config, Machine, Mode, Normalizer};
use sfpc_core::parser::{parse, pretty};
use sfpc_core::typecheck::{infer, TyCtx};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

fn corpus(dir: &str) -> Vec<(String, PathBuf)> {
    let mut out: Vec<_> = fs::read_dir(programs().join(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "sfpc"))
        .map(|p| (format!("{dir}/{}", p.file_name().unwrap().to_string_lossy()), p))
        .collect();
    out.sort();
    out
}

fn load(p: &Path) -> Term {
    parse(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Runs the CLI and returns exit code and stdout lines parsed as JSON.
fn sfpc(args: &[&str]) -> (i32, Vec<Json>) {
    let out = Command::new(env!("CARGO_BIN_EXE_sfpc")).args(args).output().expect("spawn sfpc");
    let lines = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("bad JSON line {l:?}: {e}")))
        .collect();
    (out.status.code().unwrap_or(-1), lines)
}

fn atom(j: &Json, key: &str, label: &str) -> Option<f64> {
    j[key].as_array()?.iter().find(|a| a[0] == label)?[1].as_f64()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, format!("took {:.2}s, limit {limit}s", elapsed.as_secs_f64()))
}

fn bern_exp_path() -> String {
    programs().join("discrete/bern_exp.sfpc").display().to_string()
}

fn c1_exact_posterior() -> Outcome {
    let start = Instant::now();
    let (code, out) = sfpc(&["norm", &bern_exp_path(), "--backend", "exact"]);
    within(start.elapsed(), 1.0)?;
    ensure(code == 0 && out.len() == 1, format!("exit {code}"))?;
    let j = &out[0];
    let z = j["evidence"].as_f64().ok_or("no evidence")?;
    let t = atom(&j["posterior"], "atoms", "true").ok_or("no true atom")?;
    let f = atom(&j["posterior"], "atoms", "false").ok_or("no false atom")?;
    ensure(j["tag"] == 0, "tag is not 0")?;
    ensure((z - 2.75).abs() <= 1e-12, format!("evidence {z}"))?;
    ensure((t - 5.0 / 11.0).abs() <= 1e-12 && (f - 6.0 / 11.0).abs() <= 1e-12, format!("posterior {t}/{f}"))?;
    Ok(format!("evidence {z}, P(true) {t:.12}"))
}

fn c2_gaussian_conditioning() -> Outcome {
    let path = programs().join("continuous/gauss_cond.sfpc").display().to_string();
    let start = Instant::now();
    let args = ["norm", &path, "--backend", "quad", "--nodes", "512", "--radius", "8", "--doublings", "3"];
    let (code, out) = sfpc(&args);
    within(start.elapsed(), 5.0)?;
    ensure(code == 0 && out.len() == 1, format!("exit {code}"))?;
    let j = &out[0];
    // Marginal likelihood of the observation 5.0 under x ~ N(0, 3), y ~ N(x, 1).
    let oracle = (-25.0f64 / 20.0).exp() / (2.0 * std::f64::consts::PI * 10.0).sqrt();
    let z = j["evidence"].as_f64().ok_or("no evidence")?;
    let t = atom(&j["posterior"], "atoms", "true").ok_or("no true atom")?;
    ensure(j["tag"] == 0, "tag is not 0")?;
    ensure((z - oracle).abs() <= 1e-4, format!("evidence {z}, expected {oracle}"))?;
    ensure((t - 0.5).abs() <= 1e-3, format!("P(true) {t}"))?;
    Ok(format!("evidence {z:.6} (closed form {oracle:.6}), P(true) {t:.6}"))
}

fn c3_infinite_evidence() -> Outcome {
    let path = programs().join("continuous/exp_infinite.sfpc").display().to_string();
    let start = Instant::now();
    let (code, out) = sfpc(&["norm", &path, "--backend", "quad"]);
    within(start.elapsed(), 5.0)?;
    ensure(code == 0 && out.len() == 1, format!("exit {code}"))?;
    ensure(out[0]["tag"] == 2, format!("got {}", out[0]))?;
    Ok("tag 2".into())
}

fn c4_monte_carlo() -> Outcome {
    let start = Instant::now();
    let (code, out) = sfpc(&["norm", &bern_exp_path(), "--backend", "mc", "--trials", "100000", "--seed", "0"]);
    within(start.elapsed(), 10.0)?;
    ensure(code == 0 && out.len() == 1, format!("exit {code}"))?;
    let j = &out[0];
    let z = j["evidence"].as_f64().ok_or("no evidence")?;
    let se = j["stderr"].as_f64().ok_or("no stderr")?;
    ensure(se < 0.02, format!("evidence SE {se}"))?;
    ensure((z - 2.75).abs() <= 4.0 * se, format!("evidence {z} ± {se}"))?;
    for (label, exact) in [("true", 5.0 / 11.0), ("false", 6.0 / 11.0)] {
        let p = atom(&j["posterior"], "atoms", label).ok_or("missing atom")?;
        let pse = atom(j, "atom_stderr", label).ok_or("missing atom SE")?;
        ensure((p - exact).abs() <= 4.0 * pse, format!("P({label}) {p} ± {pse}"))?;
    }
    Ok(format!("evidence {z:.5} ± {se:.5}"))
}

fn c5_soundness() -> Outcome {
    let discrete = corpus("discrete");
    ensure(discrete.len() >= 20, format!("only {} discrete programs", discrete.len()))?;
    let (mut nested, mut higher_order) = (0, 0);
    for (name, path) in &discrete {
        let t = load(path);
        let src = t.to_string();
        nested += src.contains("norm") as usize;
        higher_order += (src.contains('\\') || src.contains("thunk")) as usize;
        let m = Machine::new(&Exact);
        let op = WeightedMeasure::from_config(&m, Config::closed(t.clone()).map_err(|e| e.to_string())?)
            .map_err(|e| format!("{name}: {e}"))?;
        let den = denote_prob(&t, &CanonicalEnv::new()).map_err(|e| format!("{name}: {e}"))?;
        ensure(op.approx_eq(&den, 1e-12), format!("{name}: {op:?} vs {den:?}"))?;
    }
    ensure(nested >= 3 && higher_order >= 3, format!("{nested} nested, {higher_order} higher-order"))?;
    Ok(format!("{} programs ({nested} nested, {higher_order} higher-order)", discrete.len()))
}

fn c6_equation_corpus() -> Outcome {
    let start = Instant::now();
    let (code, out) = sfpc(&["eqcheck", "--trials", "100000", "--k", "4"]);
    let failed: Vec<&Json> = out.iter().filter(|v| v["verdict"] != "PASS").collect();
    ensure(out.len() >= 12, format!("only {} cases", out.len()))?;
    ensure(code == 0 && failed.is_empty(), format!("failing: {failed:?}"))?;
    let (scode, sout) = sfpc(&["eqcheck", "--case", "sentinel-bern-0.5-vs-0.6"]);
    ensure(scode == 1 && sout.len() == 1 && sout[0]["verdict"] == "FAIL", "sentinel was not rejected")?;
    within(start.elapsed(), 60.0)?;
    Ok(format!("{} cases PASS, sentinel FAIL, {:.1}s", out.len(), start.elapsed().as_secs_f64()))
}

fn c7_termination() -> Outcome {
    let quad = Quadrature::new(QuadConfig::default());
    let mut count = 0;
    for (name, path) in corpus("discrete").into_iter().chain(corpus("continuous")) {
        let nu: &dyn Normalizer = if name.starts_with("discrete") { &Exact } else { &quad };
        let m = Machine::new(nu);
        let c = Config::closed(load(&path)).map_err(|e| format!("{name}: {e}"))?;
        match c.mode {
            Mode::Prob => {
                let traces = run_traces(&m, &c, 1_000, 0).map_err(|e| format!("{name}: {e}"))?;
                ensure(traces.iter().all(|t| t.value.has_type(&c.ty)), format!("{name}: ill-typed value"))?;
            }
            Mode::Det => {
                let (v, _) = m.eval_det(c.clone()).map_err(|e| format!("{name}: {e}"))?;
                ensure(v.value_point().is_ok_and(|p| p.has_type(&c.ty)), format!("{name}: not a value"))?;
            }
        }
        count += 1;
    }
    Ok(format!("{count} programs x 1000 seeded runs"))
}

fn c8_conservativity() -> Outcome {
    let cfg = CheckConfig::default();
    let cases = conservativity_cases();
    ensure(cases.len() == 3, format!("{} cases", cases.len()))?;
    for case in &cases {
        let v = check(case, &cfg).map_err(|e| format!("{}: {e}", case.name))?;
        ensure(v.pass, v.to_json().to_string())?;
    }
    Ok(cases.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", "))
}

fn c9_structural() -> Outcome {
    const N: u64 = 10_000;
    for seed in 0..N {
        let mut r = common::rng(seed);
        let t = common::ty(&mut r, 3);
        let p = common::point(&mut r, &t);
        let d = decompose(&p, &t).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(ordered_patterns(&t).contains(&d.pattern), format!("seed {seed}: unknown pattern"))?;
        ensure(reconstruct(&d.pattern, &d.slots) == p, format!("seed {seed}: round trip"))?;
    }
    for seed in 0..N {
        let mut r = common::rng(seed);
        let mut g = common::TermGen::new(&mut r);
        let ty = if g.rng.random_bool(0.5) { Ty::Real } else { Ty::bool() };
        let prob = g.rng.random_bool(0.7);
        g.continuous = false;
        let term = if prob { g.prob(&ty, 4) } else { g.det(&ty, 4) };
        let mode = if prob { Mode::Prob } else { Mode::Det };
        ensure(infer(mode, &TyCtx::new(), &term).as_ref() == Ok(&ty), format!("seed {seed}: generator"))?;
        let m = Machine::new(&Exact);
        let mut c = Config::closed(term).map_err(|e| e.to_string())?;
        let mut steps = 0;
        while !c.is_terminal() {
            ensure(steps < 500, format!("seed {seed}: no value after 500 steps"))?;
            c = if prob {
                m.step_prob_sample(c, &mut common::rng(seed ^ steps)).map_err(|e| e.to_string())?.next
            } else {
                m.step_det(c).map_err(|e| e.to_string())?
            };
            ensure(c.recheck().is_ok_and(|t| t == ty), format!("seed {seed}: type changed at step {steps}"))?;
            steps += 1;
        }
    }
    let mut files = 0;
    for dir in ["discrete", "continuous", "invalid"] {
        for (name, path) in corpus(dir) {
            let Ok(t) = parse(&fs::read_to_string(&path).unwrap()) else { continue };
            let back = parse(&pretty(&t)).map_err(|e| format!("{name}: {e}"))?;
            ensure(alpha_eq(&t, &back), format!("{name}: pretty/parse changed the term"))?;
            files += 1;
        }
    }
    Ok(format!("{N} round trips, {N} step traces, {files} corpus files re-parsed"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("exact posterior", c1_exact_posterior),
        ("gaussian conditioning", c2_gaussian_conditioning),
        ("infinite evidence", c3_infinite_evidence),
        ("monte carlo consistency", c4_monte_carlo),
        ("soundness against oracle", c5_soundness),
        ("equation corpus", c6_equation_corpus),
        ("termination", c7_termination),
        ("conservativity", c8_conservativity),
        ("structural properties", c9_structural),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {}: PASS {name} ({secs:.2}s): {msg}", i + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {}: FAIL {name} ({secs:.2}s): {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
