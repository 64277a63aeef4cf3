use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use sfpc_core::dist::json_real;
use sfpc_core::eqcheck::{builtin_corpus, check_all, sentinel_case, CheckConfig};
use sfpc_core::inference::{
    run_traces, Exact, McConfig, McReport, MonteCarlo, QuadConfig, Quadrature, WeightedMeasure,
};
use sfpc_core::lang::Term;
use sfpc_core::opsem::{Config, Machine, Mode, Normalizer};
use sfpc_core::parser::{parse, pretty, pretty_ty};
use sfpc_core::typecheck::check_program;
use sfpc_core::Error;

#[derive(Parser)]
#[command(name = "sfpc", version, about = "Typecheck, run and normalize probabilistic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and typecheck a program.
    Check {
        /// Source file, or `-` for stdin.
        file: PathBuf,
    },
    /// Sample independent traces (or evaluate a deterministic program).
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Normalize a program into evidence and posterior.
    Norm {
        file: PathBuf,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// List every (probability, score, value) outcome of a discrete program.
    Enumerate { file: PathBuf },
    /// Check the builtin equation corpus.
    Eqcheck {
        /// Run a single case by name.
        #[arg(long)]
        case: Option<String>,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, env = "SFPC_SEED", default_value_t = 0)]
        seed: u64,
        /// Pass threshold in pooled standard errors.
        #[arg(long, default_value_t = 4.0)]
        k: f64,
    },
}

#[derive(Args)]
struct BackendArgs {
    /// Normalizer for `norm` (and for nested `norm` under `run`).
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    #[arg(long, env = "SFPC_SEED", default_value_t = 0)]
    seed: u64,
    /// Quadrature cells per continuous sample site.
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u64).range(2..))]
    nodes: u64,
    /// Initial truncation radius in prior standard deviations.
    #[arg(long, default_value_t = 8.0)]
    radius: f64,
    /// Radius doublings for the divergence test.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    doublings: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Quad,
    Mc,
}

impl BackendArgs {
    fn quad(&self) -> QuadConfig {
        QuadConfig {
            nodes: self.nodes as usize,
            radius: self.radius,
            doublings: self.doublings,
            ..QuadConfig::default()
        }
    }

    fn normalizer(&self, trials: usize) -> Box<dyn Normalizer> {
        match self.backend {
            Backend::Exact => Box::new(Exact),
            Backend::Quad => Box::new(Quadrature::new(self.quad())),
            Backend::Mc => Box::new(MonteCarlo::new(McConfig { trials, seed: self.seed })),
        }
    }
}

enum Failure {
    /// A diagnostic for stderr and the exit code.
    Report(Json, u8),
    /// Output already written; exit with this code.
    Exit(u8),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Report(e.to_json(), 1)
    }
}

struct Out {
    pretty: bool,
    stdout: io::StdoutLock<'static>,
}

impl Out {
    fn emit(&mut self, j: &Json) {
        let s = if self.pretty { serde_json::to_string_pretty(j) } else { serde_json::to_string(j) }.expect("json");
        // A closed pipe is not worth a panic.
        let _ = writeln!(self.stdout, "{s}");
    }
}

fn read_program(path: &PathBuf) -> Result<Term, Failure> {
    let src = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Report(json!({"error": "io", "message": e.to_string()}), 2))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| {
            Failure::Report(json!({"error": "io", "path": path.display().to_string(), "message": e.to_string()}), 2)
        })?
    };
    Ok(parse(&src).map_err(Error::from)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", json!({"error": "usage", "message": e.to_string().trim_end()}));
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("{}", json!({"error": "usage", "message": "--jobs must be at least 1"}));
            return ExitCode::from(2);
        }
        // Only fails if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut out = Out { pretty: cli.pretty, stdout: io::stdout().lock() };
    match dispatch(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Exit(code)) => ExitCode::from(code),
        Err(Failure::Report(j, code)) => {
            eprintln!("{j}");
            ExitCode::from(code)
        }
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Det => "det",
        Mode::Prob => "prob",
    }
}

fn dispatch(cmd: Command, out: &mut Out) -> Result<(), Failure> {
    match cmd {
        Command::Check { file } => {
            let t = read_program(&file)?;
            let j = check_program(&t).map_err(Error::from)?;
            out.emit(&json!({"ok": true, "mode": mode_name(j.mode), "type": pretty_ty(&j.ty), "term": pretty(&t)}));
        }
        Command::Run { file, trials, backend } => {
            let t = read_program(&file)?;
            let c = Config::closed(t)?;
            let nu = backend.normalizer(100_000);
            let m = Machine::new(nu.as_ref());
            match c.mode {
                Mode::Det => {
                    let (v, steps) = m.eval_det(c)?;
                    out.emit(&json!({"value": v.value_point()?.to_json(), "steps": steps}));
                }
                Mode::Prob => {
                    for (i, tr) in run_traces(&m, &c, trials as usize, backend.seed)?.into_iter().enumerate() {
                        out.emit(&json!({
                            "trace": i,
                            "weight": json_real(tr.weight),
                            "value": tr.value.to_json(),
                            "steps": tr.steps,
                        }));
                    }
                }
            }
        }
        Command::Norm { file, trials, backend } => {
            let t = read_program(&file)?;
            let body = match t {
                Term::Norm(b) => *b,
                t if t.is_prob() => t,
                t => {
                    check_program(&t).map_err(Error::from)?;
                    return Err(Failure::Report(
                        json!({"error": "usage", "message": "norm expects a probabilistic program or norm(...)"}),
                        2,
                    ));
                }
            };
            let c = Config::closed(body)?;
            match backend.backend {
                Backend::Mc => {
                    let nu = backend.normalizer(trials as usize);
                    let m = Machine::new(nu.as_ref());
                    let traces = run_traces(&m, &c, trials as usize, backend.seed)?;
                    out.emit(&McReport::from_traces(&traces, c.ty.clone())?.to_json());
                }
                _ => {
                    let nu = backend.normalizer(trials as usize);
                    let m = Machine::new(nu.as_ref());
                    let r = nu.normalize(&m, c)?;
                    out.emit(&r.to_json());
                }
            }
        }
        Command::Enumerate { file } => {
            let t = read_program(&file)?;
            let c = Config::closed(t)?;
            if c.mode != Mode::Prob {
                return Err(Failure::Report(
                    json!({"error": "usage", "message": "enumerate expects a probabilistic program"}),
                    2,
                ));
            }
            let m = Machine::new(&Exact);
            let wm = WeightedMeasure::from_config(&m, c)?;
            for (p, s, v) in &wm.entries {
                out.emit(&json!({"prob": json_real(*p), "score": json_real(*s), "value": v.to_json()}));
            }
        }
        Command::Eqcheck { case, trials, seed, k } => {
            let mut cases = builtin_corpus();
            if let Some(name) = case {
                cases.push(sentinel_case());
                cases.retain(|c| c.name == name);
                if cases.is_empty() {
                    return Err(Failure::Report(
                        json!({"error": "usage", "message": format!("no case named `{name}`")}),
                        2,
                    ));
                }
            }
            let cfg = CheckConfig { trials: trials as usize, seed, k, ..CheckConfig::default() };
            let verdicts = check_all(&cases, &cfg);
            let mut all = true;
            for (c, v) in cases.iter().zip(verdicts) {
                match v {
                    Ok(v) => {
                        all &= v.pass;
                        out.emit(&v.to_json());
                    }
                    Err(e) => {
                        all = false;
                        let mut j = e.to_json();
                        j["case"] = json!(c.name);
                        j["verdict"] = json!("FAIL");
                        out.emit(&j);
                    }
                }
            }
            if !all {
                return Err(Failure::Exit(1));
            }
        }
    }
    Ok(())
}
