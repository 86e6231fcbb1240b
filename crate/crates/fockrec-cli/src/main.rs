//! `fockrec`: check, unfold, solve and simulate recursive quantum programs.
//!
//! Exit codes: 0 success, 1 invalid input (syntax, well-formedness or
//! command line), 2 comparison failure, 3 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fockrec::fock::compare;
use fockrec::lang::validate;
use fockrec::oracles::{self, LoopOrder, SimInit, Simulator, WalkGates};
use fockrec::scalar::Amp;
use fockrec::semantics::{CallShift, CapSpec, Engine, SemanticsConfig, SemanticsError, SkipConvention};
use fockrec::states::{principal_labels, principal_semantics, CoinInit, Route};
use fockrec::symmetry::{symmetrise_operator, Statistics, DEFAULT_FACTORIAL_CAP};
use fockrec::SourceModule;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "fockrec", version, about = "Second-quantised semantics of recursive quantum programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a program file.
    Check { file: PathBuf },
    /// Print a syntactic approximation and dump its semantics.
    Approx {
        file: PathBuf,
        #[arg(long = "proc")]
        procedure: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sem: SemArgs,
    },
    /// Solve the declaration by Kleene iteration.
    Fixpoint {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report_iterations: bool,
        /// Also compare against the syntactic-approximation semantics (exit 2 on mismatch).
        #[arg(long)]
        check_equivalence: bool,
        #[command(flatten)]
        sem: SemArgs,
    },
    /// Principal-system output distribution for an initial coin state.
    Run {
        file: PathBuf,
        /// `vacuum`, `basis:L,L,L` or `coherent:L@12`; a coin may be named as in `basis:e=L,R`.
        #[arg(long, default_value = "vacuum")]
        coin_init: String,
        /// Principal basis label (comma-separated for several systems).
        #[arg(long, default_value = "0")]
        input: String,
        #[arg(long, value_enum, default_value_t = StatArg::Boson)]
        statistics: StatArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
        route: RouteArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sem: SemArgs,
    },
    /// Compare the engine with a closed-form oracle (exit 2 on mismatch).
    Oracle {
        file: PathBuf,
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = OrderArg::Paper)]
        order: OrderArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Configuration-rewriting trace.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        /// `vacuum` or `basis:L,R` (leading copies of the first coin, or `basis:e=L`).
        #[arg(long, default_value = "vacuum")]
        coin_init: String,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SemArgs {
    /// Per-coin caps as `d=8,e=4`, or one number for every coin.
    #[arg(long)]
    trunc: Option<String>,
    /// Bound on the total occupation.
    #[arg(long)]
    total: Option<usize>,
    #[arg(long, value_enum, default_value_t = SkipArg::Paper)]
    skip: SkipArg,
    #[arg(long, value_enum, default_value_t = ShiftArg::Frame)]
    call_shift: ShiftArg,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SkipArg {
    Paper,
    FullIdentity,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShiftArg {
    Frame,
    CreationFunctional,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum StatArg {
    Boson,
    Fermion,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Explicit,
    Vector,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Family {
    Unidirectional,
    Bidirectional,
    Symmetric,
    Loop,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Paper,
    Interleaved,
}

/// An error carrying its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn invalid(err: impl Into<anyhow::Error>) -> Self {
        Failure { code: 1, err: err.into() }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let err = e.into();
        let code = match err.downcast_ref::<SemanticsError>() {
            Some(SemanticsError::Invalid(_)) => 1,
            _ => 3,
        };
        Failure { code, err }
    }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Check { file } => check(&file),
        Command::Approx { file, procedure, depth, out, sem } => approx(&file, &procedure, depth, out.as_deref(), &sem),
        Command::Fixpoint { file, out, report_iterations, check_equivalence, sem } => {
            fixpoint(&file, out.as_deref(), report_iterations, check_equivalence, &sem)
        }
        Command::Run { file, coin_init, input, statistics, format, route, out, sem } => {
            run(&file, &coin_init, &input, statistics, format, route, out.as_deref(), &sem)
        }
        Command::Oracle { file, family, depth, tol, order, out } => oracle(&file, family, depth, tol, order, out.as_deref()),
        Command::Simulate { file, depth, coin_init, input, out } => simulate(&file, depth, &coin_init, input.as_deref(), out.as_deref()),
    }
}

fn load(path: &Path) -> Result<SourceModule, Failure> {
    let src = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::invalid)?;
    fockrec::parse(&src).map_err(|e| Failure::invalid(anyhow!("{}:{}", path.display(), e)))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serialisable")
}

fn parse_caps(sem: &SemArgs, module: &SourceModule, min: usize) -> Result<CapSpec, Failure> {
    let mut caps = CapSpec::default();
    if let Some(t) = &sem.trunc {
        if let Ok(n) = t.trim().parse::<usize>() {
            caps.default = n;
        } else {
            for part in t.split(',') {
                let (coin, n) = part.split_once('=').ok_or_else(|| Failure::invalid(anyhow!("bad --trunc entry `{part}`")))?;
                let coin = coin.trim();
                if module.spaces.coin(coin).is_none() {
                    return Err(Failure::invalid(anyhow!("--trunc names unknown coin `{coin}`")));
                }
                let n = n.trim().parse().map_err(|_| Failure::invalid(anyhow!("bad --trunc cap `{n}`")))?;
                caps.per_coin.insert(coin.to_string(), n);
            }
        }
    }
    caps.default = caps.default.max(min);
    for v in caps.per_coin.values_mut() {
        *v = (*v).max(min);
    }
    caps.total = sem.total;
    Ok(caps)
}

fn config(sem: &SemArgs, caps: CapSpec) -> SemanticsConfig {
    SemanticsConfig {
        caps,
        skip: match sem.skip {
            SkipArg::Paper => SkipConvention::Paper,
            SkipArg::FullIdentity => SkipConvention::FullIdentity,
        },
        call_shift: match sem.call_shift {
            ShiftArg::Frame => CallShift::Frame,
            ShiftArg::CreationFunctional => CallShift::CreationFunctional,
        },
        tol: sem.tol,
    }
}

fn check(file: &Path) -> CliResult {
    let m = load(file)?;
    let report = validate(&m.decl, &m.gates, &m.spaces);
    if report.is_ok() {
        println!("ok: {} procedure(s), {} gate(s)", m.decl.equations.len(), m.gates.iter().count());
        Ok(0)
    } else {
        for v in &report.violations {
            let at = m.locations.get(&v.scope).map(|p| format!("{}:{}: ", p.line, p.col)).unwrap_or_default();
            eprintln!("{at}{v}");
        }
        Ok(1)
    }
}

fn approx(file: &Path, procedure: &str, depth: usize, out: Option<&Path>, sem: &SemArgs) -> CliResult {
    let m = load(file)?;
    let e = Engine::<f64>::new(&m, config(sem, parse_caps(sem, &m, 0)?))?;
    let q = e.syntactic_approx(procedure, depth)?;
    let sem_op = e.interpret_generalised(&q)?;
    let doc = json!({"procedure": procedure, "depth": depth, "program": q.to_string(), "blocks": sem_op.to_json()});
    match out {
        Some(p) => {
            emit(Some(p), &pretty(&doc))?;
            println!("{q}");
        }
        None => emit(None, &pretty(&doc))?,
    }
    Ok(0)
}

fn fixpoint(file: &Path, out: Option<&Path>, report_iterations: bool, check_eq: bool, sem: &SemArgs) -> CliResult {
    let m = load(file)?;
    let e = Engine::<f64>::new(&m, config(sem, parse_caps(sem, &m, 0)?))?;
    let fix = e.kleene_fixpoint()?;
    let main = e.denotational_main(&fix)?;
    let procs: serde_json::Map<String, Value> =
        e.decl().equations.keys().zip(&fix.env).map(|(k, op)| (k.clone(), op.to_json())).collect();
    let mut doc = json!({
        "coins": e.space().coins().iter().map(|c| json!({"name": c.name, "cap": e.space().trunc().caps[e.space().coin_index(&c.name).unwrap()]})).collect::<Vec<_>>(),
        "iterations": fix.iterations,
        "converged": fix.converged,
        "procedures": procs,
        "main": main.to_json(),
    });
    let mut code = 0;
    if check_eq {
        let r = e.check_equivalence()?;
        doc["equivalence"] = r.to_json(e.space());
        println!("equivalence: max diff {:.3e} ({})", r.max_diff(), if r.pass { "pass" } else { "FAIL" });
        if !r.pass {
            code = 2;
        }
    }
    if report_iterations {
        println!("iterations: {}{}", fix.iterations, if fix.converged { "" } else { " (cap reached)" });
    }
    emit(out, &pretty(&doc))?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn run(file: &Path, coin_init: &str, input: &str, stat: StatArg, format: Format, route: RouteArg, out: Option<&Path>, sem: &SemArgs) -> CliResult {
    let m = load(file)?;
    let init = CoinInit::parse(coin_init).map_err(Failure::invalid)?;
    let e = Engine::<f64>::new(&m, config(sem, parse_caps(sem, &m, init.max_occupation())?))?;
    let space = e.space();
    let stats = vec![if stat == StatArg::Boson { Statistics::Boson } else { Statistics::Fermion }; space.coins().len()];
    let (state, tail) = init.build::<f64>(space, stats).map_err(Failure::invalid)?;
    let labels = principal_labels(space);
    let idx = labels.iter().position(|l| l == input).ok_or_else(|| Failure::invalid(anyhow!("unknown principal label `{input}`")))?;
    let mut psi = vec![Amp::new(0.0, 0.0); labels.len()];
    psi[idx] = Amp::new(1.0, 0.0);
    let route = match route {
        RouteArg::Auto => Route::Auto,
        RouteArg::Explicit => Route::Explicit,
        RouteArg::Vector => Route::Vector,
    };
    let r = principal_semantics(&e, &state, &psi, route)?;
    let text = match format {
        Format::Csv => r.rho.to_csv(),
        Format::Json => {
            let mut v = r.rho.to_json();
            if !matches!(init, CoinInit::Vacuum | CoinInit::Basis { .. }) {
                v["tail"] = json!(tail);
            }
            pretty(&v)
        }
    };
    if format == Format::Csv && out.is_none() {
        print!("{text}");
    } else {
        emit(out, &text)?;
    }
    if out.is_some() {
        println!("trace {:.12}", r.rho.trace());
    }
    Ok(0)
}

fn oracle(file: &Path, family: Family, depth: usize, tol: f64, order: OrderArg, out: Option<&Path>) -> CliResult {
    let m = load(file)?;
    let skip = if family == Family::Loop || m.gates.get("W").is_some() { SkipConvention::FullIdentity } else { SkipConvention::Paper };
    let cfg = SemanticsConfig { caps: CapSpec::uniform(depth), skip, tol, ..Default::default() };
    let e = Engine::<f64>::new(&m, cfg)?;
    let space = e.space();
    let fix = e.kleene_fixpoint()?;
    let order = match order {
        OrderArg::Paper => LoopOrder::Paper,
        OrderArg::Interleaved => LoopOrder::Interleaved,
    };
    let mut pairs = Vec::new();
    let proc_names: Vec<String> = e.decl().equations.keys().cloned().collect();
    match family {
        Family::Unidirectional => {
            let g = WalkGates::from_module(&m)?;
            for n in 0..=depth {
                let sem = e.interpret_generalised(&e.syntactic_approx(&proc_names[0], n)?)?;
                pairs.push((format!("{}^({n})", proc_names[0]), sem, oracles::unidirectional_closed_form(space, &g, n)?));
            }
            pairs.push((proc_names[0].clone(), fix.env[0].clone(), oracles::unidirectional_closed_form(space, &g, depth)?));
        }
        Family::Bidirectional => {
            let g = WalkGates::from_module(&m)?;
            let (x, y) = oracles::bidirectional_closed_form(space, &g)?;
            if fix.env.len() != 2 {
                return Err(Failure::invalid(anyhow!("bidirectional family needs two procedures")));
            }
            pairs.push((proc_names[0].clone(), fix.env[0].clone(), x));
            pairs.push((proc_names[1].clone(), fix.env[1].clone(), y));
        }
        Family::Loop => {
            let (w, u) = oracles::loop_gates(&m)?;
            pairs.push((proc_names[0].clone(), fix.env[0].clone(), oracles::loop_closed_form(space, &w, &u, order)?));
        }
        Family::Symmetric => {
            let cap = DEFAULT_FACTORIAL_CAP;
            if m.gates.get("W").is_some() {
                let (w, u) = oracles::loop_gates(&m)?;
                let s = symmetrise_operator(&fix.env[0], cap)?;
                pairs.push((proc_names[0].clone(), s, oracles::loop_symmetric_closed_form(space, &w, &u, order)?));
            } else {
                let g = WalkGates::from_module(&m)?;
                if fix.env.len() == 2 {
                    let (x, y) = oracles::symmetrised_bidirectional(space, &g)?;
                    pairs.push((proc_names[0].clone(), symmetrise_operator(&fix.env[0], cap)?, x));
                    pairs.push((proc_names[1].clone(), symmetrise_operator(&fix.env[1], cap)?, y));
                } else {
                    pairs.push((proc_names[0].clone(), symmetrise_operator(&fix.env[0], cap)?, oracles::symmetrised_unidirectional(space, &g)?));
                }
            }
        }
    }
    let mut pass = true;
    let mut max = 0.0f64;
    let mut reports = Vec::new();
    for (name, engine_side, oracle_side) in &pairs {
        let r = compare(engine_side, oracle_side, tol)?;
        pass &= r.pass;
        max = max.max(r.max_diff);
        reports.push(json!({"name": name, "report": r.to_json(space)}));
    }
    let doc = json!({"family": format!("{:?}", family_name(family)), "pass": pass, "max_diff": max, "tol": tol, "comparisons": reports});
    if out.is_some() {
        emit(out, &pretty(&doc))?;
    }
    println!("{}: max diff {:.3e} ({})", family_name(family), max, if pass { "pass" } else { "FAIL" });
    Ok(if pass { 0 } else { 2 })
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Unidirectional => "unidirectional",
        Family::Bidirectional => "bidirectional",
        Family::Symmetric => "symmetric",
        Family::Loop => "loop",
    }
}

fn simulate(file: &Path, depth: usize, coin_init: &str, input: Option<&str>, out: Option<&Path>) -> CliResult {
    let m = load(file)?;
    let report = validate(&m.decl, &m.gates, &m.spaces);
    if !report.is_ok() {
        return Err(SemanticsError::Invalid(report).into());
    }
    let sim = Simulator::<f64>::new(&m)?;
    let mut init = SimInit::default();
    match CoinInit::parse(coin_init).map_err(Failure::invalid)? {
        CoinInit::Vacuum => {}
        CoinInit::Basis { coin, labels } => {
            let coin = match coin {
                Some(c) => c,
                None => m.spaces.coins().find(|c| m.decl.all_coins().contains(&c.name)).map(|c| c.name.clone()).ok_or_else(|| Failure::invalid(anyhow!("program uses no coins")))?,
            };
            init.coins.push((coin, labels));
        }
        CoinInit::Coherent { .. } => return Err(Failure::invalid(anyhow!("the simulator takes basis initialisations only"))),
    }
    if let Some(label) = input {
        let systems: Vec<String> = m.spaces.systems().map(|s| s.name.clone()).collect();
        for (s, l) in systems.iter().zip(label.split(',')) {
            init.principal.push((s.clone(), l.trim().to_string()));
        }
    }
    let steps = sim.run(&init, depth).map_err(Failure::invalid)?;
    emit(out, &pretty(&sim.trace_json(&steps)))?;
    if out.is_some() {
        let last = steps.last().expect("step 0 present");
        let done = last.iter().filter(|c| c.is_terminated()).count();
        println!("{} configuration(s) after {depth} step(s), {done} terminated, weight {:.12}", last.len(), Simulator::weight(last));
    }
    Ok(0)
}
