//! Denotational and operational semantics of recursive declarations.
//!
//! All evaluators produce exact-occupation ("graded") operators at their
//! public boundary; internally the semantic functional works on the
//! cumulative encoding, where sequential composition is a blockwise product
//! (see the module docs of [`crate::fock`]).
//!
//! Three evaluators are provided and cross-checked in the tests:
//!
//! * [`Engine::kleene_fixpoint`] iterates the declaration functional, in
//!   which a procedure call inside a branch of `qif [c]` sees the copies of
//!   `c` relative to its frame (the branch's copy 0 is the guard's copy 1).
//! * [`Engine::operational_semantics`] unfolds the declaration syntactically,
//!   renaming coin copies, and interprets the identifier-free approximations
//!   with absolute copy slots.
//! * [`Engine::apply_to_vector`] runs the declaration directly on a sparse
//!   state vector, which scales to truncations where explicit blocks do not.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use indexmap::IndexMap;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::fock::{compare, lub_chain, CompareReport, FockError, FockOperator, FockSpace, OccVec, Truncation};
use crate::lang::{validate, CoinRef, Declaration, LangError, Program, ValidationReport};
use crate::linalg::{Dense, Sparse};
use crate::parser::SourceModule;
use crate::scalar::{Amp, Real};

/// Meaning of `skip` on occupations that lack some coin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SkipConvention {
    /// Identity only where every coin of the declaration has a copy in the
    /// current frame; zero elsewhere.
    #[default]
    Paper,
    /// Identity on every occupation.
    FullIdentity,
}

impl SkipConvention {
    pub fn flipped(self) -> Self {
        match self {
            SkipConvention::Paper => SkipConvention::FullIdentity,
            SkipConvention::FullIdentity => SkipConvention::Paper,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SkipConvention::Paper => "paper",
            SkipConvention::FullIdentity => "full-identity",
        }
    }
}

/// How the declaration functional passes the environment to calls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CallShift {
    /// Calls see the environment unchanged; guarded composition already moves
    /// a branch's copies one slot up.
    #[default]
    Frame,
    /// Additionally apply the creation functional over the declaration's
    /// coins at every call. This shifts copies twice inside a branch and is
    /// kept only to demonstrate that it disagrees with the unfolding.
    CreationFunctional,
}

/// Occupation caps by coin name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapSpec {
    pub default: usize,
    pub per_coin: IndexMap<String, usize>,
    pub total: Option<usize>,
}

impl Default for CapSpec {
    fn default() -> Self {
        CapSpec { default: 8, per_coin: IndexMap::new(), total: None }
    }
}

impl CapSpec {
    pub fn uniform(cap: usize) -> Self {
        CapSpec { default: cap, ..Self::default() }
    }

    pub fn with_total(mut self, total: usize) -> Self {
        self.total = Some(total);
        self
    }

    pub fn cap(&self, coin: &str) -> usize {
        self.per_coin.get(coin).copied().unwrap_or(self.default)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemanticsConfig {
    pub caps: CapSpec,
    pub skip: SkipConvention,
    pub call_shift: CallShift,
    /// Entry tolerance for block comparisons.
    pub tol: f64,
}

impl Default for SemanticsConfig {
    fn default() -> Self {
        SemanticsConfig { caps: CapSpec::default(), skip: SkipConvention::Paper, call_shift: CallShift::Frame, tol: 1e-12 }
    }
}

impl SemanticsConfig {
    pub fn with_caps(mut self, caps: CapSpec) -> Self {
        self.caps = caps;
        self
    }

    pub fn with_skip(mut self, skip: SkipConvention) -> Self {
        self.skip = skip;
        self
    }

    pub fn with_call_shift(mut self, s: CallShift) -> Self {
        self.call_shift = s;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticsError {
    #[error("declaration is not well-formed: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(ValidationReport),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("environment has {got} operators, declaration has {want} procedures")]
    Arity { got: usize, want: usize },
    #[error("unknown procedure `{0}`")]
    UnknownIdentifier(String),
    #[error("program still contains procedure `{0}`")]
    IdentifierPresent(String),
    #[error("qif on copy {copy} of `{coin}` cannot be evaluated relative to a frame")]
    GeneralisedGuard { coin: String, copy: usize },
    #[error("generalised program is ill-formed: {0}")]
    BadGeneralised(String),
}

type SResult<T> = Result<T, SemanticsError>;

/// Resolved declaration, gate matrices and Fock space.
#[derive(Clone, Debug)]
pub struct Engine<T> {
    module: SourceModule,
    space: Arc<FockSpace>,
    cfg: SemanticsConfig,
    gates: HashMap<String, Dense<T>>,
}

/// Result of Kleene iteration.
#[derive(Clone, Debug)]
pub struct Fixpoint<T> {
    /// Exact-occupation semantics of each procedure, in declaration order.
    pub env: Vec<FockOperator<T>>,
    /// The same environment in cumulative encoding.
    pub cumulative: Vec<FockOperator<T>>,
    /// Functional applications performed, including the one that confirmed
    /// stability.
    pub iterations: usize,
    pub converged: bool,
}

/// Result of the syntactic-approximation construction.
#[derive(Clone, Debug)]
pub struct Operational<T> {
    pub env: Vec<FockOperator<T>>,
    pub main: FockOperator<T>,
    /// Deepest approximation index computed.
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport<T> {
    pub skip: SkipConvention,
    pub per_procedure: Vec<(String, CompareReport<T>)>,
    pub main: CompareReport<T>,
    pub pass: bool,
    pub iterations: usize,
}

impl<T: Real> EquivalenceReport<T> {
    pub fn max_diff(&self) -> T {
        self.per_procedure.iter().map(|(_, r)| r.max_diff).fold(self.main.max_diff, T::max)
    }

    pub fn to_json(&self, space: &FockSpace) -> Value {
        json!({
            "skip": self.skip.name(),
            "pass": self.pass,
            "iterations": self.iterations,
            "max_diff": self.max_diff().as_f64(),
            "procedures": self.per_procedure.iter().map(|(n, r)| json!({"name": n, "report": r.to_json(space)})).collect::<Vec<_>>(),
            "main": self.main.to_json(space),
        })
    }
}

/// Coin base names in the order used for Fock blocks: declaration order of
/// the spaces, restricted to coins the declaration uses.
pub fn coin_order(module: &SourceModule) -> Vec<String> {
    let used = module.decl.all_coins();
    module.spaces.coins().map(|c| c.name.clone()).filter(|c| used.contains(c)).collect()
}

impl<T: Real> Engine<T> {
    /// Validates the module and resolves gates and the Fock space.
    pub fn new(module: &SourceModule, cfg: SemanticsConfig) -> SResult<Self> {
        let report = validate(&module.decl, &module.gates, &module.spaces);
        if !report.is_ok() {
            return Err(SemanticsError::Invalid(report));
        }
        let coins = coin_order(module);
        let trunc = Truncation { caps: coins.iter().map(|c| cfg.caps.cap(c)).collect(), total: cfg.caps.total };
        let space = Arc::new(FockSpace::new(&module.spaces, &coins, trunc)?);
        let mut gates = HashMap::new();
        for g in module.gates.iter() {
            gates.insert(g.name.clone(), g.matrix::<T>()?);
        }
        Ok(Engine { module: module.clone(), space, cfg, gates })
    }

    /// The same program under another configuration.
    pub fn reconfigure(&self, cfg: SemanticsConfig) -> SResult<Self> {
        Self::new(&self.module, cfg)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn decl(&self) -> &Declaration {
        &self.module.decl
    }

    pub fn module(&self) -> &SourceModule {
        &self.module
    }

    pub fn cfg(&self) -> &SemanticsConfig {
        &self.cfg
    }

    pub fn tol(&self) -> T {
        T::lit(self.cfg.tol)
    }

    pub fn gate(&self, name: &str) -> Option<&Dense<T>> {
        self.gates.get(name)
    }

    fn coin(&self, name: &str) -> usize {
        self.space.coin_index(name).expect("validated coin")
    }

    fn system(&self, name: &str) -> usize {
        self.space.system_index(name).expect("validated system")
    }

    fn proc_index(&self, name: &str) -> SResult<usize> {
        self.decl().index_of(name).ok_or_else(|| SemanticsError::UnknownIdentifier(name.into()))
    }

    fn body_coin_set(&self) -> BTreeSet<usize> {
        self.decl().body_coins().iter().map(|c| self.coin(c)).collect()
    }

    /// Whether `skip` is the identity at `limit` inside a frame.
    fn skip_alive(&self, limit: &OccVec, frame: &[usize]) -> bool {
        match self.cfg.skip {
            SkipConvention::FullIdentity => true,
            SkipConvention::Paper => limit.0.iter().zip(frame).all(|(&n, &f)| n > f),
        }
    }

    /// Cumulative semantics of `skip` at frame 0.
    pub fn skip_operator(&self) -> FockOperator<T> {
        let zero_frame = vec![0; self.space.coins().len()];
        FockOperator::identity(self.space.clone()).restrict(|n| self.skip_alive(n, &zero_frame))
    }

    /// Cumulative semantics of a gate application, copies taken relative to
    /// frame 0.
    pub fn unitary_operator(&self, gate: &str, coins: &[CoinRef], systems: &[String]) -> SResult<FockOperator<T>> {
        let g = &self.gates[gate];
        let cs: Vec<(usize, usize)> = coins.iter().map(|r| (self.coin(&r.coin), r.copy)).collect();
        let ss: Vec<usize> = systems.iter().map(|s| self.system(s)).collect();
        let blocks = self.space.occupations().into_iter().filter_map(|n| {
            let b = self.space.embed_gate(&n, &cs, &ss, g)?;
            Some((n, b))
        });
        Ok(FockOperator::from_blocks(self.space.clone(), blocks.collect::<Vec<_>>())?)
    }

    /// Semantic functional of `p` on a cumulative environment (declaration
    /// order); the result is cumulative.
    pub fn semantic_functional(&self, p: &Program, env: &[FockOperator<T>]) -> SResult<FockOperator<T>> {
        let want = self.decl().equations.len();
        if env.len() != want {
            return Err(SemanticsError::Arity { got: env.len(), want });
        }
        let shifted;
        let env = match self.cfg.call_shift {
            CallShift::Frame => env,
            CallShift::CreationFunctional => {
                let cs = self.body_coin_set();
                shifted = env.iter().map(|a| a.creation_functional_all(&cs)).collect::<Vec<_>>();
                &shifted[..]
            }
        };
        self.functional(p, env)
    }

    fn functional(&self, p: &Program, env: &[FockOperator<T>]) -> SResult<FockOperator<T>> {
        Ok(match p {
            Program::Abort => FockOperator::zero(self.space.clone()),
            Program::Skip => self.skip_operator(),
            Program::Unitary { gate, coins, systems } => self.unitary_operator(gate, coins, systems)?,
            Program::Call(x) => env[self.proc_index(x)?].clone(),
            Program::Seq(a, b) => {
                let fa = self.functional(a, env)?;
                if fa.is_zero() {
                    return Ok(fa);
                }
                self.functional(b, env)?.product(&fa)?
            }
            Program::Qif { guard, branches } => {
                if guard.copy != 0 {
                    return Err(SemanticsError::GeneralisedGuard { coin: guard.coin.clone(), copy: guard.copy });
                }
                let c = self.coin(&guard.coin);
                let labels = &self.space.coins()[c].labels;
                let mut parts: Vec<Option<FockOperator<T>>> = vec![None; labels.len()];
                for (label, body) in branches {
                    let i = labels.iter().position(|l| l == label).expect("validated label");
                    parts[i] = Some(self.functional(body, env)?);
                }
                let refs: Vec<Option<&FockOperator<T>>> = parts.iter().map(Option::as_ref).collect();
                FockOperator::guarded_composition(c, &refs, &self.space)?
            }
        })
    }

    /// One application of the declaration functional (cumulative in, out).
    pub fn decl_functional(&self, env: &[FockOperator<T>]) -> SResult<Vec<FockOperator<T>>> {
        self.decl().equations.values().map(|body| self.semantic_functional(body, env)).collect()
    }

    fn zero_env(&self) -> Vec<FockOperator<T>> {
        vec![FockOperator::zero(self.space.clone()); self.decl().equations.len()]
    }

    /// Least fixed point of the declaration functional within the truncation.
    pub fn kleene_fixpoint(&self) -> SResult<Fixpoint<T>> {
        let cap = self.space.trunc().caps.iter().sum::<usize>() + 2;
        let mut env = self.zero_env();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < cap {
            let next = self.decl_functional(&env)?;
            iterations += 1;
            let same = next.iter().zip(&env).all(|(a, b)| a == b);
            env = next;
            if same {
                converged = true;
                break;
            }
        }
        let exact = env.iter().map(FockOperator::to_exact).collect();
        Ok(Fixpoint { env: exact, cumulative: env, iterations, converged })
    }

    /// Exact-occupation semantics of `main` over a fixed point.
    pub fn denotational_main(&self, fix: &Fixpoint<T>) -> SResult<FockOperator<T>> {
        Ok(self.semantic_functional(&self.decl().main, &fix.cumulative)?.to_exact())
    }

    /// Simultaneous substitution of identifier-free bodies for identifiers.
    pub fn substitute(&self, p: &Program, bodies: &IndexMap<String, Program>) -> SResult<Program> {
        substitute(p, bodies)
    }

    /// The `n`th syntactic approximation of every procedure.
    pub fn approximations(&self, n: usize) -> SResult<IndexMap<String, Program>> {
        let mut cur: IndexMap<String, Program> =
            self.decl().equations.keys().map(|k| (k.clone(), Program::Abort)).collect();
        for _ in 0..n {
            cur = self
                .decl()
                .equations
                .iter()
                .map(|(k, body)| Ok((k.clone(), substitute(body, &cur)?)))
                .collect::<SResult<_>>()?;
        }
        Ok(cur)
    }

    pub fn syntactic_approx(&self, k: &str, n: usize) -> SResult<Program> {
        self.proc_index(k)?;
        Ok(self.approximations(n)?.shift_remove(k).expect("declared"))
    }

    /// Exact-occupation semantics of an identifier-free generalised program,
    /// each coin copy being its own tensor slot.
    pub fn interpret_generalised(&self, q: &Program) -> SResult<FockOperator<T>> {
        Ok(self.interpret_generalised_cumulative(q)?.to_exact())
    }

    /// As [`Self::interpret_generalised`], in cumulative encoding.
    pub fn interpret_generalised_cumulative(&self, q: &Program) -> SResult<FockOperator<T>> {
        if let Some(x) = q.calls().into_iter().next() {
            return Err(SemanticsError::IdentifierPresent(x));
        }
        check_generalised(q)?;
        let k = self.space.coins().len();
        let mut blocks = Vec::new();
        for n in self.space.occupations() {
            let b = self.eval_block(q, &n, &vec![0; k]);
            blocks.push((n, b));
        }
        Ok(FockOperator::from_blocks(self.space.clone(), blocks)?)
    }

    fn eval_block(&self, p: &Program, n: &OccVec, frame: &[usize]) -> Sparse<T> {
        let d = self.space.block_dim(n);
        match p {
            Program::Abort | Program::Call(_) => Sparse::zeros(d, d),
            Program::Skip => {
                if self.skip_alive(n, frame) {
                    Sparse::identity(d)
                } else {
                    Sparse::zeros(d, d)
                }
            }
            Program::Unitary { gate, coins, systems } => {
                let cs: Vec<(usize, usize)> = coins.iter().map(|r| (self.coin(&r.coin), r.copy)).collect();
                let ss: Vec<usize> = systems.iter().map(|s| self.system(s)).collect();
                self.space.embed_gate(n, &cs, &ss, &self.gates[gate]).unwrap_or_else(|| Sparse::zeros(d, d))
            }
            Program::Seq(a, b) => {
                let ea = self.eval_block(a, n, frame);
                if ea.is_structurally_zero() {
                    return ea;
                }
                self.eval_block(b, n, frame).matmul(&ea)
            }
            Program::Qif { guard, branches } => {
                let c = self.coin(&guard.coin);
                let k = guard.copy;
                if k >= n.0[c] {
                    return Sparse::zeros(d, d);
                }
                let stride = self.space.slot_stride(n, c, k);
                let cd = self.space.coin_dim(c);
                let labels = &self.space.coins()[c].labels;
                let mut inner = frame.to_vec();
                inner[c] = k + 1;
                let mut acc = Sparse::zeros(d, d);
                for (label, body) in branches {
                    let i = labels.iter().position(|l| l == label).expect("validated label");
                    let m = self.eval_block(body, n, &inner);
                    acc = acc.add(&m.filter_rows(|r| (r / stride) % cd == i));
                }
                acc
            }
        }
    }

    /// Operational semantics: least upper bounds of the approximation chains,
    /// then the main statement over them.
    pub fn operational_semantics(&self) -> SResult<Operational<T>> {
        let cap = self.space.trunc().caps.iter().sum::<usize>() + 2;
        let names: Vec<String> = self.decl().equations.keys().cloned().collect();
        let mut chains: Vec<Vec<FockOperator<T>>> = vec![vec![FockOperator::zero(self.space.clone())]; names.len()];
        let mut approx: IndexMap<String, Program> = names.iter().map(|k| (k.clone(), Program::Abort)).collect();
        let mut depth = 0;
        while depth < cap {
            approx = self
                .decl()
                .equations
                .iter()
                .map(|(k, body)| Ok((k.clone(), substitute(body, &approx)?)))
                .collect::<SResult<_>>()?;
            depth += 1;
            let mut stable = true;
            for (j, k) in names.iter().enumerate() {
                let sem = self.interpret_generalised(&approx[k])?;
                if sem != *chains[j].last().expect("nonempty") {
                    stable = false;
                }
                chains[j].push(sem);
            }
            if stable {
                break;
            }
        }
        let tol = self.tol();
        let env = chains.iter().map(|c| lub_chain(c, tol)).collect::<Result<Vec<_>, _>>()?;
        let cumulative: Vec<_> = env.iter().map(FockOperator::to_cumulative).collect();
        let main = self.semantic_functional_frame(&self.decl().main, &cumulative)?.to_exact();
        Ok(Operational { env, main, depth })
    }

    // The main statement never passes through the declaration functional, so
    // it is always evaluated without the call shift.
    fn semantic_functional_frame(&self, p: &Program, env: &[FockOperator<T>]) -> SResult<FockOperator<T>> {
        self.functional(p, env)
    }

    /// `main` with every identifier replaced by its `n`th approximation.
    pub fn main_approximation(&self, n: usize) -> SResult<Program> {
        substitute(&self.decl().main, &self.approximations(n)?)
    }

    /// Compares the fixed-point and operational semantics of every procedure
    /// and of `main`.
    pub fn check_equivalence(&self) -> SResult<EquivalenceReport<T>> {
        self.equivalence_against(self)
    }

    /// Negative control: the fixed-point side runs with the opposite `skip`
    /// convention, so any declaration whose meaning depends on `skip` fails.
    pub fn check_equivalence_seeded_bug(&self) -> SResult<EquivalenceReport<T>> {
        let bad = self.reconfigure(self.cfg.clone().with_skip(self.cfg.skip.flipped()))?;
        bad.equivalence_against(self)
    }

    fn equivalence_against(&self, op_side: &Self) -> SResult<EquivalenceReport<T>> {
        let fix = self.kleene_fixpoint()?;
        let fix_main = self.semantic_functional_frame(&self.decl().main, &fix.cumulative)?.to_exact();
        let op = op_side.operational_semantics()?;
        let tol = self.tol();
        let mut per_procedure = Vec::new();
        let mut pass = true;
        for (j, name) in self.decl().equations.keys().enumerate() {
            let r = compare(&fix.env[j], &op.env[j], tol)?;
            pass &= r.pass;
            per_procedure.push((name.clone(), r));
        }
        let main = compare(&fix_main, &op.main, tol)?;
        pass &= main.pass;
        Ok(EquivalenceReport { skip: op_side.cfg.skip, per_procedure, main, pass, iterations: fix.iterations })
    }

    /// Exact-occupation semantics of `main` applied to a vector of block `n̄`,
    /// computed by running the declaration on the vector.
    pub fn apply_to_vector(&self, n: &OccVec, v: &[Amp<T>]) -> Vec<Amp<T>> {
        let d = self.space.block_dim(n);
        assert_eq!(v.len(), d, "vector length does not match block {}", self.space.fmt_occ(n));
        let input: SVec<T> = v.iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(i, a)| (i, *a)).collect();
        let mut out = vec![Amp::<T>::zero(); d];
        let k = self.space.coins().len();
        // Inclusion-exclusion over the coins whose highest copy is withheld.
        for mask in 0u32..(1 << k) {
            let mut limit = n.clone();
            let mut ok = true;
            for c in 0..k {
                if mask & (1 << c) != 0 {
                    if limit.0[c] == 0 {
                        ok = false;
                        break;
                    }
                    limit.0[c] -= 1;
                }
            }
            if !ok {
                continue;
            }
            let sign = if mask.count_ones() % 2 == 0 { T::one() } else { -T::one() };
            let mut stack = Vec::new();
            let r = self.run(&self.decl().main, n, &limit, &vec![0; k], input.clone(), &mut stack);
            for (i, a) in r {
                out[i] = out[i] + a * sign;
            }
        }
        out
    }

    fn run(&self, p: &Program, n: &OccVec, limit: &OccVec, frame: &[usize], v: SVec<T>, stack: &mut Vec<(usize, Vec<usize>)>) -> SVec<T> {
        if v.is_empty() {
            return v;
        }
        match p {
            Program::Abort => SVec::new(),
            Program::Skip => {
                if self.skip_alive(limit, frame) {
                    v
                } else {
                    SVec::new()
                }
            }
            Program::Unitary { gate, coins, systems } => {
                let mut cs = Vec::with_capacity(coins.len());
                for r in coins {
                    let c = self.coin(&r.coin);
                    let abs = frame[c] + r.copy;
                    if abs >= limit.0[c] {
                        return SVec::new();
                    }
                    cs.push((c, abs));
                }
                let ss: Vec<usize> = systems.iter().map(|s| self.system(s)).collect();
                let factors = self.space.gate_factors(n, &cs, &ss).expect("copies below limit");
                apply_sparse(&v, &factors, &self.gates[gate])
            }
            Program::Seq(a, b) => {
                let mid = self.run(a, n, limit, frame, v, stack);
                self.run(b, n, limit, frame, mid, stack)
            }
            Program::Qif { guard, branches } => {
                let c = self.coin(&guard.coin);
                let abs = frame[c] + guard.copy;
                if abs >= limit.0[c] {
                    return SVec::new();
                }
                let stride = self.space.slot_stride(n, c, abs);
                let cd = self.space.coin_dim(c);
                let labels = &self.space.coins()[c].labels;
                let mut inner = frame.to_vec();
                inner[c] = abs + 1;
                let mut out = SVec::new();
                for (label, body) in branches {
                    let i = labels.iter().position(|l| l == label).expect("validated label");
                    let part: SVec<T> = v.iter().filter(|(&idx, _)| (idx / stride) % cd == i).map(|(&a, &b)| (a, b)).collect();
                    for (idx, a) in self.run(body, n, limit, &inner, part, stack) {
                        let e = out.entry(idx).or_insert_with(Amp::zero);
                        *e = *e + a;
                    }
                }
                out.retain(|_, a| !a.is_zero());
                out
            }
            Program::Call(x) => {
                let j = self.decl().index_of(x).expect("validated call");
                let key = (j, frame.to_vec());
                // Re-entering a procedure without consuming a copy: every
                // path through this call diverges, so it contributes nothing.
                if stack.contains(&key) {
                    return SVec::new();
                }
                stack.push(key);
                let body = &self.decl().equations[j];
                let r = self.run(body, n, limit, frame, v, stack);
                stack.pop();
                r
            }
        }
    }
}

type SVec<T> = HashMap<usize, Amp<T>>;

fn apply_sparse<T: Real>(v: &SVec<T>, factors: &[(usize, usize)], gate: &Dense<T>) -> SVec<T> {
    let mut groups: HashMap<usize, Vec<(usize, Amp<T>)>> = HashMap::new();
    for (&idx, &a) in v {
        let mut base = idx;
        let mut g = 0;
        for &(stride, d) in factors {
            let digit = (idx / stride) % d;
            g = g * d + digit;
            base -= digit * stride;
        }
        groups.entry(base).or_default().push((g, a));
    }
    let gdim = gate.rows();
    let mut out = SVec::new();
    for (base, entries) in groups {
        for r in 0..gdim {
            let mut acc = Amp::<T>::zero();
            for &(g, a) in &entries {
                acc = acc + gate[(r, g)] * a;
            }
            if acc.is_zero() {
                continue;
            }
            let mut rest = r;
            let mut idx = base;
            for &(stride, d) in factors.iter().rev() {
                idx += (rest % d) * stride;
                rest /= d;
            }
            out.insert(idx, acc);
        }
    }
    out
}

/// Renames every copy `≥ from` of `coin` to the next copy.
pub fn shift_copies(p: &Program, coin: &str, from: usize) -> Program {
    let bump = |r: &CoinRef| {
        if r.coin == coin && r.copy >= from {
            CoinRef { coin: r.coin.clone(), copy: r.copy + 1 }
        } else {
            r.clone()
        }
    };
    match p {
        Program::Abort | Program::Skip | Program::Call(_) => p.clone(),
        Program::Unitary { gate, coins, systems } => {
            Program::Unitary { gate: gate.clone(), coins: coins.iter().map(bump).collect(), systems: systems.clone() }
        }
        Program::Seq(a, b) => Program::seq(shift_copies(a, coin, from), shift_copies(b, coin, from)),
        Program::Qif { guard, branches } => Program::Qif {
            guard: bump(guard),
            branches: branches.iter().map(|(l, b)| (l.clone(), shift_copies(b, coin, from))).collect(),
        },
    }
}

/// Simultaneous substitution `p[bodies/X̄]`. Inside each branch of a `qif` on
/// copy `k` of coin `d`, the substituted branch has every copy `d_j`, `j ≥ k`,
/// renamed to `d_{j+1}`.
pub fn substitute(p: &Program, bodies: &IndexMap<String, Program>) -> SResult<Program> {
    if let Some(x) = bodies.values().flat_map(Program::calls).next() {
        return Err(SemanticsError::IdentifierPresent(x));
    }
    subst(p, bodies)
}

fn subst(p: &Program, bodies: &IndexMap<String, Program>) -> SResult<Program> {
    Ok(match p {
        Program::Abort | Program::Skip | Program::Unitary { .. } => p.clone(),
        Program::Call(x) => bodies.get(x).cloned().ok_or_else(|| SemanticsError::UnknownIdentifier(x.clone()))?,
        Program::Seq(a, b) => Program::seq(subst(a, bodies)?, subst(b, bodies)?),
        Program::Qif { guard, branches } => Program::Qif {
            guard: guard.clone(),
            branches: branches
                .iter()
                .map(|(l, b)| Ok((l.clone(), shift_copies(&subst(b, bodies)?, &guard.coin, guard.copy))))
                .collect::<SResult<_>>()?,
        },
    })
}

/// Checks the generalised side condition: a guard's own copy never occurs in
/// its branches.
pub fn check_generalised(p: &Program) -> SResult<()> {
    let mut err = None;
    p.visit(&mut |q| {
        if let Program::Qif { guard, branches } = q {
            if branches.iter().any(|(_, b)| b.coin_refs().contains(guard)) && err.is_none() {
                err = Some(format!("copy {} of `{}` occurs in a branch of its own qif", guard.copy, guard.coin));
            }
        }
    });
    match err {
        Some(e) => Err(SemanticsError::BadGeneralised(e)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    const RHW: &str = "coin d : basis {L, R};\nsystem p : ring 8;\ngate H on (d) = hadamard;\n\
        gate TL on (p) = shift -1;\ngate TR on (p) = shift 1;\n\
        proc X <= TL[p] (+)[H[d]] (TR[p]; X);\nmain = X;\n";

    fn engine(src: &str, cap: usize, skip: SkipConvention) -> Engine<f64> {
        let m = parse(src).unwrap();
        Engine::new(&m, SemanticsConfig::default().with_caps(CapSpec::uniform(cap)).with_skip(skip)).unwrap()
    }

    #[test]
    fn second_approximation_renames_copies() {
        let e = engine(RHW, 4, SkipConvention::Paper);
        let x2 = e.syntactic_approx("X", 2).unwrap();
        assert_eq!(
            x2.to_string(),
            "H[d]; qif [d] |L> -> TL[p] [] |R> -> TR[p]; H[d@1]; qif [d@1] |L> -> TL[p] [] |R> -> TR[p]; abort fiq fiq"
        );
        let x4 = e.syntactic_approx("X", 4).unwrap();
        assert_eq!(x4.max_copy("d"), Some(3));
        assert_eq!(e.syntactic_approx("X", 0).unwrap(), Program::Abort);
    }

    #[test]
    fn kleene_iteration_count_for_recursive_walk() {
        let e = engine(RHW, 6, SkipConvention::Paper);
        let fix = e.kleene_fixpoint().unwrap();
        assert!(fix.converged);
        assert_eq!(fix.iterations, 7);
        let support: Vec<usize> = fix.env[0].support(1e-14).iter().map(|n| n.0[0]).collect();
        assert_eq!(support, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn fixpoint_equals_operational_on_recursive_walk() {
        for skip in [SkipConvention::Paper, SkipConvention::FullIdentity] {
            let e = engine(RHW, 5, skip);
            let r = e.check_equivalence().unwrap();
            assert!(r.pass, "{skip:?}: {}", r.max_diff());
        }
    }

    #[test]
    fn self_call_has_zero_semantics() {
        let e = engine("system q : dim 2;\ngate X on (q) = matrix [0, 1; 1, 0];\nproc Z <= X[q]; Z;\nmain = Z;", 3, SkipConvention::Paper);
        let fix = e.kleene_fixpoint().unwrap();
        assert!(fix.env[0].is_zero());
        assert_eq!(fix.iterations, 1);
        let v = vec![Amp::new(1.0, 0.0), Amp::zero()];
        assert!(e.apply_to_vector(&e.space().zero_occ(), &v).iter().all(|a| a.is_zero()));
    }

    #[test]
    fn vector_evaluator_matches_blocks() {
        let e = engine(RHW, 4, SkipConvention::Paper);
        let fix = e.kleene_fixpoint().unwrap();
        let main = e.denotational_main(&fix).unwrap();
        for n in e.space().occupations() {
            let d = e.space().block_dim(&n);
            let v: Vec<Amp<f64>> = (0..d).map(|i| Amp::new((i % 5) as f64 - 2.0, (i % 3) as f64)).collect();
            let direct = main.block_at(&n).unwrap().matvec(&v);
            let run = e.apply_to_vector(&n, &v);
            for (a, b) in direct.iter().zip(&run) {
                assert!((a - b).norm() < 1e-12, "block {}", e.space().fmt_occ(&n));
            }
        }
    }

    #[test]
    fn substitution_shifts_only_from_guard_copy() {
        let d1 = CoinRef::copy("d", 1);
        let q = Program::Qif { guard: d1.clone(), branches: vec![("L".into(), Program::call("X"))] };
        let body = Program::unitary("H", &[CoinRef::copy("d", 0), CoinRef::copy("d", 2)], &[]);
        let out = substitute(&q, &[("X".to_string(), body)].into_iter().collect()).unwrap();
        let Program::Qif { branches, .. } = out else { panic!() };
        assert_eq!(branches[0].1, Program::unitary("H", &[CoinRef::copy("d", 0), CoinRef::copy("d", 3)], &[]));
    }
}
