//! Abstract syntax of quantum program schemes, the space and gate tables they
//! refer to, and well-formedness checking.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use num_complex::Complex;
use thiserror::Error;

use crate::linalg::Dense;
use crate::scalar::{amp, Real};

/// Tolerance used when checking declared gates for unitarity.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Coin,
    Principal,
}

/// How the basis of a space is described in source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceShape {
    /// Explicit labels, e.g. `basis {L, R}`.
    Basis(Vec<String>),
    /// Cyclic positions `-w..=w`.
    Ring(i64),
    /// Plain `0..n`.
    Dim(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    pub name: String,
    pub shape: SpaceShape,
}

impl SpaceSpec {
    pub fn coin(name: &str, labels: &[&str]) -> Self {
        SpaceSpec {
            kind: SpaceKind::Coin,
            name: name.into(),
            shape: SpaceShape::Basis(labels.iter().map(|s| s.to_string()).collect()),
        }
    }

    pub fn ring(name: &str, w: i64) -> Self {
        SpaceSpec { kind: SpaceKind::Principal, name: name.into(), shape: SpaceShape::Ring(w) }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            SpaceShape::Basis(l) => l.len(),
            SpaceShape::Ring(w) => (2 * w + 1) as usize,
            SpaceShape::Dim(n) => *n,
        }
    }

    /// Basis labels in index order.
    pub fn labels(&self) -> Vec<String> {
        match &self.shape {
            SpaceShape::Basis(l) => l.clone(),
            SpaceShape::Ring(w) => (-w..=*w).map(|x| x.to_string()).collect(),
            SpaceShape::Dim(n) => (0..*n).map(|x| x.to_string()).collect(),
        }
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        match &self.shape {
            SpaceShape::Basis(l) => l.iter().position(|x| x == label),
            SpaceShape::Ring(w) => {
                let x: i64 = label.parse().ok()?;
                (x.abs() <= *w).then(|| (x + w) as usize)
            }
            SpaceShape::Dim(n) => {
                let x: usize = label.parse().ok()?;
                (x < *n).then_some(x)
            }
        }
    }

    /// Ring half-width, if this is a ring space.
    pub fn ring_width(&self) -> Option<i64> {
        match self.shape {
            SpaceShape::Ring(w) => Some(w),
            _ => None,
        }
    }
}

/// All declared spaces, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Spaces {
    specs: Vec<SpaceSpec>,
}

impl Spaces {
    pub fn new(specs: Vec<SpaceSpec>) -> Self {
        Spaces { specs }
    }

    pub fn all(&self) -> &[SpaceSpec] {
        &self.specs
    }

    pub fn get(&self, name: &str) -> Option<&SpaceSpec> {
        self.specs.iter().find(|s| s.name == name)
    }

    pub fn coin(&self, name: &str) -> Option<&SpaceSpec> {
        self.get(name).filter(|s| s.kind == SpaceKind::Coin)
    }

    pub fn coins(&self) -> impl Iterator<Item = &SpaceSpec> {
        self.specs.iter().filter(|s| s.kind == SpaceKind::Coin)
    }

    pub fn systems(&self) -> impl Iterator<Item = &SpaceSpec> {
        self.specs.iter().filter(|s| s.kind == SpaceKind::Principal)
    }

    /// Dimension of the principal space (1 when no system is declared).
    pub fn principal_dim(&self) -> usize {
        self.systems().map(SpaceSpec::dim).product()
    }

    pub(crate) fn push(&mut self, spec: SpaceSpec) {
        self.specs.push(spec);
    }
}

/// Copy `copy` of coin `coin`; source programs only ever use copy 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoinRef {
    pub coin: String,
    pub copy: usize,
}

impl CoinRef {
    pub fn new(coin: &str) -> Self {
        CoinRef { coin: coin.into(), copy: 0 }
    }

    pub fn copy(coin: &str, copy: usize) -> Self {
        CoinRef { coin: coin.into(), copy }
    }
}

/// A (possibly generalised) program scheme.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Abort,
    Skip,
    Unitary { gate: String, coins: Vec<CoinRef>, systems: Vec<String> },
    Seq(Box<Program>, Box<Program>),
    Qif { guard: CoinRef, branches: Vec<(String, Program)> },
    Call(String),
}

impl Program {
    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn unitary(gate: &str, coins: &[CoinRef], systems: &[&str]) -> Program {
        Program::Unitary {
            gate: gate.into(),
            coins: coins.to_vec(),
            systems: systems.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn call(name: &str) -> Program {
        Program::Call(name.into())
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Program)) {
        f(self);
        match self {
            Program::Seq(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Program::Qif { branches, .. } => branches.iter().for_each(|(_, p)| p.visit(f)),
            _ => {}
        }
    }

    /// Every coin reference occurring in the program, guards included.
    pub fn coin_refs(&self) -> BTreeSet<CoinRef> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| match p {
            Program::Unitary { coins, .. } => out.extend(coins.iter().cloned()),
            Program::Qif { guard, .. } => {
                out.insert(guard.clone());
            }
            _ => {}
        });
        out
    }

    /// Procedure identifiers called anywhere in the program.
    pub fn calls(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            if let Program::Call(x) = p {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn is_identifier_free(&self) -> bool {
        self.calls().is_empty()
    }

    /// Largest copy index of `coin`, if the coin occurs.
    pub fn max_copy(&self, coin: &str) -> Option<usize> {
        self.coin_refs().into_iter().filter(|r| r.coin == coin).map(|r| r.copy).max()
    }

    /// Leaves of a sequence, flattening nested `Seq` nodes.
    pub fn seq_leaves(&self) -> Vec<&Program> {
        match self {
            Program::Seq(a, b) => {
                let mut v = a.seq_leaves();
                v.extend(b.seq_leaves());
                v
            }
            other => vec![other],
        }
    }
}

/// Base names of every coin occurring in `p`.
pub fn free_coins(p: &Program) -> BTreeSet<String> {
    p.coin_refs().into_iter().map(|r| r.coin).collect()
}

/// Right-nested sequential composition of `n` copies of `p`.
pub fn seq_power(p: &Program, n: usize) -> Result<Program, LangError> {
    if n == 0 {
        return Err(LangError::ZeroPower);
    }
    let mut acc = p.clone();
    for _ in 1..n {
        acc = Program::seq(p.clone(), acc);
    }
    Ok(acc)
}

/// Quantum choice: run `coin_program` on the guard coin, then branch on it.
pub fn desugar_choice(
    coin_program: Program,
    guard: CoinRef,
    branches: Vec<(String, Program)>,
) -> Result<Program, LangError> {
    let mut bad = None;
    coin_program.visit(&mut |p| match p {
        Program::Unitary { coins, systems, .. } => {
            if !systems.is_empty() || coins.iter().any(|c| *c != guard) {
                bad.get_or_insert("coin program touches variables other than the guard coin");
            }
        }
        Program::Qif { .. } => {
            bad.get_or_insert("coin program contains a quantum case statement");
        }
        Program::Call(_) => {
            bad.get_or_insert("coin program calls a procedure");
        }
        _ => {}
    });
    if let Some(msg) = bad {
        return Err(LangError::BadChoice(msg.into()));
    }
    Ok(Program::seq(coin_program, Program::Qif { guard, branches }))
}

/// A system of recursive equations together with the main statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub equations: IndexMap<String, Program>,
    pub main: Program,
}

impl Declaration {
    pub fn new(equations: IndexMap<String, Program>, main: Program) -> Self {
        Declaration { equations, main }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.equations.get_index_of(name)
    }

    /// Coins occurring in the procedure bodies.
    pub fn body_coins(&self) -> BTreeSet<String> {
        self.equations.values().flat_map(free_coins).collect()
    }

    /// Coins occurring anywhere, bodies and main.
    pub fn all_coins(&self) -> BTreeSet<String> {
        let mut s = self.body_coins();
        s.extend(free_coins(&self.main));
        s
    }
}

/// Built-in or explicit gate definition.
#[derive(Clone, Debug, PartialEq)]
pub enum GateDef {
    Hadamard,
    Fourier(usize),
    /// Cyclic shift `|x⟩ ↦ |x + k⟩`.
    Shift(i64),
    Identity,
    Matrix(Vec<Vec<Complex<f64>>>),
}

/// A gate signature slot resolved against the space table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSlot {
    pub space: String,
    pub kind: SpaceKind,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateEntry {
    pub name: String,
    pub signature: Vec<GateSlot>,
    pub def: GateDef,
}

impl GateEntry {
    pub fn dim(&self) -> usize {
        self.signature.iter().map(|s| s.dim).product()
    }

    /// The gate as a dense matrix; factors follow the signature order.
    pub fn matrix<T: Real>(&self) -> Result<Dense<T>, LangError> {
        let n = self.dim();
        let bad = |why: &str| LangError::GateShape { gate: self.name.clone(), why: why.into() };
        let m = match &self.def {
            GateDef::Identity => Dense::identity(n),
            GateDef::Hadamard => {
                if n != 2 {
                    return Err(bad("hadamard needs a two-dimensional signature"));
                }
                let h = std::f64::consts::FRAC_1_SQRT_2;
                Dense::from_rows(vec![
                    vec![amp(Complex::new(h, 0.0)), amp(Complex::new(h, 0.0))],
                    vec![amp(Complex::new(h, 0.0)), amp(Complex::new(-h, 0.0))],
                ])
                .expect("2x2")
            }
            GateDef::Fourier(k) => {
                if *k != n {
                    return Err(bad("fourier size differs from the signature dimension"));
                }
                let s = 1.0 / (n as f64).sqrt();
                let rows = (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|l| {
                                let th = 2.0 * std::f64::consts::PI * ((j * l) % n) as f64 / n as f64;
                                amp(Complex::from_polar(s, th))
                            })
                            .collect()
                    })
                    .collect();
                Dense::from_rows(rows).expect("square")
            }
            GateDef::Shift(k) => {
                if self.signature.len() != 1 {
                    return Err(bad("shift acts on exactly one space"));
                }
                let mut m = Dense::zeros(n, n);
                for x in 0..n {
                    let y = (x as i64 + k).rem_euclid(n as i64) as usize;
                    m[(y, x)] = amp(Complex::new(1.0, 0.0));
                }
                m
            }
            GateDef::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(bad("matrix shape differs from the signature dimension"));
                }
                Dense::from_rows(rows.iter().map(|r| r.iter().map(|&z| amp(z)).collect()).collect())
                    .expect("rectangular")
            }
        };
        Ok(m)
    }
}

/// Named gates, in declaration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GateLibrary {
    entries: IndexMap<String, GateEntry>,
}

impl GateLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a gate on the named spaces.
    pub fn declare(&mut self, name: &str, on: &[&str], def: GateDef, spaces: &Spaces) -> Result<(), LangError> {
        if self.entries.contains_key(name) {
            return Err(LangError::Duplicate(name.into()));
        }
        let signature = on
            .iter()
            .map(|s| {
                let spec = spaces.get(s).ok_or_else(|| LangError::UnknownSpace(s.to_string()))?;
                Ok(GateSlot { space: spec.name.clone(), kind: spec.kind, dim: spec.dim() })
            })
            .collect::<Result<Vec<_>, LangError>>()?;
        self.entries.insert(name.into(), GateEntry { name: name.into(), signature, def });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&GateEntry> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GateEntry> {
        self.entries.values()
    }

    pub fn is_unitary(&self, name: &str) -> bool {
        self.get(name)
            .and_then(|g| g.matrix::<f64>().ok())
            .is_some_and(|m| m.is_unitary(UNITARITY_TOL))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LangError {
    #[error("power exponent must be at least 1")]
    ZeroPower,
    #[error("invalid quantum choice: {0}")]
    BadChoice(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("unknown space `{0}`")]
    UnknownSpace(String),
    #[error("gate `{gate}`: {why}")]
    GateShape { gate: String, why: String },
}

/// Where a violation was found.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scope {
    Main,
    Proc(String),
    Gate(String),
    Space(String),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Main => write!(f, "main"),
            Scope::Proc(x) => write!(f, "proc {x}"),
            Scope::Gate(g) => write!(f, "gate {g}"),
            Scope::Space(s) => write!(f, "space {s}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    GuardCoinInBranch,
    MainDeclarationCoinOverlap,
    UnknownGate,
    UnknownIdentifier,
    UnknownLabel,
    UnknownVariable,
    DuplicateLabel,
    DimensionMismatch,
    NonUnitaryGate,
    NonZeroCopyIndex,
    RepeatedArgument,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub scope: Scope,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.scope, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Options that distinguish source programs from generalised ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidateMode {
    /// Reject copy indices other than 0.
    pub source: bool,
}

/// Checks a declaration against the gate and space tables.
pub fn validate(d: &Declaration, g: &GateLibrary, spaces: &Spaces) -> ValidationReport {
    validate_with(d, g, spaces, ValidateMode { source: true })
}

pub fn validate_with(d: &Declaration, g: &GateLibrary, spaces: &Spaces, mode: ValidateMode) -> ValidationReport {
    let mut v = Checker { d, g, spaces, mode, out: Vec::new(), scope: Scope::Main };

    for s in spaces.all() {
        if let SpaceShape::Basis(labels) = &s.shape {
            let mut seen = BTreeSet::new();
            for l in labels {
                if !seen.insert(l) {
                    v.report_in(Scope::Space(s.name.clone()), ViolationKind::DuplicateLabel, format!("label `{l}` repeated"));
                }
            }
        }
    }
    for gate in g.iter() {
        match gate.matrix::<f64>() {
            Err(e) => v.report_in(Scope::Gate(gate.name.clone()), ViolationKind::DimensionMismatch, e.to_string()),
            Ok(m) if !m.is_unitary(UNITARITY_TOL) => v.report_in(
                Scope::Gate(gate.name.clone()),
                ViolationKind::NonUnitaryGate,
                format!("gate `{}` is not unitary", gate.name),
            ),
            Ok(_) => {}
        }
        let kinds: Vec<_> = gate.signature.iter().map(|s| s.kind).collect();
        if kinds.windows(2).any(|w| w[0] == SpaceKind::Principal && w[1] == SpaceKind::Coin) {
            v.report_in(
                Scope::Gate(gate.name.clone()),
                ViolationKind::DimensionMismatch,
                "gate signature must list coin spaces before system spaces".into(),
            );
        }
    }

    for (name, body) in &d.equations {
        v.scope = Scope::Proc(name.clone());
        v.program(body);
    }
    v.scope = Scope::Main;
    v.program(&d.main);

    let overlap: Vec<_> = free_coins(&d.main).intersection(&d.body_coins()).cloned().collect();
    for c in overlap {
        v.report_in(
            Scope::Main,
            ViolationKind::MainDeclarationCoinOverlap,
            format!("coin `{c}` is used both in main and in a procedure body"),
        );
    }
    ValidationReport { violations: v.out }
}

struct Checker<'a> {
    d: &'a Declaration,
    g: &'a GateLibrary,
    spaces: &'a Spaces,
    mode: ValidateMode,
    out: Vec<Violation>,
    scope: Scope,
}

impl Checker<'_> {
    fn report(&mut self, kind: ViolationKind, message: String) {
        self.out.push(Violation { kind, scope: self.scope.clone(), message });
    }

    fn report_in(&mut self, scope: Scope, kind: ViolationKind, message: String) {
        self.out.push(Violation { kind, scope, message });
    }

    fn coin_ref(&mut self, r: &CoinRef) -> Option<&SpaceSpec> {
        if self.mode.source && r.copy != 0 {
            self.report(ViolationKind::NonZeroCopyIndex, format!("coin `{}` has copy index {}", r.coin, r.copy));
        }
        let spec = self.spaces.coin(&r.coin);
        if spec.is_none() {
            self.report(ViolationKind::UnknownVariable, format!("`{}` is not a declared coin", r.coin));
        }
        spec
    }

    fn program(&mut self, p: &Program) {
        match p {
            Program::Abort | Program::Skip => {}
            Program::Call(x) => {
                if !self.d.equations.contains_key(x) {
                    self.report(ViolationKind::UnknownIdentifier, format!("undeclared procedure `{x}`"));
                }
            }
            Program::Seq(a, b) => {
                self.program(a);
                self.program(b);
            }
            Program::Unitary { gate, coins, systems } => self.unitary(gate, coins, systems),
            Program::Qif { guard, branches } => {
                let labels = self.coin_ref(guard).map(SpaceSpec::labels);
                let mut seen = BTreeSet::new();
                for (label, body) in branches {
                    if !seen.insert(label) {
                        self.report(ViolationKind::DuplicateLabel, format!("branch `|{label}>` repeated"));
                    }
                    if let Some(ls) = &labels {
                        if !ls.contains(label) {
                            self.report(
                                ViolationKind::UnknownLabel,
                                format!("`{label}` is not a basis label of coin `{}`", guard.coin),
                            );
                        }
                    }
                    let clash = body.coin_refs().into_iter().any(|r| {
                        r.coin == guard.coin && (self.mode.source || r.copy == guard.copy)
                    });
                    if clash {
                        self.report(
                            ViolationKind::GuardCoinInBranch,
                            format!("guard coin `{}` occurs in branch `|{label}>`", guard.coin),
                        );
                    }
                    self.program(body);
                }
            }
        }
    }

    fn unitary(&mut self, gate: &str, coins: &[CoinRef], systems: &[String]) {
        let mut args: Vec<(SpaceKind, usize)> = Vec::new();
        for c in coins {
            if let Some(s) = self.coin_ref(c) {
                args.push((SpaceKind::Coin, s.dim()));
            }
        }
        for s in systems {
            match self.spaces.get(s).filter(|x| x.kind == SpaceKind::Principal) {
                Some(spec) => args.push((SpaceKind::Principal, spec.dim())),
                None => self.report(ViolationKind::UnknownVariable, format!("`{s}` is not a declared system")),
            }
        }
        let distinct: BTreeSet<_> = coins.iter().collect();
        let distinct_sys: BTreeSet<_> = systems.iter().collect();
        if distinct.len() != coins.len() || distinct_sys.len() != systems.len() {
            self.report(ViolationKind::RepeatedArgument, format!("gate `{gate}` applied to a repeated variable"));
        }
        let Some(entry) = self.g.get(gate) else {
            self.report(ViolationKind::UnknownGate, format!("undeclared gate `{gate}`"));
            return;
        };
        if args.len() != coins.len() + systems.len() {
            return;
        }
        let expected: Vec<_> = entry.signature.iter().map(|s| (s.kind, s.dim)).collect();
        if expected != args {
            self.report(
                ViolationKind::DimensionMismatch,
                format!("gate `{gate}` expects {} but is applied to {}", describe(&expected), describe(&args)),
            );
        }
    }
}

fn describe(sig: &[(SpaceKind, usize)]) -> String {
    let parts: Vec<_> = sig
        .iter()
        .map(|(k, d)| match k {
            SpaceKind::Coin => format!("coin/{d}"),
            SpaceKind::Principal => format!("system/{d}"),
        })
        .collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk_tables() -> (GateLibrary, Spaces) {
        let spaces = Spaces::new(vec![SpaceSpec::coin("d", &["L", "R"]), SpaceSpec::ring("p", 4)]);
        let mut g = GateLibrary::new();
        g.declare("H", &["d"], GateDef::Hadamard, &spaces).unwrap();
        g.declare("TL", &["p"], GateDef::Shift(-1), &spaces).unwrap();
        g.declare("TR", &["p"], GateDef::Shift(1), &spaces).unwrap();
        (g, spaces)
    }

    fn rhw_body() -> Program {
        let d = CoinRef::new("d");
        desugar_choice(
            Program::unitary("H", &[d.clone()], &[]),
            d,
            vec![
                ("L".into(), Program::unitary("TL", &[], &["p"])),
                ("R".into(), Program::seq(Program::unitary("TR", &[], &["p"]), Program::call("X"))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn recursive_walk_is_well_formed() {
        let (g, s) = walk_tables();
        let d = Declaration::new([("X".to_string(), rhw_body())].into_iter().collect(), Program::call("X"));
        let r = validate(&d, &g, &s);
        assert!(r.is_ok(), "{:?}", r);
        assert_eq!(free_coins(&rhw_body()), ["d".to_string()].into_iter().collect());
        assert!(free_coins(&Program::Abort).is_empty());
    }

    #[test]
    fn guard_in_branch_and_overlap_are_reported() {
        let (g, s) = walk_tables();
        let d0 = CoinRef::new("d");
        let bad = Program::Qif { guard: d0.clone(), branches: vec![("L".into(), Program::unitary("H", &[d0.clone()], &[]))] };
        let d = Declaration::new([("X".to_string(), bad)].into_iter().collect(), Program::unitary("H", &[d0], &[]));
        let r = validate(&d, &g, &s);
        assert!(r.has(ViolationKind::GuardCoinInBranch));
        assert!(r.has(ViolationKind::MainDeclarationCoinOverlap));
    }

    #[test]
    fn unknown_things_and_dimension_errors() {
        let (g, s) = walk_tables();
        let d0 = CoinRef::new("d");
        let main = Program::seq(
            Program::unitary("H", &[], &["p"]),
            Program::seq(
                Program::call("Y"),
                Program::Qif { guard: d0, branches: vec![("U".into(), Program::unitary("Q", &[], &["p"]))] },
            ),
        );
        let r = validate(&Declaration::new(IndexMap::new(), main), &g, &s);
        for k in [ViolationKind::DimensionMismatch, ViolationKind::UnknownIdentifier, ViolationKind::UnknownLabel, ViolationKind::UnknownGate] {
            assert!(r.has(k), "missing {k:?} in {r:?}");
        }
    }

    #[test]
    fn non_unitary_gate_is_flagged() {
        let (mut g, s) = walk_tables();
        let z = Complex::new(0.0, 0.0);
        let o = Complex::new(1.0, 0.0);
        g.declare("P", &["d"], GateDef::Matrix(vec![vec![o, o], vec![z, o]]), &s).unwrap();
        let r = validate(&Declaration::new(IndexMap::new(), Program::Skip), &g, &s);
        assert!(r.has(ViolationKind::NonUnitaryGate));
    }

    #[test]
    fn seq_power_is_right_nested() {
        let p = Program::call("X");
        assert_eq!(seq_power(&p, 1).unwrap(), p);
        assert_eq!(
            seq_power(&p, 3).unwrap(),
            Program::seq(p.clone(), Program::seq(p.clone(), p.clone()))
        );
        assert_eq!(seq_power(&p, 0), Err(LangError::ZeroPower));
    }

    #[test]
    fn choice_keeps_identity_coin_program_and_rejects_principal_access() {
        let d = CoinRef::new("d");
        let out = desugar_choice(Program::unitary("I", &[d.clone()], &[]), d.clone(), vec![]).unwrap();
        assert!(matches!(out, Program::Seq(ref a, _) if **a == Program::unitary("I", &[d.clone()], &[])));
        assert!(desugar_choice(Program::unitary("TL", &[], &["p"]), d, vec![]).is_err());
    }

    #[test]
    fn builtin_gates_have_expected_shape() {
        let (g, _) = walk_tables();
        let tl = g.get("TL").unwrap().matrix::<f64>().unwrap();
        // position -4 (index 0) wraps to +4 (index 8)
        assert_eq!(tl[(8, 0)], Complex::new(1.0, 0.0));
        assert_eq!(tl[(0, 1)], Complex::new(1.0, 0.0));
        let spaces = Spaces::new(vec![SpaceSpec { kind: SpaceKind::Coin, name: "t".into(), shape: SpaceShape::Basis(vec!["a".into(), "b".into(), "c".into()]) }]);
        let mut lib = GateLibrary::new();
        lib.declare("F", &["t"], GateDef::Fourier(3), &spaces).unwrap();
        assert!(lib.is_unitary("F"));
    }
}
