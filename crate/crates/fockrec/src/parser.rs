//! Surface syntax: lexer, recursive-descent parser and canonical printer.
//!
//! ```text
//! coin d : basis {L, R};
//! system p : ring 16;
//! gate H on (d) = hadamard;
//! gate TL on (p) = shift -1;
//! gate TR on (p) = shift 1;
//! proc X <= TL[p] (+)[H[d]] (TR[p]; X);
//! main = X;
//! ```
//!
//! `;` is right-associative, the quantum choice `(+)[G[c]]` binds looser than
//! `;`, and `^n` binds tightest. Choices and powers are desugared while
//! parsing, so the printer only ever emits the core forms.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use indexmap::IndexMap;
use num_complex::Complex;
use thiserror::Error;

use crate::lang::{
    desugar_choice, seq_power, CoinRef, Declaration, GateDef, GateLibrary, LangError, Program, Scope,
    SpaceKind, SpaceShape, SpaceSpec, Spaces,
};

/// One-based line and column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

/// A parsed source file.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceModule {
    pub spaces: Spaces,
    pub gates: GateLibrary,
    pub decl: Declaration,
    /// Where each declaration starts, for diagnostics.
    pub locations: HashMap<Scope, Pos>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Id(String),
    Int(u64),
    Num(f64),
    Imag(f64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Id(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Num(x) => write!(f, "`{x}`"),
            Tok::Imag(x) => write!(f, "`{x}i`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

// Longest first so that prefixes do not shadow longer symbols.
const SYMBOLS: &[&str] = &[
    "(+)", "<=", "->", "[]", "⊕", "(", ")", "[", "]", "{", "}", ";", ",", ":", "=", "|", ">", "^", "+", "-", "*", "/",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    'outer: while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            out.push((Tok::Id(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut float = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            if i < chars.len() && chars[i] == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit) {
                float = true;
                advance(&mut i, &mut line, &mut col, 1, &chars);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(&mut i, &mut line, &mut col, 1, &chars);
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if chars.get(j).is_some_and(char::is_ascii_digit) {
                    float = true;
                    let n = j - i;
                    advance(&mut i, &mut line, &mut col, n, &chars);
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        advance(&mut i, &mut line, &mut col, 1, &chars);
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let imag = i < chars.len() && chars[i] == 'i' && !chars.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_');
            let bad = || ParseError { pos, message: format!("malformed number `{text}`") };
            if imag {
                advance(&mut i, &mut line, &mut col, 1, &chars);
                out.push((Tok::Imag(text.parse().map_err(|_| bad())?), pos));
            } else if float {
                out.push((Tok::Num(text.parse().map_err(|_| bad())?), pos));
            } else {
                out.push((Tok::Int(text.parse().map_err(|_| bad())?), pos));
            }
            continue;
        }
        for sym in SYMBOLS {
            let n = sym.chars().count();
            if chars[i..].iter().take(n).copied().eq(sym.chars()) {
                advance(&mut i, &mut line, &mut col, n, &chars);
                let canon = if *sym == "⊕" { "(+)" } else { sym };
                out.push((Tok::Sym(canon), pos));
                continue 'outer;
            }
        }
        return Err(ParseError { pos, message: format!("unexpected character `{c}`") });
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    spaces: Spaces,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { pos: self.pos(), message: message.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Id(x) if x == kw)
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Id(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {t}")),
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            t => self.err(format!("expected integer, found {t}")),
        }
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = if self.is_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        let n = self.int()? as i64;
        Ok(if neg { -n } else { n })
    }

    fn label(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Id(s) => {
                self.bump();
                Ok(s)
            }
            Tok::Int(n) => {
                self.bump();
                Ok(n.to_string())
            }
            t => self.err(format!("expected basis label, found {t}")),
        }
    }

    fn module(&mut self) -> PResult<SourceModule> {
        let mut gates = GateLibrary::new();
        let mut equations = IndexMap::new();
        let mut locations = HashMap::new();
        let mut main = None;
        loop {
            let start = self.pos();
            if self.is_kw("coin") || self.is_kw("system") {
                let spec = self.space_decl()?;
                if self.spaces.get(&spec.name).is_some() {
                    return Err(ParseError { pos: start, message: format!("duplicate declaration of `{}`", spec.name) });
                }
                locations.insert(Scope::Space(spec.name.clone()), start);
                self.spaces.push(spec);
            } else if self.is_kw("gate") {
                self.bump();
                let name_pos = self.pos();
                let name = self.ident()?;
                self.expect_kw("on")?;
                self.expect_sym("(")?;
                let mut on = vec![(self.pos(), self.ident()?)];
                while self.is_sym(",") {
                    self.bump();
                    on.push((self.pos(), self.ident()?));
                }
                self.expect_sym(")")?;
                self.expect_sym("=")?;
                let def = self.gate_expr()?;
                self.expect_sym(";")?;
                if let Some((p, s)) = on.iter().find(|(_, s)| self.spaces.get(s).is_none()) {
                    return Err(ParseError { pos: *p, message: format!("unknown space `{s}` in gate signature") });
                }
                let names: Vec<&str> = on.iter().map(|(_, s)| s.as_str()).collect();
                gates.declare(&name, &names, def, &self.spaces).map_err(|e| ParseError {
                    pos: name_pos,
                    message: e.to_string(),
                })?;
                locations.insert(Scope::Gate(name), start);
            } else if self.is_kw("proc") {
                self.bump();
                let name_pos = self.pos();
                let name = self.ident()?;
                self.expect_sym("<=")?;
                let body = self.prog()?;
                self.expect_sym(";")?;
                if equations.contains_key(&name) {
                    return Err(ParseError { pos: name_pos, message: format!("duplicate declaration of `{name}`") });
                }
                locations.insert(Scope::Proc(name.clone()), start);
                equations.insert(name, body);
            } else if self.is_kw("main") {
                if main.is_some() {
                    return self.err("duplicate declaration of `main`");
                }
                self.bump();
                self.expect_sym("=")?;
                let body = self.prog()?;
                self.expect_sym(";")?;
                locations.insert(Scope::Main, start);
                main = Some(body);
            } else if *self.peek() == Tok::Eof {
                break;
            } else {
                return self.err(format!("expected a declaration, found {}", self.peek()));
            }
        }
        let Some(main) = main else {
            return self.err("missing `main = ...;` statement");
        };
        Ok(SourceModule { spaces: self.spaces.clone(), gates, decl: Declaration::new(equations, main), locations })
    }

    fn space_decl(&mut self) -> PResult<SpaceSpec> {
        let is_coin = self.is_kw("coin");
        self.bump();
        let name = self.ident()?;
        self.expect_sym(":")?;
        if is_coin {
            self.expect_kw("basis")?;
            self.expect_sym("{")?;
            let mut labels = vec![self.label()?];
            while self.is_sym(",") {
                self.bump();
                labels.push(self.label()?);
            }
            self.expect_sym("}")?;
            self.expect_sym(";")?;
            return Ok(SpaceSpec { kind: SpaceKind::Coin, name, shape: SpaceShape::Basis(labels) });
        }
        let shape = if self.is_kw("ring") {
            self.bump();
            SpaceShape::Ring(self.int()? as i64)
        } else if self.is_kw("dim") {
            self.bump();
            let p = self.pos();
            let n = self.int()? as usize;
            if n == 0 {
                return Err(ParseError { pos: p, message: "dimension must be positive".into() });
            }
            SpaceShape::Dim(n)
        } else {
            return self.err(format!("expected `ring` or `dim`, found {}", self.peek()));
        };
        self.expect_sym(";")?;
        Ok(SpaceSpec { kind: SpaceKind::Principal, name, shape })
    }

    fn gate_expr(&mut self) -> PResult<GateDef> {
        let Tok::Id(kw) = self.peek().clone() else {
            return self.err(format!("expected a gate expression, found {}", self.peek()));
        };
        self.bump();
        Ok(match kw.as_str() {
            "hadamard" => GateDef::Hadamard,
            "identity" => GateDef::Identity,
            "fourier" => GateDef::Fourier(self.int()? as usize),
            "shift" => GateDef::Shift(self.signed_int()?),
            "matrix" => {
                self.expect_sym("[")?;
                let mut rows = vec![self.matrix_row()?];
                while self.is_sym(";") {
                    self.bump();
                    rows.push(self.matrix_row()?);
                }
                self.expect_sym("]")?;
                GateDef::Matrix(rows)
            }
            other => return self.err(format!("unknown gate expression `{other}`")),
        })
    }

    fn matrix_row(&mut self) -> PResult<Vec<Complex<f64>>> {
        let mut row = vec![self.cexpr()?];
        while self.is_sym(",") {
            self.bump();
            row.push(self.cexpr()?);
        }
        Ok(row)
    }

    // Complex arithmetic for matrix entries: sums of products of numbers,
    // imaginary literals, `i`, `sqrt(..)`, `exp(..)` and parentheses.
    fn cexpr(&mut self) -> PResult<Complex<f64>> {
        let mut acc = if self.is_sym("-") {
            self.bump();
            -self.cterm()?
        } else {
            if self.is_sym("+") {
                self.bump();
            }
            self.cterm()?
        };
        loop {
            if self.is_sym("+") {
                self.bump();
                acc += self.cterm()?;
            } else if self.is_sym("-") {
                self.bump();
                acc -= self.cterm()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn cterm(&mut self) -> PResult<Complex<f64>> {
        let mut acc = self.cfactor()?;
        loop {
            if self.is_sym("*") {
                self.bump();
                acc *= self.cfactor()?;
            } else if self.is_sym("/") {
                self.bump();
                acc /= self.cfactor()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn cfactor(&mut self) -> PResult<Complex<f64>> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Complex::new(n as f64, 0.0))
            }
            Tok::Num(x) => {
                self.bump();
                Ok(Complex::new(x, 0.0))
            }
            Tok::Imag(x) => {
                self.bump();
                Ok(Complex::new(0.0, x))
            }
            Tok::Id(s) if s == "i" => {
                self.bump();
                Ok(Complex::i())
            }
            Tok::Id(s) if s == "pi" => {
                self.bump();
                Ok(Complex::new(std::f64::consts::PI, 0.0))
            }
            Tok::Id(s) if s == "sqrt" || s == "exp" => {
                self.bump();
                self.expect_sym("(")?;
                let z = self.cexpr()?;
                self.expect_sym(")")?;
                Ok(if s == "sqrt" { z.sqrt() } else { z.exp() })
            }
            Tok::Sym("(") => {
                self.bump();
                let z = self.cexpr()?;
                self.expect_sym(")")?;
                Ok(z)
            }
            Tok::Sym("-") => {
                self.bump();
                Ok(-self.cfactor()?)
            }
            t => self.err(format!("expected a matrix entry, found {t}")),
        }
    }

    fn prog(&mut self) -> PResult<Program> {
        let lhs = self.seq()?;
        if !self.is_sym("(+)") {
            return Ok(lhs);
        }
        let pos = self.pos();
        self.bump();
        self.expect_sym("[")?;
        let gate = self.ident()?;
        self.expect_sym("[")?;
        let coin = self.ident()?;
        self.expect_sym("]")?;
        self.expect_sym("]")?;
        let rhs = self.prog()?;
        let Some(spec) = self.spaces.coin(&coin) else {
            return Err(ParseError { pos, message: format!("`{coin}` is not a declared coin") });
        };
        let labels = spec.labels();
        if labels.len() < 2 {
            return Err(ParseError { pos, message: format!("coin `{coin}` has fewer than two basis states") });
        }
        let guard = CoinRef::new(&coin);
        let coin_prog = Program::unitary(&gate, &[guard.clone()], &[]);
        desugar_choice(coin_prog, guard, vec![(labels[0].clone(), lhs), (labels[1].clone(), rhs)])
            .map_err(|e: LangError| ParseError { pos, message: e.to_string() })
    }

    fn seq(&mut self) -> PResult<Program> {
        let first = self.postfix()?;
        // A `;` followed by a declaration keyword or the end ends the statement.
        if self.is_sym(";") && self.starts_program(1) {
            self.bump();
            let rest = self.seq()?;
            return Ok(Program::seq(first, rest));
        }
        Ok(first)
    }

    fn starts_program(&self, k: usize) -> bool {
        match self.peek_at(k) {
            Tok::Id(s) => !matches!(s.as_str(), "proc" | "main" | "gate" | "coin" | "system" | "fiq"),
            Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn postfix(&mut self) -> PResult<Program> {
        let mut p = self.atom()?;
        while self.is_sym("^") {
            self.bump();
            let pos = self.pos();
            let n = self.int()? as usize;
            p = seq_power(&p, n).map_err(|e| ParseError { pos, message: e.to_string() })?;
        }
        Ok(p)
    }

    fn atom(&mut self) -> PResult<Program> {
        if self.is_sym("(") {
            self.bump();
            let p = self.prog()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        let Tok::Id(word) = self.peek().clone() else {
            return self.err(format!("expected a program, found {}", self.peek()));
        };
        match word.as_str() {
            "abort" => {
                self.bump();
                Ok(Program::Abort)
            }
            "skip" => {
                self.bump();
                Ok(Program::Skip)
            }
            "qif" => self.qif(),
            w if is_keyword(w) => self.err(format!("expected a program, found `{w}`")),
            _ => {
                self.bump();
                if !self.is_sym("[") {
                    return Ok(Program::Call(word));
                }
                self.bump();
                let mut args = vec![(self.pos(), self.ident()?)];
                while self.is_sym(",") {
                    self.bump();
                    args.push((self.pos(), self.ident()?));
                }
                self.expect_sym("]")?;
                let mut coins = Vec::new();
                let mut systems = Vec::new();
                for (pos, a) in args {
                    if self.spaces.coin(&a).is_some() {
                        if !systems.is_empty() {
                            return Err(ParseError { pos, message: "coin arguments must precede system arguments".into() });
                        }
                        coins.push(CoinRef::new(&a));
                    } else {
                        systems.push(a);
                    }
                }
                Ok(Program::Unitary { gate: word, coins, systems })
            }
        }
    }

    fn qif(&mut self) -> PResult<Program> {
        self.expect_kw("qif")?;
        self.expect_sym("[")?;
        let guard = CoinRef::new(&self.ident()?);
        self.expect_sym("]")?;
        let mut branches = vec![self.branch()?];
        loop {
            if self.is_sym("[]") {
                self.bump();
            } else if self.is_sym("[") && matches!(self.peek_at(1), Tok::Sym("]")) {
                self.bump();
                self.bump();
            } else {
                break;
            }
            branches.push(self.branch()?);
        }
        self.expect_kw("fiq")?;
        Ok(Program::Qif { guard, branches })
    }

    fn branch(&mut self) -> PResult<(String, Program)> {
        self.expect_sym("|")?;
        let label = self.label()?;
        self.expect_sym(">")?;
        self.expect_sym("->")?;
        Ok((label, self.prog()?))
    }
}

const KEYWORDS: &[&str] = &["abort", "skip", "qif", "fiq", "proc", "main", "gate", "coin", "system", "on"];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses a complete source file.
pub fn parse(src: &str) -> Result<SourceModule, ParseError> {
    let toks = lex(src)?;
    Parser { toks, at: 0, spaces: Spaces::default() }.module()
}

/// Parses a single program against an existing space table.
pub fn parse_program(src: &str, spaces: &Spaces) -> Result<Program, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, spaces: spaces.clone() };
    let prog = p.prog()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after program", p.peek()));
    }
    Ok(prog)
}

fn print_coin(out: &mut String, c: &CoinRef) {
    out.push_str(&c.coin);
    if c.copy != 0 {
        let _ = write!(out, "@{}", c.copy);
    }
}

fn print_prog(out: &mut String, p: &Program, nested: bool) {
    match p {
        Program::Abort => out.push_str("abort"),
        Program::Skip => out.push_str("skip"),
        Program::Call(x) => out.push_str(x),
        Program::Unitary { gate, coins, systems } => {
            out.push_str(gate);
            out.push('[');
            let mut first = true;
            for c in coins {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                print_coin(out, c);
            }
            for s in systems {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                out.push_str(s);
            }
            out.push(']');
        }
        Program::Seq(a, b) => {
            if nested {
                out.push('(');
            }
            print_prog(out, a, true);
            out.push_str("; ");
            print_prog(out, b, false);
            if nested {
                out.push(')');
            }
        }
        Program::Qif { guard, branches } => {
            out.push_str("qif [");
            print_coin(out, guard);
            out.push(']');
            for (k, (label, body)) in branches.iter().enumerate() {
                out.push_str(if k == 0 { " |" } else { " [] |" });
                out.push_str(label);
                out.push_str("> -> ");
                print_prog(out, body, false);
            }
            out.push_str(" fiq");
        }
    }
}

/// Canonical text of a program. Generalised copies print as `c@k`, which the
/// parser does not accept.
pub fn print_program(p: &Program) -> String {
    let mut s = String::new();
    print_prog(&mut s, p, false);
    s
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_program(self))
    }
}

/// Procedure equations followed by the main statement.
pub fn pretty_print(d: &Declaration) -> String {
    let mut s = String::new();
    for (name, body) in &d.equations {
        let _ = writeln!(s, "proc {name} <= {body};");
    }
    let _ = writeln!(s, "main = {};", d.main);
    s
}

fn print_complex(z: Complex<f64>) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => format!("{:?}", z.re),
        (true, false) => format!("{:?}i", z.im),
        (false, false) if z.im < 0.0 => format!("{:?}-{:?}i", z.re, -z.im),
        (false, false) => format!("{:?}+{:?}i", z.re, z.im),
    }
}

/// Whole source file: spaces, gates, procedures, main.
pub fn print_module(m: &SourceModule) -> String {
    let mut s = String::new();
    for spec in m.spaces.all() {
        match &spec.shape {
            SpaceShape::Basis(l) => {
                let _ = writeln!(s, "coin {} : basis {{{}}};", spec.name, l.join(", "));
            }
            SpaceShape::Ring(w) => {
                let _ = writeln!(s, "system {} : ring {w};", spec.name);
            }
            SpaceShape::Dim(n) => {
                let _ = writeln!(s, "system {} : dim {n};", spec.name);
            }
        }
    }
    for g in m.gates.iter() {
        let on: Vec<&str> = g.signature.iter().map(|x| x.space.as_str()).collect();
        let def = match &g.def {
            GateDef::Hadamard => "hadamard".to_string(),
            GateDef::Identity => "identity".to_string(),
            GateDef::Fourier(n) => format!("fourier {n}"),
            GateDef::Shift(k) => format!("shift {k}"),
            GateDef::Matrix(rows) => {
                let rows: Vec<String> =
                    rows.iter().map(|r| r.iter().map(|&z| print_complex(z)).collect::<Vec<_>>().join(", ")).collect();
                format!("matrix [{}]", rows.join("; "))
            }
        };
        let _ = writeln!(s, "gate {} on ({}) = {def};", g.name, on.join(", "));
    }
    s.push_str(&pretty_print(&m.decl));
    s
}
