//! Independent reference computations: a configuration-rewriting simulator
//! that never builds Fock blocks, and closed-form semantics of the recursive
//! walks and the quantum loop.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::fock::{FockError, FockOperator, FockSpace, OccVec};
use crate::lang::{CoinRef, LangError, Program};
use crate::linalg::{Dense, Sparse};
use crate::parser::SourceModule;
use crate::scalar::{binomial, Amp, Real};

pub use crate::fock::{compare, CompareReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("fixture lacks {0}")]
    Missing(String),
    #[error("closed form expects {0}")]
    Shape(String),
    #[error("unknown label `{label}` for `{space}`")]
    UnknownLabel { space: String, label: String },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Lang(#[from] LangError),
}

type OResult<T> = Result<T, OracleError>;

// ---------------------------------------------------------------------------
// Configuration simulator

/// One branch of a superposition of configurations. The residual program is
/// a stack of statements (top last), each with the per-coin copy offset of
/// the frame it runs in.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration<T> {
    pub amplitude: Amp<T>,
    pub residual: Vec<(Program, Vec<usize>)>,
    /// Basis label index of every written copy, keyed by (coin, copy).
    pub coins: BTreeMap<(usize, usize), usize>,
    /// Copies the program has accessed so far, per coin.
    pub used: Vec<usize>,
    /// Principal basis index.
    pub principal: usize,
}

impl<T: Real> Configuration<T> {
    pub fn is_terminated(&self) -> bool {
        self.residual.is_empty()
    }
}

type ConfigKey = (Vec<(Program, Vec<usize>)>, BTreeMap<(usize, usize), usize>, Vec<usize>, usize);

/// Initial coin copies and principal basis state for [`Simulator::run`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SimInit {
    /// Labels of the leading copies of each named coin; every other copy
    /// starts in the coin's first basis state.
    pub coins: Vec<(String, Vec<String>)>,
    /// Label of each principal system; missing systems start at label `0`
    /// if it exists, else at the first label.
    pub principal: Vec<(String, String)>,
}

/// Rewrites configurations one quantum case at a time.
pub struct Simulator<T> {
    module: SourceModule,
    coins: Vec<(String, Vec<String>)>,
    systems: Vec<(String, Vec<String>)>,
    gates: HashMap<String, Dense<T>>,
    /// Statements executed in one step before a branch is declared divergent.
    pub fuel: usize,
}

impl<T: Real> Simulator<T> {
    pub fn new(module: &SourceModule) -> OResult<Self> {
        let used = module.decl.all_coins();
        let coins = module.spaces.coins().filter(|c| used.contains(&c.name)).map(|c| (c.name.clone(), c.labels())).collect();
        let systems = module.spaces.systems().map(|s| (s.name.clone(), s.labels())).collect();
        let mut gates = HashMap::new();
        for g in module.gates.iter() {
            gates.insert(g.name.clone(), g.matrix::<T>()?);
        }
        Ok(Simulator { module: module.clone(), coins, systems, gates, fuel: 100_000 })
    }

    fn coin(&self, name: &str) -> usize {
        self.coins.iter().position(|(n, _)| n == name).expect("validated coin")
    }

    fn principal_dim(&self) -> usize {
        self.systems.iter().map(|(_, l)| l.len()).product()
    }

    fn system_stride(&self, k: usize) -> usize {
        self.systems[k + 1..].iter().map(|(_, l)| l.len()).product()
    }

    pub fn initial(&self, init: &SimInit) -> OResult<Configuration<T>> {
        let mut coins = BTreeMap::new();
        for (name, labels) in &init.coins {
            let c = self.coins.iter().position(|(n, _)| n == name).ok_or_else(|| OracleError::Missing(format!("coin `{name}`")))?;
            for (k, l) in labels.iter().enumerate() {
                let i = self.coins[c].1.iter().position(|x| x == l).ok_or_else(|| OracleError::UnknownLabel { space: name.clone(), label: l.clone() })?;
                coins.insert((c, k), i);
            }
        }
        let mut principal = 0;
        for (k, (name, labels)) in self.systems.iter().enumerate() {
            let idx = match init.principal.iter().find(|(s, _)| s == name) {
                Some((_, l)) => labels.iter().position(|x| x == l).ok_or_else(|| OracleError::UnknownLabel { space: name.clone(), label: l.clone() })?,
                None => labels.iter().position(|x| x == "0").unwrap_or(0),
            };
            principal += idx * self.system_stride(k);
        }
        Ok(Configuration {
            amplitude: Amp::one(),
            residual: vec![(self.module.decl.main.clone(), vec![0; self.coins.len()])],
            coins,
            used: vec![0; self.coins.len()],
            principal,
        })
    }

    /// The superposition after each of `depth` steps, starting with the
    /// initial configuration as step 0.
    pub fn run(&self, init: &SimInit, depth: usize) -> OResult<Vec<Vec<Configuration<T>>>> {
        let mut cur = vec![self.initial(init)?];
        let mut steps = vec![cur.clone()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for cfg in cur {
                if cfg.is_terminated() {
                    next.push(cfg);
                } else {
                    let mut fuel = self.fuel;
                    self.advance(cfg, false, &mut fuel, &mut next);
                }
            }
            cur = merge(next);
            steps.push(cur.clone());
        }
        Ok(steps)
    }

    /// Executes statements until one qif has chosen its branch and the
    /// branch has run up to the next coin operation, call or qif.
    fn advance(&self, mut cfg: Configuration<T>, mut branched: bool, fuel: &mut usize, out: &mut Vec<Configuration<T>>) {
        loop {
            if *fuel == 0 {
                return;
            }
            *fuel -= 1;
            let Some((p, frame)) = cfg.residual.pop() else {
                out.push(cfg);
                return;
            };
            match p {
                Program::Skip => {}
                Program::Abort => return,
                Program::Seq(a, b) => {
                    cfg.residual.push((*b, frame.clone()));
                    cfg.residual.push((*a, frame));
                }
                Program::Call(ref x) => {
                    if branched {
                        cfg.residual.push((p, frame));
                        out.push(cfg);
                        return;
                    }
                    let body = self.module.decl.equations.get(x).expect("validated call").clone();
                    cfg.residual.push((body, frame));
                }
                Program::Qif { ref guard, ref branches } => {
                    if branched {
                        cfg.residual.push((p, frame));
                        out.push(cfg);
                        return;
                    }
                    let c = self.coin(&guard.coin);
                    let slot = frame[c] + guard.copy;
                    cfg.used[c] = cfg.used[c].max(slot + 1);
                    let label = cfg.coins.get(&(c, slot)).copied().unwrap_or(0);
                    let name = &self.coins[c].1[label];
                    let Some((_, body)) = branches.iter().find(|(l, _)| l == name) else { return };
                    let mut inner = frame;
                    inner[c] = slot + 1;
                    cfg.residual.push((body.clone(), inner));
                    branched = true;
                }
                Program::Unitary { ref gate, ref coins, ref systems } => {
                    if branched && !coins.is_empty() {
                        cfg.residual.push((p, frame));
                        out.push(cfg);
                        return;
                    }
                    for succ in self.apply_gate(&cfg, gate, coins, systems, &frame) {
                        self.advance(succ, branched, fuel, out);
                    }
                    return;
                }
            }
        }
    }

    fn apply_gate(&self, cfg: &Configuration<T>, gate: &str, coins: &[CoinRef], systems: &[String], frame: &[usize]) -> Vec<Configuration<T>> {
        let g = &self.gates[gate];
        let slots: Vec<(usize, usize)> = coins.iter().map(|r| (self.coin(&r.coin), frame[self.coin(&r.coin)] + r.copy)).collect();
        let sys: Vec<usize> = systems.iter().map(|s| self.systems.iter().position(|(n, _)| n == s).expect("validated system")).collect();
        let mut dims = Vec::new();
        let mut digits = Vec::new();
        for &(c, s) in &slots {
            dims.push(self.coins[c].1.len());
            digits.push(cfg.coins.get(&(c, s)).copied().unwrap_or(0));
        }
        for &k in &sys {
            let d = self.systems[k].1.len();
            dims.push(d);
            digits.push((cfg.principal / self.system_stride(k)) % d);
        }
        let col = digits.iter().zip(&dims).fold(0, |acc, (x, d)| acc * d + x);
        let mut out = Vec::new();
        for row in 0..g.rows() {
            let a = g[(row, col)];
            if a.is_zero() {
                continue;
            }
            let mut next = cfg.clone();
            next.amplitude = cfg.amplitude * a;
            let mut rest = row;
            let mut new_digits = vec![0; dims.len()];
            for (i, d) in dims.iter().enumerate().rev() {
                new_digits[i] = rest % d;
                rest /= d;
            }
            for (i, &(c, s)) in slots.iter().enumerate() {
                next.coins.insert((c, s), new_digits[i]);
                next.used[c] = next.used[c].max(s + 1);
            }
            for (j, &k) in sys.iter().enumerate() {
                let st = self.system_stride(k);
                let d = self.systems[k].1.len();
                let old = (next.principal / st) % d;
                next.principal = next.principal - old * st + new_digits[slots.len() + j] * st;
            }
            out.push(next);
        }
        out
    }

    /// Residual program with copies made absolute; `E` once terminated.
    pub fn residual_text(&self, cfg: &Configuration<T>) -> String {
        if cfg.residual.is_empty() {
            return "E".to_string();
        }
        let parts: Vec<String> = cfg
            .residual
            .iter()
            .rev()
            .map(|(p, frame)| {
                let mut q = p.clone();
                for (c, &off) in frame.iter().enumerate() {
                    for _ in 0..off {
                        q = crate::semantics::shift_copies(&q, &self.coins[c].0, 0);
                    }
                }
                q.to_string()
            })
            .collect();
        parts.join("; ")
    }

    /// Labels of copies `0..used` of each coin.
    pub fn coin_labels(&self, cfg: &Configuration<T>) -> Vec<Vec<String>> {
        (0..self.coins.len())
            .map(|c| {
                let top = cfg.coins.range((c, 0)..(c + 1, 0)).map(|((_, s), _)| s + 1).max().unwrap_or(0).max(cfg.used[c]);
                (0..top).map(|s| self.coins[c].1[cfg.coins.get(&(c, s)).copied().unwrap_or(0)].clone()).collect()
            })
            .collect()
    }

    pub fn principal_label(&self, cfg: &Configuration<T>) -> String {
        self.systems
            .iter()
            .enumerate()
            .map(|(k, (_, l))| l[(cfg.principal / self.system_stride(k)) % l.len()].clone())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn config_json(&self, cfg: &Configuration<T>) -> Value {
        let labels = self.coin_labels(cfg);
        let coins = if labels.len() == 1 {
            json!(labels[0])
        } else {
            let m: serde_json::Map<String, Value> = self.coins.iter().zip(&labels).map(|((n, _), l)| (n.clone(), json!(l))).collect();
            Value::Object(m)
        };
        let mut obj = json!({
            "amplitude": [cfg.amplitude.re.as_f64(), cfg.amplitude.im.as_f64()],
            "coins": coins,
            "residual": self.residual_text(cfg),
        });
        let label = self.principal_label(cfg);
        match (self.systems.len(), label.parse::<i64>()) {
            (1, Ok(x)) if self.module.spaces.get(&self.systems[0].0).and_then(|s| s.ring_width()).is_some() => obj["position"] = json!(x),
            _ => obj["principal"] = json!(label),
        }
        obj
    }

    pub fn trace_json(&self, steps: &[Vec<Configuration<T>>]) -> Value {
        Value::Array(steps.iter().map(|s| Value::Array(s.iter().map(|c| self.config_json(c)).collect())).collect())
    }

    /// Terminated configurations as exact-occupation vectors of `space`
    /// (which must list the same coins and systems in the same order).
    pub fn terminated_vectors(&self, configs: &[Configuration<T>], space: &FockSpace) -> BTreeMap<OccVec, Vec<Amp<T>>> {
        let mut out: BTreeMap<OccVec, Vec<Amp<T>>> = BTreeMap::new();
        for cfg in configs.iter().filter(|c| c.is_terminated()) {
            let n = OccVec(cfg.used.clone());
            let mut idx = 0;
            for (c, &k) in cfg.used.iter().enumerate() {
                for s in 0..k {
                    idx = idx * space.coin_dim(c) + cfg.coins.get(&(c, s)).copied().unwrap_or(0);
                }
            }
            idx = idx * space.principal_dim() + cfg.principal;
            let v = out.entry(n.clone()).or_insert_with(|| vec![Amp::zero(); space.block_dim(&n)]);
            v[idx] = v[idx] + cfg.amplitude;
        }
        out
    }

    /// Total squared amplitude of a superposition.
    pub fn weight(configs: &[Configuration<T>]) -> T {
        configs.iter().map(|c| c.amplitude.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }

    pub fn principal_dims(&self) -> usize {
        self.principal_dim()
    }
}

/// Sums amplitudes of equal configurations and drops those that cancel.
fn merge<T: Real>(configs: Vec<Configuration<T>>) -> Vec<Configuration<T>> {
    let mut order: Vec<ConfigKey> = Vec::new();
    let mut acc: HashMap<ConfigKey, Configuration<T>> = HashMap::new();
    for c in configs {
        let key = (c.residual.clone(), c.coins.clone(), c.used.clone(), c.principal);
        match acc.get_mut(&key) {
            Some(e) => e.amplitude = e.amplitude + c.amplitude,
            None => {
                order.push(key.clone());
                acc.insert(key, c);
            }
        }
    }
    let tiny = T::zero_threshold();
    order.into_iter().filter_map(|k| acc.remove(&k)).filter(|c| c.amplitude.norm() > tiny).collect()
}

// ---------------------------------------------------------------------------
// Closed forms

/// Coin toss and translations of a Hadamard walk fixture.
#[derive(Clone, Debug)]
pub struct WalkGates<T> {
    pub h: Dense<T>,
    pub tl: Dense<T>,
    pub tr: Dense<T>,
}

impl<T: Real> WalkGates<T> {
    /// Reads gates `H`, `TL` and `TR`.
    pub fn from_module(m: &SourceModule) -> OResult<Self> {
        let get = |n: &str| -> OResult<Dense<T>> { Ok(m.gates.get(n).ok_or_else(|| OracleError::Missing(format!("gate `{n}`")))?.matrix()?) };
        Ok(WalkGates { h: get("H")?, tl: get("TL")?, tr: get("TR")? })
    }
}

fn one_coin(space: &FockSpace, dim: usize) -> OResult<()> {
    if space.coins().len() != 1 || space.coin_dim(0) != dim {
        return Err(OracleError::Shape(format!("a single coin of dimension {dim}")));
    }
    Ok(())
}

fn kron_all<T: Real>(ms: &[Sparse<T>]) -> Sparse<T> {
    ms.iter().fold(Sparse::identity(1), |acc, m| acc.kron(m))
}

/// `|σ₀⟩⟨σ₀| ⊗ … ⊗ |σ_{n−1}⟩⟨σ_{n−1}|` for a string of basis indices.
fn string_projector<T: Real>(s: &[usize], d: usize) -> Sparse<T> {
    let idx = s.iter().fold(0, |acc, &x| acc * d + x);
    let size = d.pow(s.len() as u32);
    Sparse::from_triplets(size, size, vec![(idx, idx, Amp::one())])
}

fn tensor_power<T: Real>(m: &Dense<T>, k: usize) -> Sparse<T> {
    kron_all(&vec![m.to_sparse(); k])
}

fn block_of<T: Real>(coin_part: &Sparse<T>, principal: &Dense<T>, toss: &Dense<T>, k: usize) -> Sparse<T> {
    coin_part.matmul(&tensor_power(toss, k)).kron(&principal.to_sparse())
}

const L: usize = 0;
const R: usize = 1;

/// `Σ_{i<n} (|R⟩⟨R|^{⊗i} ⊗ |L⟩⟨L|) H^{⊗(i+1)} ⊗ T_L T_Rⁱ`, the `n`th
/// approximation of the unidirectional walk; blocks beyond the truncation
/// are omitted.
pub fn unidirectional_closed_form<T: Real>(space: &Arc<FockSpace>, g: &WalkGates<T>, n: usize) -> OResult<FockOperator<T>> {
    one_coin(space, 2)?;
    let mut blocks = Vec::new();
    for i in 0..n {
        let occ = OccVec(vec![i + 1]);
        if !space.admits(&occ) {
            break;
        }
        let mut s = vec![R; i];
        s.push(L);
        let t = g.tl.matmul(&g.tr.pow(i));
        blocks.push((occ, block_of(&string_projector(&s, 2), &t, &g.h, i + 1)));
    }
    Ok(FockOperator::from_blocks(space.clone(), blocks)?)
}

/// The path string `Σ_n` of the bidirectional walk: `(RL)^k L` for odd `n`,
/// `(RL)^k RR` for even `n`.
pub fn sigma(n: usize) -> Vec<usize> {
    assert!(n >= 1);
    let k = (n - 1) / 2;
    let mut s: Vec<usize> = (0..k).flat_map(|_| [R, L]).collect();
    if n % 2 == 1 {
        s.push(L);
    } else {
        s.extend([R, R]);
    }
    s
}

fn translation<T: Real>(s: &[usize], g: &WalkGates<T>) -> Dense<T> {
    // T_Σ = T_{σ_{n−1}} ⋯ T_{σ₀}
    s.iter().fold(Dense::identity(g.tl.rows()), |acc, &x| if x == L { g.tl.matmul(&acc) } else { g.tr.matmul(&acc) })
}

fn dual(s: &[usize]) -> Vec<usize> {
    s.iter().map(|&x| 1 - x).collect()
}

/// Semantics of `X` and `Y` in the bidirectional walk, every block within
/// the truncation.
pub fn bidirectional_closed_form<T: Real>(space: &Arc<FockSpace>, g: &WalkGates<T>) -> OResult<(FockOperator<T>, FockOperator<T>)> {
    one_coin(space, 2)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for n in 1..=space.trunc().caps[0] {
        let occ = OccVec(vec![n]);
        if !space.admits(&occ) {
            break;
        }
        let s = sigma(n);
        let t = if n % 2 == 1 { g.tl.clone() } else { g.tr.pow(2) };
        let t_dual = if n % 2 == 1 { g.tr.clone() } else { g.tl.pow(2) };
        debug_assert!(translation(&s, g).max_abs_diff(&t) < T::lit(1e-12));
        x.push((occ.clone(), block_of(&string_projector(&s, 2), &t, &g.h, n)));
        y.push((occ, block_of(&string_projector(&dual(&s), 2), &t_dual, &g.h, n)));
    }
    Ok((FockOperator::from_blocks(space.clone(), x)?, FockOperator::from_blocks(space.clone(), y)?))
}

/// Uniform average of `ρ_Γ` over all arrangements of a string.
fn averaged_projector<T: Real>(s: &[usize], d: usize) -> Sparse<T> {
    let n = s.len();
    let ones = s.iter().filter(|&&x| x == R).count();
    let count = binomial(n, ones) as usize;
    let w = Amp::new(T::one() / T::count(count), T::zero());
    let size = d.pow(n as u32);
    let trips = (0..size)
        .filter(|idx| {
            let digits: Vec<usize> = (0..n).map(|j| (idx / d.pow((n - 1 - j) as u32)) % d).collect();
            digits.iter().all(|&x| x < 2) && digits.iter().filter(|&&x| x == R).count() == ones
        })
        .map(|idx| (idx, idx, w))
        .collect();
    Sparse::from_triplets(size, size, trips)
}

/// `Σ_i G_i ⊗ T_L T_Rⁱ · H^{⊗(i+1)}` with `G_i` the average of the path
/// projector over the position of the single `L`.
pub fn symmetrised_unidirectional<T: Real>(space: &Arc<FockSpace>, g: &WalkGates<T>) -> OResult<FockOperator<T>> {
    one_coin(space, 2)?;
    let mut blocks = Vec::new();
    for i in 0..space.trunc().caps[0] {
        let occ = OccVec(vec![i + 1]);
        if !space.admits(&occ) {
            break;
        }
        let mut s = vec![R; i];
        s.push(L);
        let t = g.tl.matmul(&g.tr.pow(i));
        blocks.push((occ, block_of(&averaged_projector(&s, 2), &t, &g.h, i + 1)));
    }
    Ok(FockOperator::from_blocks(space.clone(), blocks)?)
}

/// `γ_n ⊗ T_n` and `δ_n ⊗ T'_n`, composed with `H^{⊗n}`.
pub fn symmetrised_bidirectional<T: Real>(space: &Arc<FockSpace>, g: &WalkGates<T>) -> OResult<(FockOperator<T>, FockOperator<T>)> {
    one_coin(space, 2)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for n in 1..=space.trunc().caps[0] {
        let occ = OccVec(vec![n]);
        if !space.admits(&occ) {
            break;
        }
        let s = sigma(n);
        let t = if n % 2 == 1 { g.tl.clone() } else { g.tr.pow(2) };
        let t_dual = if n % 2 == 1 { g.tr.clone() } else { g.tl.pow(2) };
        x.push((occ.clone(), block_of(&averaged_projector(&s, 2), &t, &g.h, n)));
        y.push((occ, block_of(&averaged_projector(&dual(&s), 2), &t_dual, &g.h, n)));
    }
    Ok((FockOperator::from_blocks(space.clone(), x)?, FockOperator::from_blocks(space.clone(), y)?))
}

/// Where the loop body's `U` sits relative to the coin interactions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LoopOrder {
    /// All of `U^{k−1}` after the product of the `W[c_j, q]`.
    #[default]
    Paper,
    /// `U` between consecutive `W[c_j, q]`, as the program executes.
    Interleaved,
}

fn embed_loop_gate<T: Real>(space: &FockSpace, k: usize, coin_slot: Option<usize>, m: &Dense<T>) -> Sparse<T> {
    let occ = OccVec(vec![k]);
    let coins: Vec<(usize, usize)> = coin_slot.map(|s| vec![(0, s)]).unwrap_or_default();
    space.embed_gate(&occ, &coins, &[0], m).expect("slot within block")
}

/// Projector `|1⟩⟨1|^{⊗(k−1)} ⊗ |0⟩⟨0|` (or its average over the position
/// of the `0`) on the coin factors of block `k`, identity on the system.
fn loop_projector<T: Real>(space: &FockSpace, k: usize, averaged: bool) -> Sparse<T> {
    let mut s = vec![1; k - 1];
    s.push(0);
    let p = if averaged { averaged_projector(&s, 2) } else { string_projector(&s, 2) };
    p.kron(&Sparse::identity(space.principal_dim()))
}

fn loop_form<T: Real>(space: &Arc<FockSpace>, w: &Dense<T>, u: &Dense<T>, order: LoopOrder, averaged: bool) -> OResult<FockOperator<T>> {
    one_coin(space, 2)?;
    if space.systems().len() != 1 || w.rows() != 2 * space.principal_dim() || u.rows() != space.principal_dim() {
        return Err(OracleError::Shape("W on coin and one system, U on that system".into()));
    }
    let mut blocks = Vec::new();
    for k in 1..=space.trunc().caps[0] {
        if !space.admits(&OccVec(vec![k])) {
            break;
        }
        let d = space.block_dim(&OccVec(vec![k]));
        let u_emb = embed_loop_gate(space, k, None, u);
        let mut path = Sparse::identity(d);
        for j in 0..k {
            path = embed_loop_gate(space, k, Some(j), w).matmul(&path);
            if order == LoopOrder::Interleaved && j + 1 < k {
                path = u_emb.matmul(&path);
            }
        }
        if order == LoopOrder::Paper {
            for _ in 1..k {
                path = u_emb.matmul(&path);
            }
        }
        blocks.push((OccVec(vec![k]), loop_projector(space, k, averaged).matmul(&path)));
    }
    Ok(FockOperator::from_blocks(space.clone(), blocks)?)
}

/// `Σ_k (|1⟩⟨1|^{⊗(k−1)} ⊗ |0⟩⟨0| ⊗ U^{k−1}) Π_j W[c_j, q]`.
pub fn loop_closed_form<T: Real>(space: &Arc<FockSpace>, w: &Dense<T>, u: &Dense<T>, order: LoopOrder) -> OResult<FockOperator<T>> {
    loop_form(space, w, u, order, false)
}

/// As [`loop_closed_form`] with the projector averaged over the position of
/// the `|0⟩`, i.e. `𝐀(k)`.
pub fn loop_symmetric_closed_form<T: Real>(space: &Arc<FockSpace>, w: &Dense<T>, u: &Dense<T>, order: LoopOrder) -> OResult<FockOperator<T>> {
    loop_form(space, w, u, order, true)
}

/// Reads gates `W` and `U` of a loop fixture.
pub fn loop_gates<T: Real>(m: &SourceModule) -> OResult<(Dense<T>, Dense<T>)> {
    let get = |n: &str| -> OResult<Dense<T>> { Ok(m.gates.get(n).ok_or_else(|| OracleError::Missing(format!("gate `{n}`")))?.matrix()?) };
    Ok((get("W")?, get("U")?))
}
