//! Operators on the truncated free Fock space of the coins, tensored with the
//! principal system.
//!
//! An operator is a family of blocks indexed by occupation vectors `n̄`, one
//! count per coin. Block `n̄` acts on
//! `⨂_c H_c^{⊗n_c} ⊗ H`, with basis ordered as follows: coins in the order of
//! [`FockSpace::coins`], within a coin copy 0 leftmost (most significant),
//! principal systems last in declaration order.
//!
//! Two encodings of the same semantics are used by the engine:
//!
//! * **exact** (graded): block `n̄` holds only the contributions of paths that
//!   consumed exactly `n_c` copies of each coin. Closed forms, the flat order
//!   and least upper bounds of approximation chains live here.
//! * **cumulative**: block `n̄` is the sum over `ō ≤ n̄` of the exact blocks,
//!   each padded with identities on the unused higher copies. Products of
//!   cumulative families are blockwise, which is what makes the semantic
//!   functional compositional.
//!
//! [`FockOperator::to_cumulative`] and [`FockOperator::to_exact`] convert
//! between them (prefix sums and their Möbius inverse, coin by coin).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::lang::{SpaceKind, Spaces};
use crate::linalg::{Dense, Sparse};
use crate::scalar::{Amp, Real};

/// Occupation vector: one copy count per coin, aligned with [`FockSpace::coins`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OccVec(pub Vec<usize>);

impl OccVec {
    pub fn zeros(k: usize) -> Self {
        OccVec(vec![0; k])
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn get(&self, c: usize) -> usize {
        self.0[c]
    }

    /// Componentwise order.
    pub fn leq(&self, other: &OccVec) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn plus(&self, c: usize) -> OccVec {
        let mut v = self.clone();
        v.0[c] += 1;
        v
    }

    pub fn minus(&self, c: usize) -> Option<OccVec> {
        let mut v = self.clone();
        v.0[c] = v.0[c].checked_sub(1)?;
        Some(v)
    }

    pub fn add(&self, other: &OccVec) -> OccVec {
        OccVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Every `m̄ ≤ self`, in lexicographic order.
    pub fn below(&self) -> Vec<OccVec> {
        let mut out = vec![OccVec(Vec::with_capacity(self.0.len()))];
        for &n in &self.0 {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..=n).map(move |k| {
                        let mut w = v.clone();
                        w.0.push(k);
                        w
                    })
                })
                .collect();
        }
        out
    }
}

/// Per-coin occupation caps and an optional cap on the total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub caps: Vec<usize>,
    pub total: Option<usize>,
}

impl Truncation {
    pub fn uniform(coins: usize, cap: usize) -> Self {
        Truncation { caps: vec![cap; coins], total: None }
    }

    pub fn with_total(mut self, total: usize) -> Self {
        self.total = Some(total);
        self
    }

    pub fn admits(&self, n: &OccVec) -> bool {
        n.0.len() == self.caps.len()
            && n.0.iter().zip(&self.caps).all(|(a, b)| a <= b)
            && self.total.is_none_or(|t| n.total() <= t)
    }

    /// All admissible occupations in lexicographic order.
    pub fn occupations(&self) -> Vec<OccVec> {
        OccVec(self.caps.clone()).below().into_iter().filter(|n| self.admits(n)).collect()
    }

    /// Admissible occupations with an inadmissible upper neighbour.
    pub fn is_top_shell(&self, n: &OccVec) -> bool {
        (0..self.caps.len()).any(|c| !self.admits(&n.plus(c)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoinInfo {
    pub name: String,
    pub labels: Vec<String>,
}

impl CoinInfo {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemInfo {
    pub name: String,
    pub labels: Vec<String>,
}

/// The coins, principal systems and truncation an operator lives over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    coins: Vec<CoinInfo>,
    systems: Vec<SystemInfo>,
    trunc: Truncation,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("occupation {0} exceeds the truncation")]
    Truncation(String),
    #[error("operators live over different Fock spaces")]
    SpaceMismatch,
    #[error("unknown coin `{0}`")]
    UnknownCoin(String),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("sequence is not a chain in the flat order (fails at position {0})")]
    NotAChain(usize),
    #[error("truncation caps must list one entry per coin")]
    BadTruncation,
}

impl FockSpace {
    /// Fock space over the named coins (in the given order) and every
    /// declared principal system.
    pub fn new(spaces: &Spaces, coins: &[String], trunc: Truncation) -> Result<Self, FockError> {
        if trunc.caps.len() != coins.len() {
            return Err(FockError::BadTruncation);
        }
        let coins = coins
            .iter()
            .map(|c| {
                let s = spaces.coin(c).ok_or_else(|| FockError::UnknownCoin(c.clone()))?;
                Ok(CoinInfo { name: c.clone(), labels: s.labels() })
            })
            .collect::<Result<Vec<_>, FockError>>()?;
        let systems = spaces
            .all()
            .iter()
            .filter(|s| s.kind == SpaceKind::Principal)
            .map(|s| SystemInfo { name: s.name.clone(), labels: s.labels() })
            .collect();
        Ok(FockSpace { coins, systems, trunc })
    }

    /// Direct construction from coin and system descriptions.
    pub fn from_parts(coins: Vec<CoinInfo>, systems: Vec<SystemInfo>, trunc: Truncation) -> Result<Self, FockError> {
        if trunc.caps.len() != coins.len() {
            return Err(FockError::BadTruncation);
        }
        Ok(FockSpace { coins, systems, trunc })
    }

    /// Same coins and systems with another truncation.
    pub fn with_truncation(&self, trunc: Truncation) -> Result<Self, FockError> {
        Self::from_parts(self.coins.clone(), self.systems.clone(), trunc)
    }

    pub fn coins(&self) -> &[CoinInfo] {
        &self.coins
    }

    pub fn systems(&self) -> &[SystemInfo] {
        &self.systems
    }

    pub fn trunc(&self) -> &Truncation {
        &self.trunc
    }

    pub fn coin_index(&self, name: &str) -> Option<usize> {
        self.coins.iter().position(|c| c.name == name)
    }

    pub fn system_index(&self, name: &str) -> Option<usize> {
        self.systems.iter().position(|s| s.name == name)
    }

    pub fn coin_dim(&self, c: usize) -> usize {
        self.coins[c].dim()
    }

    pub fn principal_dim(&self) -> usize {
        self.systems.iter().map(|s| s.labels.len()).product()
    }

    /// Stride of system `k` inside the principal index.
    pub fn system_stride(&self, k: usize) -> usize {
        self.systems[k + 1..].iter().map(|s| s.labels.len()).product()
    }

    pub fn zero_occ(&self) -> OccVec {
        OccVec::zeros(self.coins.len())
    }

    pub fn unit(&self, c: usize) -> OccVec {
        self.zero_occ().plus(c)
    }

    pub fn occupations(&self) -> Vec<OccVec> {
        self.trunc.occupations()
    }

    pub fn admits(&self, n: &OccVec) -> bool {
        self.trunc.admits(n)
    }

    /// Dimension of the coin part of block `n̄`.
    pub fn coin_part_dim(&self, n: &OccVec) -> usize {
        self.coins.iter().zip(&n.0).map(|(c, &k)| c.dim().pow(k as u32)).product()
    }

    pub fn block_dim(&self, n: &OccVec) -> usize {
        self.coin_part_dim(n) * self.principal_dim()
    }

    /// Size of everything to the right of position `s` of coin `c` in block `n̄`
    /// (principal factor included).
    pub fn low_size(&self, n: &OccVec, c: usize, s: usize) -> usize {
        let own = self.coin_dim(c).pow((n.0[c] - s) as u32);
        let after: usize = (c + 1..self.coins.len()).map(|k| self.coin_dim(k).pow(n.0[k] as u32)).product();
        own * after * self.principal_dim()
    }

    /// Stride of copy `s` of coin `c` in the full index of block `n̄`.
    pub fn slot_stride(&self, n: &OccVec, c: usize, s: usize) -> usize {
        debug_assert!(s < n.0[c]);
        self.low_size(n, c, s + 1)
    }

    /// Coin basis digits of a block index, coin by coin and copy by copy.
    pub fn coin_digits(&self, n: &OccVec, index: usize) -> Vec<Vec<usize>> {
        let mut rest = index / self.principal_dim();
        let mut out: Vec<Vec<usize>> = n.0.iter().map(|&k| vec![0; k]).collect();
        for c in (0..self.coins.len()).rev() {
            let d = self.coin_dim(c);
            for s in (0..n.0[c]).rev() {
                out[c][s] = rest % d;
                rest /= d;
            }
        }
        out
    }

    /// Human-readable occupation, e.g. `{d:2, e:0}`.
    pub fn fmt_occ(&self, n: &OccVec) -> String {
        let parts: Vec<String> = self.coins.iter().zip(&n.0).map(|(c, k)| format!("{}:{k}", c.name)).collect();
        format!("{{{}}}", parts.join(", "))
    }

    pub fn occ_json(&self, n: &OccVec) -> Value {
        let map: serde_json::Map<String, Value> =
            self.coins.iter().zip(&n.0).map(|(c, &k)| (c.name.clone(), json!(k))).collect();
        Value::Object(map)
    }

    /// Occupation from `(coin, count)` pairs; unnamed coins are 0.
    pub fn occ(&self, counts: &[(&str, usize)]) -> Result<OccVec, FockError> {
        let mut n = self.zero_occ();
        for (name, k) in counts {
            let c = self.coin_index(name).ok_or_else(|| FockError::UnknownCoin(name.to_string()))?;
            n.0[c] = *k;
        }
        Ok(n)
    }

    /// Inserts a new copy of coin `c` at position `s` of block `from`, acting
    /// as `m` on that copy and as `a` on the others.
    pub fn insert_factor<T: Real>(&self, a: &Sparse<T>, from: &OccVec, c: usize, s: usize, m: &Dense<T>) -> Sparse<T> {
        let d = self.coin_dim(c);
        let low = self.low_size(from, c, s);
        let to = from.plus(c);
        let dim = self.block_dim(&to);
        let mut m_entries = Vec::new();
        for x in 0..d {
            for y in 0..d {
                let v = m[(x, y)];
                if !v.is_zero() {
                    m_entries.push((x, y, v));
                }
            }
        }
        let lift = |i: usize, x: usize| (i / low) * d * low + x * low + i % low;
        let mut trips = Vec::with_capacity(a.nnz() * m_entries.len());
        for (r, col, v) in a.iter() {
            for &(x, y, mv) in &m_entries {
                trips.push((lift(r, x), lift(col, y), v * mv));
            }
        }
        Sparse::from_triplets(dim, dim, trips)
    }

    /// Extends block `from` by a fresh copy of coin `c` in its highest slot,
    /// acting as the identity there.
    pub fn extend_right<T: Real>(&self, a: &Sparse<T>, from: &OccVec, c: usize) -> Sparse<T> {
        self.insert_factor(a, from, c, from.0[c], &Dense::identity(self.coin_dim(c)))
    }

    /// Embeds `gate` acting on the listed factors of block `n̄`; coin factors
    /// are `(coin, copy)` pairs, systems are indices into [`Self::systems`].
    /// Returns `None` when a required coin copy is absent from the block.
    pub fn embed_gate<T: Real>(&self, n: &OccVec, coins: &[(usize, usize)], systems: &[usize], gate: &Dense<T>) -> Option<Sparse<T>> {
        let factors = self.gate_factors(n, coins, systems)?;
        Some(embed(self.block_dim(n), &factors, gate))
    }

    /// `(stride, dim)` of each listed factor within block `n̄`.
    pub fn gate_factors(&self, n: &OccVec, coins: &[(usize, usize)], systems: &[usize]) -> Option<Vec<(usize, usize)>> {
        let mut factors = Vec::with_capacity(coins.len() + systems.len());
        for &(c, s) in coins {
            if s >= n.0[c] {
                return None;
            }
            factors.push((self.slot_stride(n, c, s), self.coin_dim(c)));
        }
        for &k in systems {
            factors.push((self.system_stride(k), self.systems[k].labels.len()));
        }
        Some(factors)
    }
}

/// Sparse matrix of `gate` acting on factors at the given `(stride, dim)`
/// positions of a `dim_total`-dimensional mixed-radix space, identity elsewhere.
pub fn embed<T: Real>(dim_total: usize, factors: &[(usize, usize)], gate: &Dense<T>) -> Sparse<T> {
    let cols: Vec<Vec<(usize, Amp<T>)>> = (0..gate.cols()).map(|j| gate.column_nonzeros(j)).collect();
    let mut trips = Vec::new();
    let mut digits = vec![0usize; factors.len()];
    for j in 0..dim_total {
        let mut g_in = 0;
        let mut base = j;
        for (k, &(stride, d)) in factors.iter().enumerate() {
            digits[k] = (j / stride) % d;
            g_in = g_in * d + digits[k];
            base -= digits[k] * stride;
        }
        for &(g_out, v) in &cols[g_in] {
            let mut rest = g_out;
            let mut i = base;
            for &(stride, d) in factors.iter().rev() {
                i += (rest % d) * stride;
                rest /= d;
            }
            trips.push((i, j, v));
        }
    }
    Sparse::from_triplets(dim_total, dim_total, trips)
}

/// Applies `gate` on the given factors to a state vector in place of a copy.
pub fn apply_embedded<T: Real>(v: &[Amp<T>], factors: &[(usize, usize)], gate: &Dense<T>) -> Vec<Amp<T>> {
    let mut out = vec![Amp::<T>::zero(); v.len()];
    let gdim: usize = factors.iter().map(|f| f.1).product();
    let mut seen = vec![false; v.len()];
    let mut local = vec![Amp::<T>::zero(); gdim];
    for j in 0..v.len() {
        if seen[j] {
            continue;
        }
        // Each orbit of indices that differ only in gate digits is handled once.
        let mut base = j;
        for &(stride, d) in factors {
            base -= ((j / stride) % d) * stride;
        }
        let index_of = |g: usize| {
            let mut rest = g;
            let mut i = base;
            for &(stride, d) in factors.iter().rev() {
                i += (rest % d) * stride;
                rest /= d;
            }
            i
        };
        let mut any = false;
        for (g, slot) in local.iter_mut().enumerate() {
            let i = index_of(g);
            seen[i] = true;
            *slot = v[i];
            any |= !v[i].is_zero();
        }
        if !any {
            continue;
        }
        for r in 0..gdim {
            let mut acc = Amp::<T>::zero();
            for (cidx, x) in local.iter().enumerate() {
                if !x.is_zero() {
                    acc = acc + gate[(r, cidx)] * x;
                }
            }
            out[index_of(r)] = acc;
        }
    }
    out
}

/// Occupation-indexed family of sparse blocks; absent blocks are zero.
#[derive(Clone, Debug)]
pub struct FockOperator<T> {
    space: Arc<FockSpace>,
    blocks: BTreeMap<OccVec, Sparse<T>>,
}

impl<T: Real> PartialEq for FockOperator<T> {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.nonzero_blocks() == other.nonzero_blocks()
    }
}

impl<T: Real> FockOperator<T> {
    /// The least element of the flat order.
    pub fn zero(space: Arc<FockSpace>) -> Self {
        FockOperator { space, blocks: BTreeMap::new() }
    }

    /// Identity on every admissible occupation.
    pub fn identity(space: Arc<FockSpace>) -> Self {
        let blocks = space.occupations().into_iter().map(|n| {
            let d = space.block_dim(&n);
            (n, Sparse::identity(d))
        });
        FockOperator { blocks: blocks.collect(), space }
    }

    /// Builds an operator from blocks, dropping structurally zero ones.
    pub fn from_blocks(space: Arc<FockSpace>, blocks: impl IntoIterator<Item = (OccVec, Sparse<T>)>) -> Result<Self, FockError> {
        let mut op = Self::zero(space);
        for (n, b) in blocks {
            op.set_block(n, b)?;
        }
        Ok(op)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn set_block(&mut self, n: OccVec, b: Sparse<T>) -> Result<(), FockError> {
        if !self.space.admits(&n) {
            return Err(FockError::Truncation(self.space.fmt_occ(&n)));
        }
        let d = self.space.block_dim(&n);
        if b.rows() != d || b.cols() != d {
            return Err(FockError::Dimension(format!(
                "block at {} must be {d}x{d}, got {}x{}",
                self.space.fmt_occ(&n),
                b.rows(),
                b.cols()
            )));
        }
        if b.is_structurally_zero() {
            self.blocks.remove(&n);
        } else {
            self.blocks.insert(n, b);
        }
        Ok(())
    }

    /// Stored block, or an explicit zero block of the right dimension.
    pub fn block_at(&self, n: &OccVec) -> Result<Sparse<T>, FockError> {
        if !self.space.admits(n) {
            return Err(FockError::Truncation(self.space.fmt_occ(n)));
        }
        Ok(self.blocks.get(n).cloned().unwrap_or_else(|| {
            let d = self.space.block_dim(n);
            Sparse::zeros(d, d)
        }))
    }

    pub fn block(&self, n: &OccVec) -> Option<&Sparse<T>> {
        self.blocks.get(n)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&OccVec, &Sparse<T>)> {
        self.blocks.iter()
    }

    /// Blocks that are not structurally zero, in occupation order.
    pub fn nonzero_blocks(&self) -> Vec<(&OccVec, &Sparse<T>)> {
        self.blocks.iter().filter(|(_, b)| !b.is_structurally_zero()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(Sparse::is_structurally_zero)
    }

    /// Occupations whose block has an entry above `tol` in modulus.
    pub fn support(&self, tol: T) -> BTreeSet<OccVec> {
        self.blocks.iter().filter(|(_, b)| !b.is_zero_within(tol)).map(|(n, _)| n.clone()).collect()
    }

    fn check_same(&self, other: &Self) -> Result<(), FockError> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(FockError::SpaceMismatch)
        }
    }

    fn map_blocks(&self, f: impl Fn(&OccVec, &Sparse<T>) -> Sparse<T>) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|(n, b)| (n.clone(), f(n, b)))
            .filter(|(_, b)| !b.is_structurally_zero())
            .collect();
        FockOperator { space: self.space.clone(), blocks }
    }

    /// Blockwise product `self · other`.
    pub fn product(&self, other: &Self) -> Result<Self, FockError> {
        self.check_same(other)?;
        let blocks = self
            .blocks
            .iter()
            .filter_map(|(n, a)| other.blocks.get(n).map(|b| (n.clone(), a.matmul(b))))
            .filter(|(_, b)| !b.is_structurally_zero())
            .collect();
        Ok(FockOperator { space: self.space.clone(), blocks })
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&Sparse<T>, &Sparse<T>) -> Sparse<T>) -> Result<Self, FockError> {
        self.check_same(other)?;
        let keys: BTreeSet<&OccVec> = self.blocks.keys().chain(other.blocks.keys()).collect();
        let mut blocks = BTreeMap::new();
        for n in keys {
            let d = self.space.block_dim(n);
            let z = Sparse::zeros(d, d);
            let b = f(self.blocks.get(n).unwrap_or(&z), other.blocks.get(n).unwrap_or(&z));
            if !b.is_structurally_zero() {
                blocks.insert(n.clone(), b);
            }
        }
        Ok(FockOperator { space: self.space.clone(), blocks })
    }

    pub fn add(&self, other: &Self) -> Result<Self, FockError> {
        self.zip_blocks(other, Sparse::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FockError> {
        self.zip_blocks(other, Sparse::sub)
    }

    pub fn scale(&self, s: Amp<T>) -> Self {
        self.map_blocks(|_, b| b.scale(s))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|_, b| b.adjoint())
    }

    /// Keeps only the blocks at occupations satisfying `keep`.
    pub fn restrict(&self, keep: impl Fn(&OccVec) -> bool) -> Self {
        let blocks = self.blocks.iter().filter(|(n, _)| keep(n)).map(|(n, b)| (n.clone(), b.clone())).collect();
        FockOperator { space: self.space.clone(), blocks }
    }

    /// Guarded composition along the basis of coin `c`: block `m̄` with
    /// `m_c ≥ 1` is `Σ_i |i⟩⟨i| ⊗ parts[i](m̄ − e_c)`, the projector acting on
    /// copy 0 of `c`. Missing parts count as zero.
    pub fn guarded_composition(c: usize, parts: &[Option<&Self>], space: &Arc<FockSpace>) -> Result<Self, FockError> {
        let d = space.coin_dim(c);
        if parts.len() > d {
            return Err(FockError::Dimension(format!("{} parts for a {d}-dimensional coin", parts.len())));
        }
        let mut acc: BTreeMap<OccVec, Sparse<T>> = BTreeMap::new();
        for (i, part) in parts.iter().enumerate() {
            let Some(part) = part else { continue };
            if part.space != *space {
                return Err(FockError::SpaceMismatch);
            }
            let mut proj = Dense::zeros(d, d);
            proj[(i, i)] = Amp::one();
            for (n, b) in &part.blocks {
                let m = n.plus(c);
                if !space.admits(&m) {
                    continue;
                }
                let lifted = space.insert_factor(b, n, c, 0, &proj);
                let entry = acc.entry(m).or_insert_with_key(|m| {
                    let dim = space.block_dim(m);
                    Sparse::zeros(dim, dim)
                });
                *entry = entry.add(&lifted);
            }
        }
        acc.retain(|_, b| !b.is_structurally_zero());
        Ok(FockOperator { space: space.clone(), blocks: acc })
    }

    /// Creation functional on coin `c`: block `m̄` with `m_c ≥ 1` is
    /// `I_c ⊗ A(m̄ − e_c)`, the identity in the copy-0 slot; every old copy
    /// moves one slot to the right. Blocks pushed past the truncation are
    /// dropped; see [`Self::creation_loss`].
    pub fn creation_functional(&self, c: usize) -> Self {
        let id = Dense::identity(self.space.coin_dim(c));
        let blocks = self
            .blocks
            .iter()
            .filter(|(n, _)| self.space.admits(&n.plus(c)))
            .map(|(n, b)| (n.plus(c), self.space.insert_factor(b, n, c, 0, &id)))
            .collect();
        FockOperator { space: self.space.clone(), blocks }
    }

    /// Occupations whose nonzero block the creation functional on `c` drops.
    pub fn creation_loss(&self, c: usize) -> Vec<OccVec> {
        self.blocks.keys().filter(|n| !self.space.admits(&n.plus(c))).cloned().collect()
    }

    /// Composition of the creation functionals over `coins`, applied in the
    /// order of [`FockSpace::coins`]; the empty set gives `self` back.
    pub fn creation_functional_all(&self, coins: &BTreeSet<usize>) -> Self {
        coins.iter().rev().fold(self.clone(), |acc, &c| acc.creation_functional(c))
    }

    /// Identity-padded family built from a matrix at occupation `base`:
    /// block `base + k̄` is `I(k̄) ⊗ m`, the identities occupying the lowest
    /// copy slots of each coin. Blocks not above `base` are zero.
    pub fn cylindrical_extension(m: &Sparse<T>, base: &OccVec, space: &Arc<FockSpace>) -> Result<Self, FockError> {
        Self::extension(m, base, space, true)
    }

    /// As [`Self::cylindrical_extension`], with the identities on the highest
    /// copy slots instead.
    pub fn cylindrical_extension_right(m: &Sparse<T>, base: &OccVec, space: &Arc<FockSpace>) -> Result<Self, FockError> {
        Self::extension(m, base, space, false)
    }

    fn extension(m: &Sparse<T>, base: &OccVec, space: &Arc<FockSpace>, left: bool) -> Result<Self, FockError> {
        if !space.admits(base) {
            return Err(FockError::Truncation(space.fmt_occ(base)));
        }
        let d = space.block_dim(base);
        if m.rows() != d || m.cols() != d {
            return Err(FockError::Dimension(format!("matrix is {}x{}, base block is {d}x{d}", m.rows(), m.cols())));
        }
        let mut blocks = BTreeMap::new();
        blocks.insert(base.clone(), m.clone());
        for n in space.occupations() {
            if n == *base || !base.leq(&n) {
                continue;
            }
            // Grow from a predecessor that is already filled in.
            let c = (0..n.0.len()).find(|&c| n.0[c] > base.0[c]).expect("n > base");
            let prev = n.minus(c).expect("positive count");
            let pb = &blocks[&prev];
            let id = Dense::identity(space.coin_dim(c));
            let slot = if left { 0 } else { prev.0[c] };
            let b = space.insert_factor(pb, &prev, c, slot, &id);
            blocks.insert(n, b);
        }
        blocks.retain(|_, b: &mut Sparse<T>| !b.is_structurally_zero());
        Ok(FockOperator { space: space.clone(), blocks })
    }

    /// Lifted evolution `U^{⊗n}` on every copy of coin `c`, identity on the
    /// rest; zero where `n_c = 0`.
    pub fn lift_evolution(u: &Dense<T>, c: usize, space: &Arc<FockSpace>) -> Result<Self, FockError> {
        let d = space.coin_dim(c);
        if u.rows() != d || u.cols() != d {
            return Err(FockError::Dimension(format!("gate is {}x{}, coin has dimension {d}", u.rows(), u.cols())));
        }
        let mut blocks = BTreeMap::new();
        for n in space.occupations() {
            if n.0[c] == 0 {
                continue;
            }
            let mut b = Sparse::identity(space.block_dim(&n));
            for s in 0..n.0[c] {
                let g = space.embed_gate(&n, &[(c, s)], &[], u).expect("copy present");
                b = g.matmul(&b);
            }
            blocks.insert(n, b);
        }
        Ok(FockOperator { space: space.clone(), blocks })
    }

    /// Exact to cumulative: prefix sums along each coin, padding lower
    /// occupations with identities on the new highest copy.
    pub fn to_cumulative(&self) -> Self {
        let mut cur = self.blocks.clone();
        for c in 0..self.space.coins.len() {
            let mut next: BTreeMap<OccVec, Sparse<T>> = BTreeMap::new();
            for n in self.space.occupations() {
                let own = cur.get(&n).cloned();
                let below = n.minus(c).and_then(|p| next.get(&p).map(|b| self.space.extend_right(b, &p, c)));
                let b = match (own, below) {
                    (Some(a), Some(b)) => a.add(&b),
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => continue,
                };
                next.insert(n, b);
            }
            cur = next;
        }
        cur.retain(|_, b| !b.is_structurally_zero());
        FockOperator { space: self.space.clone(), blocks: cur }
    }

    /// Cumulative to exact: the inverse of [`Self::to_cumulative`].
    pub fn to_exact(&self) -> Self {
        let mut cur = self.blocks.clone();
        for c in 0..self.space.coins.len() {
            let mut next = BTreeMap::new();
            for (n, b) in &cur {
                let below = n.minus(c).and_then(|p| cur.get(&p).map(|pb| self.space.extend_right(pb, &p, c)));
                let g = match below {
                    Some(x) => b.sub(&x),
                    None => b.clone(),
                };
                if !g.is_structurally_zero() {
                    next.insert(n.clone(), g);
                }
            }
            // Occupations with no block of their own can still receive a
            // negative correction from below.
            for (p, pb) in &cur {
                let n = p.plus(c);
                if self.space.admits(&n) && !cur.contains_key(&n) {
                    let g = self.space.extend_right(pb, p, c).scale(-Amp::one());
                    if !g.is_structurally_zero() {
                        next.insert(n, g);
                    }
                }
            }
            cur = next;
        }
        FockOperator { space: self.space.clone(), blocks: cur }
    }

    /// Flat order: `self ⊑ other` iff `other` agrees with `self` on the
    /// below-closure of the nonzero support of `self`.
    pub fn flat_leq(&self, other: &Self, tol: T) -> Result<bool, FockError> {
        self.check_same(other)?;
        for n in below_closure(&self.support(tol), self.space.trunc()) {
            let a = self.block_at(&n)?;
            let b = other.block_at(&n)?;
            if !a.approx_eq(&b, tol) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Blockwise maximum entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T, FockError> {
        Ok(compare(self, other, T::zero())?.max_diff)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        compare(self, other, tol).is_ok_and(|r| r.pass)
    }

    /// Blocks in a deterministic JSON array (occupation order, row-major
    /// entries).
    pub fn to_json(&self) -> Value {
        let blocks: Vec<Value> = self
            .blocks
            .iter()
            .map(|(n, b)| {
                let entries: Vec<Value> =
                    b.iter().map(|(r, c, v)| json!([r, c, v.re.as_f64(), v.im.as_f64()])).collect();
                json!({ "occ": self.space.occ_json(n), "dim": b.rows(), "entries": entries })
            })
            .collect();
        Value::Array(blocks)
    }
}

/// Smallest below-closed superset of `s` within the truncation.
pub fn below_closure(s: &BTreeSet<OccVec>, trunc: &Truncation) -> BTreeSet<OccVec> {
    s.iter().flat_map(OccVec::below).filter(|n| trunc.admits(n)).collect()
}

/// Least upper bound of a finite chain in the flat order: block `n̄` is taken
/// from the first member whose below-closed support contains `n̄`.
pub fn lub_chain<T: Real>(chain: &[FockOperator<T>], tol: T) -> Result<FockOperator<T>, FockError> {
    let Some(first) = chain.first() else {
        return Err(FockError::NotAChain(0));
    };
    for (i, w) in chain.windows(2).enumerate() {
        if !w[0].flat_leq(&w[1], tol)? {
            return Err(FockError::NotAChain(i + 1));
        }
    }
    let space = first.space.clone();
    let mut out = FockOperator::zero(space.clone());
    let mut done = BTreeSet::new();
    for a in chain {
        for n in below_closure(&a.support(tol), space.trunc()) {
            if done.insert(n.clone()) {
                if let Some(b) = a.block(&n) {
                    out.blocks.insert(n, b.clone());
                }
            }
        }
    }
    Ok(out)
}

/// Blockwise comparison of two operators.
#[derive(Clone, Debug)]
pub struct CompareReport<T> {
    /// Maximum entry difference per occupation (only occupations where
    /// either side has a block).
    pub per_occ: Vec<(OccVec, T)>,
    pub max_diff: T,
    pub worst: Option<OccVec>,
    pub pass: bool,
}

impl<T: Real> CompareReport<T> {
    pub fn to_json(&self, space: &FockSpace) -> Value {
        json!({
            "max_diff": self.max_diff.as_f64(),
            "worst": self.worst.as_ref().map(|n| space.occ_json(n)),
            "pass": self.pass,
            "blocks": self.per_occ.iter().map(|(n, d)| json!({
                "occ": space.occ_json(n),
                "diff": d.as_f64(),
                "top_shell": space.trunc().is_top_shell(n),
            })).collect::<Vec<_>>(),
        })
    }
}

impl<T: Real> fmt::Display for CompareReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "max diff {:.3e} ({})", self.max_diff.as_f64(), if self.pass { "pass" } else { "FAIL" })
    }
}

/// Per-occupation maximum entry difference; passes iff every difference is
/// at most `tol`.
pub fn compare<T: Real>(a: &FockOperator<T>, b: &FockOperator<T>, tol: T) -> Result<CompareReport<T>, FockError> {
    a.check_same(b)?;
    let keys: BTreeSet<&OccVec> = a.blocks.keys().chain(b.blocks.keys()).collect();
    let mut per_occ = Vec::new();
    let mut max_diff = T::zero();
    let mut worst = None;
    for n in keys {
        let d = match (a.blocks.get(n), b.blocks.get(n)) {
            (Some(x), Some(y)) => x.max_abs_diff(y),
            (Some(x), None) | (None, Some(x)) => x.max_abs(),
            (None, None) => T::zero(),
        };
        if d > max_diff || worst.is_none() {
            if d > max_diff {
                max_diff = d;
            }
            worst = Some(n.clone());
        }
        per_occ.push((n.clone(), d));
    }
    Ok(CompareReport { per_occ, max_diff, worst, pass: max_diff <= tol })
}
