//! Permutations of coin copies, the symmetrisers S±, the symmetrisation
//! functional on Fock operators and one-body observables.
//!
//! A permutation `π` acts on copies by `P_π|x₀,…,x_{n−1}⟩ = |x_{π(0)},…,x_{π(n−1)}⟩`,
//! which gives `P_π P_σ = P_{σ∘π}`.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;
use num_traits::Zero;
use thiserror::Error;

use crate::fock::{FockError, FockOperator, FockSpace, OccVec};
use crate::linalg::{Dense, Sparse};
use crate::scalar::{factorial, Amp, Real};

/// Default largest coin occupation that [`symmetrise_block`] will accept.
pub const DEFAULT_FACTORIAL_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Statistics {
    #[default]
    Boson,
    Fermion,
}

impl Statistics {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "boson" | "bosons" | "+" => Some(Statistics::Boson),
            "fermion" | "fermions" | "-" => Some(Statistics::Fermion),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("permutation on {perm} elements applied to {copies} copies")]
    SizeMismatch { perm: usize, copies: usize },
    #[error("occupation {occ} of coin `{coin}` exceeds the symmetrisation cap {cap}")]
    FactorialBudget { coin: String, occ: usize, cap: usize },
    #[error("observable is {0}x{1}, expected a square matrix on the coin space")]
    NotSquare(usize, usize),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// A bijection on `0..n` with its parity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermutationSpec {
    pub mapping: Vec<usize>,
    pub sign: i8,
}

impl PermutationSpec {
    pub fn new(mapping: Vec<usize>) -> Result<Self, SymmetryError> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(SymmetryError::NotAPermutation(n));
            }
            seen[m] = true;
        }
        let sign = parity(&mapping);
        Ok(PermutationSpec { mapping, sign })
    }

    pub fn identity(n: usize) -> Self {
        PermutationSpec { mapping: (0..n).collect(), sign: 1 }
    }

    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.swap(i, j);
        let sign = if i == j { 1 } else { -1 };
        PermutationSpec { mapping, sign }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        let mapping = other.mapping.iter().map(|&i| self.mapping[i]).collect();
        PermutationSpec { mapping, sign: self.sign * other.sign }
    }

    pub fn inverse(&self) -> Self {
        let mut mapping = vec![0; self.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            mapping[m] = i;
        }
        PermutationSpec { mapping, sign: self.sign }
    }

    /// All permutations of `0..n`, in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = PermutationSpec> {
        (0..n).permutations(n).map(|m| PermutationSpec { sign: parity(&m), mapping: m })
    }
}

/// `(−1)^{inversions}`; for a sequence with repeats, the parity of the
/// stable sort.
fn parity(xs: &[usize]) -> i8 {
    let inversions = (0..xs.len()).flat_map(|i| (i + 1..xs.len()).map(move |j| (i, j))).filter(|&(i, j)| xs[i] > xs[j]).count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Index of block `n̄` after permuting the copies of coin `c` by `π`.
fn permute_index(space: &FockSpace, n: &OccVec, c: usize, idx: usize, pi: &[usize]) -> usize {
    let d = space.coin_dim(c);
    let strides: Vec<usize> = (0..n.0[c]).map(|s| space.slot_stride(n, c, s)).collect();
    let digits: Vec<usize> = strides.iter().map(|&st| (idx / st) % d).collect();
    let mut out = idx;
    for (s, &st) in strides.iter().enumerate() {
        out = out - digits[s] * st + digits[pi[s]] * st;
    }
    out
}

/// `P_π` on the copies of coin `c` in block `n̄`, identity on every other factor.
pub fn permutation_operator<T: Real>(pi: &PermutationSpec, c: usize, n: &OccVec, space: &FockSpace) -> Result<Sparse<T>, SymmetryError> {
    if pi.len() != n.0[c] {
        return Err(SymmetryError::SizeMismatch { perm: pi.len(), copies: n.0[c] });
    }
    let d = space.block_dim(n);
    let trips = (0..d).map(|x| (permute_index(space, n, c, x, &pi.mapping), x, Amp::new(T::one(), T::zero()))).collect();
    Ok(Sparse::from_triplets(d, d, trips))
}

/// `S_v(ψ₁⊗…⊗ψ_n)` for single-particle vectors of one coin space.
pub fn symmetrise_state_vector<T: Real>(factors: &[Vec<Amp<T>>], stat: Statistics) -> Vec<Amp<T>> {
    let n = factors.len();
    let Some(d) = factors.first().map(Vec::len) else {
        return vec![Amp::new(T::one(), T::zero())];
    };
    let size = d.pow(n as u32);
    let mut out = vec![Amp::<T>::zero(); size];
    let norm = T::one() / T::count(factorial(n) as usize);
    for pi in PermutationSpec::all(n) {
        let sign = match stat {
            Statistics::Fermion if pi.sign < 0 => -norm,
            _ => norm,
        };
        // Component x of P_π(ψ₁⊗…⊗ψ_n) is Π_i ψ_{π(i)}[x_i].
        for (x, o) in out.iter_mut().enumerate() {
            let mut rest = x;
            let mut a = Amp::new(sign, T::zero());
            for i in (0..n).rev() {
                a = a * factors[pi.mapping[i]][rest % d];
                rest /= d;
            }
            *o = *o + a;
        }
    }
    out
}

/// Orbit data of a block index under permutations of one coin's copies: the
/// index with that coin's digits sorted, and the parity of the sort.
struct CoinClass {
    canonical: usize,
    digits: Vec<usize>,
    sign: i8,
    repeated: bool,
}

fn coin_class(space: &FockSpace, n: &OccVec, c: usize, idx: usize) -> CoinClass {
    let d = space.coin_dim(c);
    let k = n.0[c];
    let strides: Vec<usize> = (0..k).map(|s| space.slot_stride(n, c, s)).collect();
    let digits: Vec<usize> = strides.iter().map(|&st| (idx / st) % d).collect();
    let mut sorted = digits.clone();
    sorted.sort_unstable();
    let mut base = idx;
    for (s, &st) in strides.iter().enumerate() {
        base = base - digits[s] * st + sorted[s] * st;
    }
    CoinClass { canonical: base, sign: parity(&digits), repeated: sorted.windows(2).any(|w| w[0] == w[1]), digits: sorted }
}

/// Distinct rearrangements of a sorted multiset, lexicographically.
fn multiset_permutations(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn orbit_size(sorted: &[usize]) -> usize {
    let mut size = factorial(sorted.len());
    for (_, g) in &sorted.iter().chunk_by(|&&x| x) {
        size /= factorial(g.count());
    }
    size as usize
}

/// `S_v` applied to the copies of coin `c` of a block vector.
pub fn symmetrise_vector_coin<T: Real>(v: &[Amp<T>], n: &OccVec, c: usize, space: &FockSpace, stat: Statistics) -> Vec<Amp<T>> {
    let k = n.0[c];
    if k <= 1 {
        return v.to_vec();
    }
    let strides: Vec<usize> = (0..k).map(|s| space.slot_stride(n, c, s)).collect();
    // Canonical index -> (sorted digits, signed amplitude sum).
    let mut classes: HashMap<usize, (Vec<usize>, Amp<T>)> = HashMap::new();
    for (idx, a) in v.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let cl = coin_class(space, n, c, idx);
        if stat == Statistics::Fermion && cl.repeated {
            continue;
        }
        let s = if stat == Statistics::Fermion && cl.sign < 0 { -*a } else { *a };
        let e = classes.entry(cl.canonical).or_insert_with(|| (cl.digits, Amp::zero()));
        e.1 = e.1 + s;
    }
    let mut out = vec![Amp::<T>::zero(); v.len()];
    for (canonical, (digits, sum)) in classes {
        let weight = match stat {
            Statistics::Boson => T::one() / T::count(orbit_size(&digits)),
            Statistics::Fermion => T::one() / T::count(factorial(k) as usize),
        };
        let base = canonical - digits.iter().zip(&strides).map(|(d, s)| d * s).sum::<usize>();
        for arr in multiset_permutations(&digits) {
            let idx = base + arr.iter().zip(&strides).map(|(d, s)| d * s).sum::<usize>();
            let sign = if stat == Statistics::Fermion && parity(&arr) < 0 { -weight } else { weight };
            out[idx] = sum * sign;
        }
    }
    out
}

/// `S_v` applied coin by coin to a block vector.
pub fn symmetrise_vector<T: Real>(v: &[Amp<T>], n: &OccVec, space: &FockSpace, stats: &[Statistics]) -> Vec<Amp<T>> {
    let mut out = v.to_vec();
    for (c, &s) in stats.iter().enumerate() {
        out = symmetrise_vector_coin(&out, n, c, space, s);
    }
    out
}

/// `𝕊` on one block: the average of `P b P⁻¹` over all families of
/// per-coin permutations.
pub fn symmetrise_block<T: Real>(b: &Sparse<T>, n: &OccVec, space: &FockSpace, cap: usize) -> Result<Sparse<T>, SymmetryError> {
    for (c, info) in space.coins().iter().enumerate() {
        if n.0[c] > cap {
            return Err(SymmetryError::FactorialBudget { coin: info.name.clone(), occ: n.0[c], cap });
        }
    }
    let mut cur = b.clone();
    for c in 0..space.coins().len() {
        if n.0[c] > 1 {
            cur = symmetrise_block_coin(&cur, n, c, space);
        }
    }
    Ok(cur)
}

// Conjugation permutes the row and column digit sequences together, so an
// entry spreads uniformly over the orbit of its sequence of digit pairs.
fn symmetrise_block_coin<T: Real>(b: &Sparse<T>, n: &OccVec, c: usize, space: &FockSpace) -> Sparse<T> {
    let d = space.coin_dim(c);
    let k = n.0[c];
    let strides: Vec<usize> = (0..k).map(|s| space.slot_stride(n, c, s)).collect();
    let strip = |idx: usize| -> (usize, Vec<usize>) {
        let digits: Vec<usize> = strides.iter().map(|&st| (idx / st) % d).collect();
        let base = idx - digits.iter().zip(&strides).map(|(x, s)| x * s).sum::<usize>();
        (base, digits)
    };
    let mut classes: HashMap<(usize, usize, Vec<usize>), Amp<T>> = HashMap::new();
    for (r, col, a) in b.iter() {
        let (rb, rd) = strip(r);
        let (cb, cd) = strip(col);
        let mut pairs: Vec<usize> = rd.iter().zip(&cd).map(|(x, y)| x * d + y).collect();
        pairs.sort_unstable();
        let e = classes.entry((rb, cb, pairs)).or_insert_with(Amp::zero);
        *e = *e + a;
    }
    let mut trips = Vec::new();
    for ((rb, cb, pairs), sum) in classes {
        let w = sum / T::count(orbit_size(&pairs));
        for arr in multiset_permutations(&pairs) {
            let r = rb + arr.iter().zip(&strides).map(|(p, s)| (p / d) * s).sum::<usize>();
            let col = cb + arr.iter().zip(&strides).map(|(p, s)| (p % d) * s).sum::<usize>();
            trips.push((r, col, w));
        }
    }
    Sparse::from_triplets(b.rows(), b.cols(), trips)
}

/// Blockwise [`symmetrise_block`].
pub fn symmetrise_operator<T: Real>(a: &FockOperator<T>, cap: usize) -> Result<FockOperator<T>, SymmetryError> {
    let space = a.space().clone();
    let blocks = a
        .nonzero_blocks()
        .into_iter()
        .map(|(n, b)| Ok((n.clone(), symmetrise_block(b, n, &space, cap)?)))
        .collect::<Result<Vec<_>, SymmetryError>>()?;
    Ok(FockOperator::from_blocks(space, blocks)?)
}

/// Whether every block commutes with every adjacent transposition of copies
/// of each coin.
pub fn is_symmetric<T: Real>(a: &FockOperator<T>, tol: T) -> bool {
    let space = a.space();
    a.nonzero_blocks().into_iter().all(|(n, b)| {
        (0..space.coins().len()).all(|c| {
            (1..n.0[c]).all(|i| {
                let swap = PermutationSpec::transposition(n.0[c], i - 1, i);
                let f = |x: usize| permute_index(space, n, c, x, &swap.mapping);
                b.remap(b.rows(), b.cols(), f, f).approx_eq(b, tol)
            })
        })
    })
}

/// `Σ_j A_j`, the single-copy observable `A` summed over the copies of coin `c`.
pub fn one_body_observable<T: Real>(a: &Dense<T>, c: usize, space: &Arc<FockSpace>) -> Result<FockOperator<T>, SymmetryError> {
    if !a.is_square() || a.rows() != space.coin_dim(c) {
        return Err(SymmetryError::NotSquare(a.rows(), a.cols()));
    }
    let blocks = space.occupations().into_iter().map(|n| {
        let d = space.block_dim(&n);
        let b = (0..n.0[c]).fold(Sparse::zeros(d, d), |acc, j| acc.add(&space.embed_gate(&n, &[(c, j)], &[], a).expect("copy in range")));
        (n, b)
    });
    Ok(FockOperator::from_blocks(space.clone(), blocks.collect::<Vec<_>>())?)
}
