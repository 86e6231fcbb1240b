//! Fock-space states, creation and annihilation, coherent states and the
//! principal-system output of a program.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexMap;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::fock::{FockError, FockOperator, FockSpace, OccVec, Truncation};
use crate::linalg::{norm_sqr, Dense};
use crate::scalar::{factorial, Amp, Real};
use crate::semantics::{Engine, SemanticsError};
use crate::symmetry::{symmetrise_operator, symmetrise_vector, symmetrise_vector_coin, Statistics, SymmetryError, DEFAULT_FACTORIAL_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("vector has length {got}, expected {want}")]
    Dimension { got: usize, want: usize },
    #[error("coherent states need boson statistics")]
    FermionCoherent,
    #[error("state is not in the range of the {0} symmetriser")]
    NotSymmetric(&'static str),
    #[error("state and operator live over different Fock spaces")]
    SpaceMismatch,
    #[error("bad coin initialisation `{0}`")]
    BadInit(String),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

type SResult<T> = Result<T, StateError>;

/// The coins and truncation of `space` with no principal factor.
pub fn coin_space(space: &FockSpace) -> Arc<FockSpace> {
    Arc::new(FockSpace::from_parts(space.coins().to_vec(), vec![], space.trunc().clone()).expect("same caps"))
}

/// Labels of the principal basis, one per product of system labels.
pub fn principal_labels(space: &FockSpace) -> Vec<String> {
    space.systems().iter().fold(vec![String::new()], |acc, s| {
        acc.iter()
            .flat_map(|a| s.labels.iter().map(move |l| if a.is_empty() { l.clone() } else { format!("{a},{l}") }))
            .collect()
    })
}

/// A finite sum of occupation components. States over a space without
/// systems are coin-only.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState<T> {
    space: Arc<FockSpace>,
    stats: Vec<Statistics>,
    components: BTreeMap<OccVec, Vec<Amp<T>>>,
    overflow: T,
}

impl<T: Real> FockState<T> {
    pub fn vacuum(space: Arc<FockSpace>, stats: Vec<Statistics>) -> Self {
        let mut components = BTreeMap::new();
        let n = space.zero_occ();
        let mut v = vec![Amp::zero(); space.block_dim(&n)];
        v[0] = Amp::one();
        components.insert(n, v);
        FockState { space, stats, components, overflow: T::zero() }
    }

    pub fn zero(space: Arc<FockSpace>, stats: Vec<Statistics>) -> Self {
        FockState { space, stats, components: BTreeMap::new(), overflow: T::zero() }
    }

    /// `|l₁,…,l_n⟩_v = S_v(|l₁⟩⊗…⊗|l_n⟩)` on coin `c`, unnormalised.
    pub fn basis(space: Arc<FockSpace>, stats: Vec<Statistics>, c: usize, labels: &[usize]) -> SResult<Self> {
        let mut s = Self::vacuum(space.clone(), stats);
        for &l in labels.iter().rev() {
            let d = space.coin_dim(c);
            if l >= d {
                return Err(StateError::Dimension { got: l, want: d });
            }
            let mut psi = vec![Amp::zero(); d];
            psi[l] = Amp::one();
            // a†(ψ) carries √(n+1); strip it to get the bare symmetrised product.
            let k = s.components.keys().next().map(|n| n.0[c]).unwrap_or(0);
            s = s.creation(&psi, c)?.scale(Amp::new(T::one() / T::count(k + 1).sqrt(), T::zero()));
        }
        Ok(s)
    }

    /// The coherent state of `ψ` truncated at `n_max` copies, and the weight
    /// of the discarded tail.
    pub fn coherent(space: Arc<FockSpace>, stats: Vec<Statistics>, c: usize, psi: &[Amp<T>], n_max: usize) -> SResult<(Self, T)> {
        if stats[c] != Statistics::Boson {
            return Err(StateError::FermionCoherent);
        }
        let x = norm_sqr(psi);
        let pref = (-x / T::lit(2.0)).exp();
        let mut term = Self::vacuum(space.clone(), stats.clone());
        let mut acc = term.scale(Amp::new(pref, T::zero()));
        for n in 1..=n_max {
            term = term.creation(psi, c)?.scale(Amp::new(T::one() / T::count(n), T::zero()));
            acc = acc.add(&term.scale(Amp::new(pref, T::zero())))?;
        }
        acc.overflow = T::zero();
        Ok((acc, coherent_tail(x, n_max)))
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn stats(&self) -> &[Statistics] {
        &self.stats
    }

    pub fn components(&self) -> &BTreeMap<OccVec, Vec<Amp<T>>> {
        &self.components
    }

    pub fn component(&self, n: &OccVec) -> Option<&[Amp<T>]> {
        self.components.get(n).map(Vec::as_slice)
    }

    /// Squared norm lost to components beyond the truncation.
    pub fn overflow(&self) -> T {
        self.overflow
    }

    pub fn set_component(&mut self, n: OccVec, v: Vec<Amp<T>>) -> SResult<()> {
        if !self.space.admits(&n) {
            return Err(FockError::Truncation(self.space.fmt_occ(&n)).into());
        }
        let want = self.space.block_dim(&n);
        if v.len() != want {
            return Err(StateError::Dimension { got: v.len(), want });
        }
        if v.iter().all(|a| a.is_zero()) {
            self.components.remove(&n);
        } else {
            self.components.insert(n, v);
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> T {
        self.components.values().map(|v| norm_sqr(v)).fold(T::zero(), |a, b| a + b)
    }

    pub fn inner(&self, other: &Self) -> Amp<T> {
        self.components
            .iter()
            .filter_map(|(n, v)| other.components.get(n).map(|w| crate::linalg::inner(v, w)))
            .fold(Amp::zero(), |a, b| a + b)
    }

    pub fn scale(&self, s: Amp<T>) -> Self {
        let components = self.components.iter().map(|(n, v)| (n.clone(), v.iter().map(|a| a * s).collect())).collect();
        FockState { components, overflow: self.overflow * s.norm_sqr(), ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> SResult<Self> {
        if self.space != other.space {
            return Err(StateError::SpaceMismatch);
        }
        let mut out = self.clone();
        for (n, w) in &other.components {
            let e = out.components.entry(n.clone()).or_insert_with(|| vec![Amp::zero(); w.len()]);
            for (a, b) in e.iter_mut().zip(w) {
                *a = *a + b;
            }
        }
        out.overflow = out.overflow + other.overflow;
        Ok(out)
    }

    fn check_single(&self, psi: &[Amp<T>], c: usize) -> SResult<()> {
        let d = self.space.coin_dim(c);
        if psi.len() != d {
            return Err(StateError::Dimension { got: psi.len(), want: d });
        }
        Ok(())
    }

    /// `a†(ψ)` on coin `c`: the new particle takes copy slot 0, then the
    /// coin's statistics are imposed. Components pushed past the truncation
    /// are dropped and their weight recorded.
    pub fn creation(&self, psi: &[Amp<T>], c: usize) -> SResult<Self> {
        self.check_single(psi, c)?;
        let d = self.space.coin_dim(c);
        let mut out = FockState { components: BTreeMap::new(), overflow: self.overflow, ..self.clone() };
        for (n, v) in &self.components {
            let m = n.plus(c);
            let size = d.pow(n.0[c] as u32) * self.space.low_size(n, c, n.0[c]);
            let scale = T::count(n.0[c] + 1).sqrt();
            let mut w = vec![Amp::<T>::zero(); v.len() * d];
            for (idx, a) in v.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let (hi, lo) = (idx / size, idx % size);
                for (l, p) in psi.iter().enumerate() {
                    w[hi * size * d + l * size + lo] = a * p * scale;
                }
            }
            if !self.space.admits(&m) {
                out.overflow = out.overflow + norm_sqr(&w);
                continue;
            }
            let w = symmetrise_vector_coin(&w, &m, c, &self.space, self.stats[c]);
            out.set_component(m, w)?;
        }
        Ok(out)
    }

    /// `a(ψ)` on coin `c`: contracts `⟨ψ|` against copy slot 0.
    pub fn annihilation(&self, psi: &[Amp<T>], c: usize) -> SResult<Self> {
        self.check_single(psi, c)?;
        let d = self.space.coin_dim(c);
        let mut out = FockState { components: BTreeMap::new(), overflow: T::zero(), ..self.clone() };
        for (n, v) in &self.components {
            let Some(m) = n.minus(c) else { continue };
            let size = d.pow(m.0[c] as u32) * self.space.low_size(&m, c, m.0[c]);
            let scale = T::count(n.0[c]).sqrt();
            let mut w = vec![Amp::<T>::zero(); v.len() / d];
            for (idx, a) in v.iter().enumerate() {
                let (hi, l, lo) = (idx / (size * d), (idx / size) % d, idx % size);
                let o = &mut w[hi * size + lo];
                *o = *o + psi[l].conj() * a * scale;
            }
            out.set_component(m, w)?;
        }
        Ok(out)
    }

    /// Whether every component is fixed by the symmetriser of its statistics.
    pub fn is_symmetric(&self, tol: T) -> bool {
        self.components.iter().all(|(n, v)| {
            let s = symmetrise_vector(v, n, &self.space, &self.stats);
            s.iter().zip(v).all(|(a, b)| (a - b).norm() <= tol)
        })
    }

    /// `self ⊗ ψ` in `target`, whose coins and truncation match this coin-only
    /// state's space.
    pub fn tensor_principal(&self, target: &Arc<FockSpace>, psi: &[Amp<T>]) -> SResult<Self> {
        if target.coins() != self.space.coins() || target.trunc() != self.space.trunc() || !self.space.systems().is_empty() {
            return Err(StateError::SpaceMismatch);
        }
        let pd = target.principal_dim();
        if psi.len() != pd {
            return Err(StateError::Dimension { got: psi.len(), want: pd });
        }
        let components = self
            .components
            .iter()
            .map(|(n, v)| (n.clone(), v.iter().flat_map(|a| psi.iter().map(move |p| a * p)).collect()))
            .collect();
        Ok(FockState { space: target.clone(), stats: self.stats.clone(), components, overflow: self.overflow })
    }

    /// `Σ_n 𝐀(n)Ψ(n)`.
    pub fn apply_operator(&self, a: &FockOperator<T>) -> SResult<Self> {
        if **a.space() != *self.space {
            return Err(StateError::SpaceMismatch);
        }
        let mut out = FockState { components: BTreeMap::new(), ..self.clone() };
        for (n, v) in &self.components {
            if let Some(b) = a.block(n) {
                out.set_component(n.clone(), b.matvec(v))?;
            }
        }
        Ok(out)
    }

    /// Traces out every coin copy.
    pub fn partial_trace_coins(&self) -> PartialDensityOperator<T> {
        let pd = self.space.principal_dim();
        let mut rho = Dense::zeros(pd, pd);
        for v in self.components.values() {
            accumulate_trace(&mut rho, v, pd);
        }
        PartialDensityOperator { matrix: rho, labels: principal_labels(&self.space) }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "norm_sqr": self.norm_sqr().as_f64(),
            "overflow": self.overflow.as_f64(),
            "components": self.components.iter().map(|(n, v)| json!({
                "occ": self.space.occ_json(n),
                "dim": v.len(),
                "entries": v.iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(i, a)| json!([i, a.re.as_f64(), a.im.as_f64()])).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn accumulate_trace<T: Real>(rho: &mut Dense<T>, v: &[Amp<T>], pd: usize) {
    for chunk in v.chunks(pd) {
        let nz: Vec<(usize, Amp<T>)> = chunk.iter().copied().enumerate().filter(|(_, a)| !a.is_zero()).collect();
        for &(p, a) in &nz {
            for &(q, b) in &nz {
                rho[(p, q)] = rho[(p, q)] + a * b.conj();
            }
        }
    }
}

/// `e^{−x} Σ_{n>N} xⁿ/n!`, summed directly so small tails keep their precision.
pub fn coherent_tail<T: Real>(x: T, n_max: usize) -> T {
    let mut term = (-x).exp();
    for n in 1..=n_max {
        term = term * x / T::count(n);
    }
    let mut tail = T::zero();
    let mut n = n_max;
    loop {
        n += 1;
        term = term * x / T::count(n);
        tail = tail + term;
        if term <= tail * T::epsilon() || term.is_zero() {
            return tail;
        }
    }
}

/// A positive operator of trace at most one on the principal system.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialDensityOperator<T> {
    pub matrix: Dense<T>,
    pub labels: Vec<String>,
}

impl<T: Real> PartialDensityOperator<T> {
    pub fn trace(&self) -> T {
        (0..self.matrix.rows()).map(|i| self.matrix[(i, i)].re).fold(T::zero(), |a, b| a + b)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.matrix.rows();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            let a = self.matrix[(i, j)];
            let b = self.matrix[(j, i)].conj();
            let z = (a + b) / T::lit(2.0);
            num_complex::Complex::new(z.re.as_f64(), z.im.as_f64())
        });
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Diagonal in the principal basis, keyed by label, zero entries omitted.
    pub fn distribution(&self) -> IndexMap<String, T> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), self.matrix[(i, i)].re))
            .filter(|(_, p)| !p.is_zero())
            .collect()
    }

    /// Labels carrying diagonal weight above `tol`.
    pub fn support(&self, tol: T) -> Vec<String> {
        self.distribution().into_iter().filter(|(_, p)| *p > tol).map(|(l, _)| l).collect()
    }

    pub fn to_json(&self) -> Value {
        let probs: serde_json::Map<String, Value> = self.distribution().into_iter().map(|(l, p)| (l, json!(p.as_f64()))).collect();
        json!({"trace": self.trace().as_f64(), "probs": probs})
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("position,probability\n");
        for (l, p) in self.distribution() {
            writeln!(s, "{l},{}", p.as_f64()).expect("string write");
        }
        s
    }
}

/// How [`principal_semantics`] evaluates the symmetrised program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Route {
    /// Explicit blocks below the symmetrisation cap, the vector route above.
    #[default]
    Auto,
    /// Fixed point, explicit symmetrisation, blockwise application.
    Explicit,
    /// Runs the declaration on each input component and symmetrises the
    /// output vector, which equals applying the symmetrised operator when
    /// the input is itself symmetric.
    Vector,
}

#[derive(Clone, Debug)]
pub struct PrincipalResult<T> {
    pub rho: PartialDensityOperator<T>,
    pub route: Route,
}

/// `tr_coins(𝕊(⟦main⟧)(coin_init ⊗ ψ))`.
pub fn principal_semantics<T: Real>(engine: &Engine<T>, coin_init: &FockState<T>, psi: &[Amp<T>], route: Route) -> SResult<PrincipalResult<T>> {
    let space = engine.space();
    let tol = T::lit(1e-10);
    if !coin_init.is_symmetric(tol) {
        let name = if coin_init.stats.contains(&Statistics::Fermion) { "antisymmetric" } else { "symmetric" };
        return Err(StateError::NotSymmetric(name));
    }
    let input = coin_init.tensor_principal(space, psi)?;
    let max_occ = input.components.keys().flat_map(|n| n.0.iter().copied()).max().unwrap_or(0);
    let route = match route {
        Route::Auto if max_occ > DEFAULT_FACTORIAL_CAP => Route::Vector,
        Route::Auto => Route::Explicit,
        r => r,
    };
    let rho = match route {
        Route::Explicit => {
            let fix = engine.kleene_fixpoint()?;
            let main = engine.denotational_main(&fix)?;
            let sym = symmetrise_operator(&main, DEFAULT_FACTORIAL_CAP)?;
            input.apply_operator(&sym)?.partial_trace_coins()
        }
        _ => {
            let pd = space.principal_dim();
            let mut rho = Dense::zeros(pd, pd);
            for (n, v) in &input.components {
                let w = engine.apply_to_vector(n, v);
                let s = symmetrise_vector(&w, n, space, &input.stats);
                accumulate_trace(&mut rho, &s, pd);
            }
            PartialDensityOperator { matrix: rho, labels: principal_labels(space) }
        }
    };
    Ok(PrincipalResult { rho, route })
}

/// A parsed `--coin-init` specification.
#[derive(Clone, Debug, PartialEq)]
pub enum CoinInit {
    Vacuum,
    /// Labels of the copies, first copy first.
    Basis { coin: Option<String>, labels: Vec<String> },
    /// Coherent state of one basis label, truncated at `cap` copies.
    Coherent { coin: Option<String>, label: String, cap: usize },
}

impl CoinInit {
    /// Accepts `vacuum`, `basis:L,L,L`, `coherent:L@12`, optionally with a
    /// coin prefix such as `basis:d=L,R`.
    pub fn parse(s: &str) -> SResult<Self> {
        let bad = || StateError::BadInit(s.to_string());
        if s == "vacuum" {
            return Ok(CoinInit::Vacuum);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let (coin, body) = match rest.split_once('=') {
            Some((c, b)) => (Some(c.trim().to_string()), b),
            None => (None, rest),
        };
        match kind {
            "basis" => {
                let labels: Vec<String> = body.split(',').map(|l| l.trim().to_string()).collect();
                if labels.iter().any(String::is_empty) {
                    return Err(bad());
                }
                Ok(CoinInit::Basis { coin, labels })
            }
            "coherent" => {
                let (label, cap) = match body.split_once('@') {
                    Some((l, n)) => (l.trim().to_string(), n.trim().parse().map_err(|_| bad())?),
                    None => (body.trim().to_string(), 12),
                };
                if label.is_empty() {
                    return Err(bad());
                }
                Ok(CoinInit::Coherent { coin, label, cap })
            }
            _ => Err(bad()),
        }
    }

    /// Largest occupation the initialisation populates.
    pub fn max_occupation(&self) -> usize {
        match self {
            CoinInit::Vacuum => 0,
            CoinInit::Basis { labels, .. } => labels.len(),
            CoinInit::Coherent { cap, .. } => *cap,
        }
    }

    /// Builds the coin-only state over `space`'s coins; the default coin is
    /// the first one. Returns the state and the discarded tail weight.
    pub fn build<T: Real>(&self, space: &FockSpace, stats: Vec<Statistics>) -> SResult<(FockState<T>, T)> {
        let coins = coin_space(space);
        let pick = |coin: &Option<String>| -> SResult<usize> {
            match coin {
                Some(c) => space.coin_index(c).ok_or_else(|| FockError::UnknownCoin(c.clone()).into()),
                None if space.coins().is_empty() => Err(StateError::BadInit("no coins to initialise".into())),
                None => Ok(0),
            }
        };
        let label = |c: usize, l: &str| -> SResult<usize> {
            space.coins()[c].labels.iter().position(|x| x == l).ok_or_else(|| StateError::BadInit(format!("unknown label `{l}`")))
        };
        match self {
            CoinInit::Vacuum => Ok((FockState::vacuum(coins, stats), T::zero())),
            CoinInit::Basis { coin, labels } => {
                let c = pick(coin)?;
                let idx = labels.iter().map(|l| label(c, l)).collect::<SResult<Vec<_>>>()?;
                Ok((FockState::basis(coins, stats, c, &idx)?, T::zero()))
            }
            CoinInit::Coherent { coin, label: l, .. } => {
                let c = pick(coin)?;
                let mut psi = vec![Amp::zero(); space.coin_dim(c)];
                psi[label(c, l)?] = Amp::one();
                let n_max = space.trunc().caps[c];
                FockState::coherent(coins, stats, c, &psi, n_max)
            }
        }
    }
}

/// Caps for a coin-only space large enough to hold `init` on every coin.
pub fn truncation_for(init: &CoinInit, coins: usize, default_cap: usize) -> Truncation {
    Truncation::uniform(coins, default_cap.max(init.max_occupation()))
}

/// The paper-convention Poisson weight `e^{−x} xⁿ / n!` of the `n`-copy
/// component of a coherent state with `⟨ψ|ψ⟩ = x`.
pub fn poisson_weight(x: f64, n: usize) -> f64 {
    (-x).exp() * x.powi(n as i32) / factorial(n) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{CoinInfo, SystemInfo};

    fn c(x: f64) -> Amp<f64> {
        Amp::new(x, 0.0)
    }

    fn qubit(cap: usize) -> Arc<FockSpace> {
        let coins = vec![CoinInfo { name: "d".into(), labels: vec!["0".into(), "1".into()] }];
        Arc::new(FockSpace::from_parts(coins, vec![], Truncation::uniform(1, cap)).unwrap())
    }

    #[test]
    fn creation_on_vacuum_and_pauli_exclusion() {
        let s = qubit(3);
        let zero = vec![c(1.0), c(0.0)];
        let vac = FockState::vacuum(s.clone(), vec![Statistics::Boson]);
        let one = vac.creation(&zero, 0).unwrap();
        assert_eq!(one.component(&OccVec(vec![1])).unwrap(), &[c(1.0), c(0.0)]);
        let two = one.creation(&zero, 0).unwrap();
        let v = two.component(&OccVec(vec![2])).unwrap();
        assert!((v[0].re - 2f64.sqrt()).abs() < 1e-15);
        let back = two.annihilation(&zero, 0).unwrap();
        assert!((back.component(&OccVec(vec![1])).unwrap()[0].re - 2.0).abs() < 1e-14);

        let fvac = FockState::vacuum(s, vec![Statistics::Fermion]);
        let f2 = fvac.creation(&zero, 0).unwrap().creation(&zero, 0).unwrap();
        assert!(f2.norm_sqr() < 1e-30);
    }

    #[test]
    fn coherent_weights_are_poisson() {
        let s = qubit(12);
        let (st, tail) = FockState::coherent(s, vec![Statistics::Boson], 0, &[c(1.0), c(0.0)], 12).unwrap();
        for (n, v) in st.components() {
            let w = norm_sqr(v);
            assert!((w - poisson_weight(1.0, n.0[0])).abs() < 1e-14);
        }
        assert!(tail < 1e-9 && tail > 0.0);
        assert!((st.norm_sqr() + tail - 1.0).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_decoheres_orthogonal_coins() {
        let coins = vec![CoinInfo { name: "d".into(), labels: vec!["L".into(), "R".into()] }];
        let systems = vec![SystemInfo { name: "p".into(), labels: vec!["a".into(), "b".into()] }];
        let s = Arc::new(FockSpace::from_parts(coins, systems, Truncation::uniform(1, 1)).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut st = FockState::zero(s, vec![Statistics::Boson]);
        st.set_component(OccVec(vec![1]), vec![c(h), c(0.0), c(0.0), c(h)]).unwrap();
        let rho = st.partial_trace_coins();
        assert!((rho.matrix[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(rho.matrix[(0, 1)].norm() < 1e-15);
        assert!(rho.min_eigenvalue() > -1e-12);
        let csv = rho.to_csv();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "position,probability");
        assert!(rows[1].starts_with("a,0.5") || rows[1].starts_with("a,0.4999"));
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn coin_init_specs() {
        assert_eq!(CoinInit::parse("vacuum").unwrap(), CoinInit::Vacuum);
        assert_eq!(
            CoinInit::parse("coherent:L@12").unwrap(),
            CoinInit::Coherent { coin: None, label: "L".into(), cap: 12 }
        );
        assert_eq!(
            CoinInit::parse("basis:e=L,R").unwrap(),
            CoinInit::Basis { coin: Some("e".into()), labels: vec!["L".into(), "R".into()] }
        );
        assert!(CoinInit::parse("basis:").is_err());
        assert!(CoinInit::parse("thermal:1").is_err());
    }
}
