//! Creation and annihilation operators, (anti)symmetrisers and symmetric
//! operators.

use std::sync::Arc;

use fockrec::fock::{CoinInfo, FockOperator, FockSpace, OccVec, SystemInfo, Truncation};
use fockrec::linalg::{Dense, Sparse};
use fockrec::scalar::Amp;
use fockrec::states::FockState;
use fockrec::symmetry::{
    is_symmetric, one_body_observable, permutation_operator, symmetrise_operator, symmetrise_state_vector, symmetrise_vector, symmetrise_vector_coin,
    PermutationSpec, Statistics, DEFAULT_FACTORIAL_CAP,
};
use proptest::prelude::*;

use super::check;

type C = Amp<f64>;

fn space(dims: &[usize], cap: usize, principal: usize) -> Arc<FockSpace> {
    let coins = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| CoinInfo { name: format!("c{i}"), labels: (0..d).map(|l| l.to_string()).collect() })
        .collect();
    let systems =
        if principal == 0 { vec![] } else { vec![SystemInfo { name: "q".into(), labels: (0..principal).map(|l| l.to_string()).collect() }] };
    Arc::new(FockSpace::from_parts(coins, systems, Truncation::uniform(dims.len(), cap)).unwrap())
}

fn stat(b: bool) -> Statistics {
    if b {
        Statistics::Boson
    } else {
        Statistics::Fermion
    }
}

/// An endless deterministic stream of amplitudes drawn from `seed`.
fn amps(seed: &[(i8, i8)]) -> impl Iterator<Item = C> + '_ {
    seed.iter().cycle().enumerate().map(|(k, &(a, b))| C::new(a as f64 / 4.0 + (k % 3) as f64 * 0.1, b as f64 / 4.0))
}

fn amp_seed() -> impl Strategy<Value = Vec<(i8, i8)>> {
    prop::collection::vec((-4i8..=4, -4i8..=4), 1..24)
}

/// Random state in the range of the symmetrisers, with components only on
/// occupations accepted by `keep`.
fn random_state(sp: &Arc<FockSpace>, stats: &[Statistics], seed: &[(i8, i8)], keep: impl Fn(&OccVec) -> bool) -> FockState<f64> {
    let mut st = FockState::zero(sp.clone(), stats.to_vec());
    let mut src = amps(seed);
    for n in sp.occupations().into_iter().filter(|n| keep(n)) {
        let raw: Vec<C> = (0..sp.block_dim(&n)).map(|_| src.next().unwrap()).collect();
        st.set_component(n.clone(), symmetrise_vector(&raw, &n, sp, stats)).unwrap();
    }
    st
}

fn single(d: usize, seed: &[(i8, i8)]) -> Vec<C> {
    amps(seed).take(d).collect()
}

pub fn annihilating_the_vacuum_gives_zero(cases: u32) -> Result<(), String> {
    check(cases, (amp_seed(), 0usize..2, any::<bool>(), any::<bool>()), |(seed, c, b0, b1)| {
        let sp = space(&[2, 3], 3, 0);
        let vac = FockState::vacuum(sp.clone(), vec![stat(b0), stat(b1)]);
        let out = vac.annihilation(&single(sp.coin_dim(c), &seed), c).unwrap();
        prop_assert!(out.norm_sqr() == 0.0);
        Ok(())
    })
}

pub fn creation_is_adjoint_to_annihilation(cases: u32) -> Result<(), String> {
    check(cases, (amp_seed(), amp_seed(), amp_seed(), 0usize..2, any::<bool>(), any::<bool>()), |(s1, s2, sp_seed, c, b0, b1)| {
        let sp = space(&[2, 3], 3, 0);
        let stats = [stat(b0), stat(b1)];
        let cap = sp.trunc().caps[c];
        let phi = random_state(&sp, &stats, &s1, |n| n.0[c] < cap);
        let theta = random_state(&sp, &stats, &s2, |_| true);
        let psi = single(sp.coin_dim(c), &sp_seed);
        let lhs = phi.creation(&psi, c).unwrap().inner(&theta);
        let rhs = phi.inner(&theta.annihilation(&psi, c).unwrap());
        prop_assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
        Ok(())
    })
}

pub fn creation_preserves_statistics(cases: u32) -> Result<(), String> {
    check(cases, (amp_seed(), amp_seed(), 0usize..2, any::<bool>(), any::<bool>()), |(s1, sp_seed, c, b0, b1)| {
        let sp = space(&[2, 3], 3, 0);
        let stats = [stat(b0), stat(b1)];
        let phi = random_state(&sp, &stats, &s1, |_| true);
        prop_assert!(phi.is_symmetric(1e-12));
        let psi = single(sp.coin_dim(c), &sp_seed);
        prop_assert!(phi.creation(&psi, c).unwrap().is_symmetric(1e-12));
        prop_assert!(phi.annihilation(&psi, c).unwrap().is_symmetric(1e-12));
        Ok(())
    })
}

pub fn antisymmetriser_vanishes_beyond_the_coin_dimension(cases: u32) -> Result<(), String> {
    check(cases, (amp_seed(), 1usize..4, 1usize..3), |(seed, d, extra)| {
        let n = d + extra;
        let factors: Vec<Vec<C>> = (0..n).map(|k| single(d, &seed[k % seed.len()..])).collect();
        prop_assert!(symmetrise_state_vector(&factors, Statistics::Fermion).iter().all(|a| a.norm() < 1e-15));

        let sp = space(&[d], n, 0);
        let occ = OccVec(vec![n]);
        let v: Vec<C> = amps(&seed).take(sp.block_dim(&occ)).collect();
        prop_assert!(symmetrise_vector_coin(&v, &occ, 0, &sp, Statistics::Fermion).iter().all(|a| a.norm() < 1e-15));
        Ok(())
    })
}

pub fn symmetrisers_are_idempotent(cases: u32) -> Result<(), String> {
    check(cases, (amp_seed(), 1usize..5, any::<bool>()), |(seed, n, boson)| {
        let sp = space(&[2], 4, 2);
        let occ = OccVec(vec![n]);
        let v: Vec<C> = amps(&seed).take(sp.block_dim(&occ)).collect();
        let once = symmetrise_vector_coin(&v, &occ, 0, &sp, stat(boson));
        let twice = symmetrise_vector_coin(&once, &occ, 0, &sp, stat(boson));
        prop_assert!(once.iter().zip(&twice).all(|(a, b)| (a - b).norm() < 1e-12));
        Ok(())
    })
}

pub fn one_body_observables_are_symmetric(cases: u32) -> Result<(), String> {
    check(cases, (amp_seed(), 1usize..4), |(seed, d)| {
        let sp = space(&[d], 4, 2);
        let mut src = amps(&seed);
        let mut a = Dense::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                let z = src.next().unwrap();
                a[(i, j)] = if i == j { C::new(z.re, 0.0) } else { z };
                a[(j, i)] = a[(i, j)].conj();
            }
        }
        let obs = one_body_observable(&a, 0, &sp).unwrap();
        prop_assert!(is_symmetric(&obs, 1e-12));
        Ok(())
    })
}

pub fn symmetrisation_is_idempotent_and_symmetric(cases: u32) -> Result<(), String> {
    check(cases, (amp_seed(), 1usize..5), |(seed, density)| {
        let sp = space(&[2, 2], 2, 2);
        let mut src = amps(&seed);
        let blocks = sp.occupations().into_iter().map(|n| {
            let d = sp.block_dim(&n);
            let trips = (0..d * d).filter(|k| k % (density + 1) == 0).map(|k| (k / d, k % d, src.next().unwrap())).collect();
            (n, Sparse::from_triplets(d, d, trips))
        });
        let a = FockOperator::from_blocks(sp.clone(), blocks).unwrap();
        let s = symmetrise_operator(&a, DEFAULT_FACTORIAL_CAP).unwrap();
        prop_assert!(is_symmetric(&s, 1e-12));
        let ss = symmetrise_operator(&s, DEFAULT_FACTORIAL_CAP).unwrap();
        prop_assert!(s.max_abs_diff(&ss).unwrap() < 1e-12);
        Ok(())
    })
}

pub fn permutation_operators_compose(cases: u32) -> Result<(), String> {
    check(cases, (Just((0..4).collect::<Vec<usize>>()).prop_shuffle(), Just((0..4).collect::<Vec<usize>>()).prop_shuffle()), |(p, q)| {
        let sp = space(&[2], 4, 1);
        let n = OccVec(vec![4]);
        let (pi, sigma) = (PermutationSpec::new(p).unwrap(), PermutationSpec::new(q).unwrap());
        let pp = permutation_operator::<f64>(&pi, 0, &n, &sp).unwrap();
        let ps = permutation_operator::<f64>(&sigma, 0, &n, &sp).unwrap();
        // P_π P_σ = P_{σ∘π} with `compose(a, b)` meaning a after b.
        let composed = permutation_operator::<f64>(&sigma.compose(&pi), 0, &n, &sp).unwrap();
        prop_assert!(pp.matmul(&ps).max_abs_diff(&composed) < 1e-15);
        prop_assert_eq!(pi.compose(&pi.inverse()), PermutationSpec::identity(4));
        Ok(())
    })
}
