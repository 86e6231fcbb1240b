//! Flat order, least upper bounds, continuity, substitution and creation
//! functionals.

use std::collections::BTreeSet;
use std::sync::Arc;

use fockrec::fock::{below_closure, lub_chain, CoinInfo, FockOperator, FockSpace, OccVec, SystemInfo, Truncation};
use fockrec::lang::{CoinRef, Program};
use fockrec::linalg::Sparse;
use fockrec::scalar::re;
use fockrec::semantics::{CapSpec, Engine, SemanticsConfig, SkipConvention};
use indexmap::IndexMap;
use proptest::prelude::*;

use super::check;

type Op = FockOperator<f64>;

pub fn space(coin_dims: &[usize], cap: usize, total: Option<usize>) -> Arc<FockSpace> {
    let coins = coin_dims
        .iter()
        .enumerate()
        .map(|(i, &d)| CoinInfo { name: format!("c{i}"), labels: (0..d).map(|l| l.to_string()).collect() })
        .collect();
    let systems = vec![SystemInfo { name: "q".into(), labels: vec!["0".into()] }];
    let mut trunc = Truncation::uniform(coin_dims.len(), cap);
    trunc.total = total;
    Arc::new(FockSpace::from_parts(coins, systems, trunc).unwrap())
}

/// Two one-dimensional coins with cap 2: nine occupations, 1x1 blocks.
fn toy() -> Arc<FockSpace> {
    space(&[1, 1], 2, None)
}

fn scalar_op(sp: &Arc<FockSpace>, vals: &[i8]) -> Op {
    let blocks = sp.occupations().into_iter().zip(vals).map(|(n, &v)| (n, Sparse::from_triplets(1, 1, vec![(0, 0, re(v as f64))])));
    FockOperator::from_blocks(sp.clone(), blocks).unwrap()
}

fn values(op: &Op) -> Vec<i8> {
    op.space().occupations().iter().map(|n| op.block_at(n).unwrap().get(0, 0).re as i8).collect()
}

/// A successor in the flat order: same values on the below-closure of the
/// support, `fresh` elsewhere.
fn extend(op: &Op, fresh: &[i8]) -> Op {
    let sp = op.space();
    let keep = below_closure(&op.support(0.0), sp.trunc());
    let vals: Vec<i8> = sp.occupations().iter().zip(values(op)).zip(fresh).map(|((n, v), &f)| if keep.contains(n) { v } else { f }).collect();
    scalar_op(sp, &vals)
}

fn chain_from(sp: &Arc<FockSpace>, seeds: &[Vec<i8>]) -> Vec<Op> {
    let mut chain = vec![scalar_op(sp, &seeds[0])];
    for s in &seeds[1..] {
        let next = extend(chain.last().unwrap(), s);
        chain.push(next);
    }
    chain
}

/// The existential definition: some below-closed Ω on which the operators
/// agree, with `a` vanishing off Ω. Checked over every subset of occupations.
fn flat_leq_by_definition(a: &Op, b: &Op) -> bool {
    let occs = a.space().occupations();
    let (va, vb) = (values(a), values(b));
    (0u32..1 << occs.len()).any(|mask| {
        let omega: BTreeSet<&OccVec> = occs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, n)| n).collect();
        let closed = omega.iter().all(|n| n.below().iter().all(|m| omega.contains(m)));
        closed && occs.iter().enumerate().all(|(i, n)| if omega.contains(n) { va[i] == vb[i] } else { va[i] == 0 })
    })
}

fn all_binary_ops(sp: &Arc<FockSpace>) -> Vec<Op> {
    let k = sp.occupations().len();
    (0u32..1 << k).map(|m| scalar_op(sp, &(0..k).map(|i| (m >> i & 1) as i8).collect::<Vec<_>>())).collect()
}

fn vals9(max: i8) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(0..=max, 9)
}

/// Random operator with sparse small-integer blocks.
fn random_op(sp: &Arc<FockSpace>, seed: &[(u8, u8, i8)]) -> Op {
    let blocks = sp.occupations().into_iter().enumerate().map(|(k, n)| {
        let d = sp.block_dim(&n);
        let trips = seed
            .iter()
            .filter(|(pick, _, _)| *pick as usize % 8 == k % 8)
            .map(|&(_, pos, v)| ((pos as usize) % d, (pos as usize / 3) % d, re(v as f64)))
            .collect();
        (n, Sparse::from_triplets(d, d, trips))
    });
    FockOperator::from_blocks(sp.clone(), blocks).unwrap()
}

fn op_seed() -> impl Strategy<Value = Vec<(u8, u8, i8)>> {
    prop::collection::vec((any::<u8>(), any::<u8>(), -2i8..=2), 0..12)
}

/// Occupations of the two-coin space used for the continuity checks.
fn small_space() -> Arc<FockSpace> {
    space(&[2, 2], 2, Some(3))
}

fn below_closed(sp: &Arc<FockSpace>, picks: &[u8]) -> BTreeSet<OccVec> {
    let occs = sp.occupations();
    let s: BTreeSet<OccVec> = picks.iter().map(|&p| occs[p as usize % occs.len()].clone()).collect();
    below_closure(&s, sp.trunc())
}

pub fn flat_order_matches_definition_and_is_a_partial_order(cases: u32) -> Result<(), String> {
    check(cases, (vals9(2), vals9(2), vals9(2), vals9(2), vals9(2)), |(a, b, c, f1, f2)| {
        let sp = toy();
        let (a, b, c) = (scalar_op(&sp, &a), scalar_op(&sp, &b), scalar_op(&sp, &c));
        for (x, y) in [(&a, &b), (&b, &c), (&a, &c), (&b, &a)] {
            prop_assert_eq!(x.flat_leq(y, 0.0).unwrap(), flat_leq_by_definition(x, y));
        }
        prop_assert!(a.flat_leq(&a, 0.0).unwrap());
        if a.flat_leq(&b, 0.0).unwrap() && b.flat_leq(&a, 0.0).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        // Transitivity on a constructed chain, where the premises hold.
        let b2 = extend(&a, &f1);
        let c2 = extend(&b2, &f2);
        prop_assert!(a.flat_leq(&b2, 0.0).unwrap() && b2.flat_leq(&c2, 0.0).unwrap());
        prop_assert!(a.flat_leq(&c2, 0.0).unwrap());
        if a.flat_leq(&b, 0.0).unwrap() && b.flat_leq(&c, 0.0).unwrap() {
            prop_assert!(a.flat_leq(&c, 0.0).unwrap());
        }
        prop_assert!(FockOperator::zero(sp.clone()).flat_leq(&a, 0.0).unwrap());
        Ok(())
    })
}

pub fn lub_is_least_among_all_upper_bounds(cases: u32) -> Result<(), String> {
    check(cases, (prop::collection::vec(vals9(1), 1..5),), |(seeds,)| {
        let sp = toy();
        let chain = chain_from(&sp, &seeds);
        let lub = lub_chain(&chain, 0.0).unwrap();
        for a in &chain {
            prop_assert!(a.flat_leq(&lub, 0.0).unwrap());
        }
        let mut bounds = 0;
        for b in all_binary_ops(&sp) {
            if chain.iter().all(|a| a.flat_leq(&b, 0.0).unwrap()) {
                bounds += 1;
                prop_assert!(lub.flat_leq(&b, 0.0).unwrap(), "lub {:?} not below bound {:?}", values(&lub), values(&b));
            }
        }
        prop_assert!(bounds >= 1);
        Ok(())
    })
}

pub fn product_is_continuous(cases: u32) -> Result<(), String> {
    check(cases, (op_seed(), op_seed(), prop::collection::vec(any::<u8>(), 1..4), prop::collection::vec(any::<u8>(), 1..4)), |(sa, sb, ga, gb)| {
        let sp = small_space();
        let (ta, tb) = (random_op(&sp, &sa), random_op(&sp, &sb));
        // Chains growing towards the targets along increasing below-closed sets.
        let grow = |target: &Op, picks: &[u8]| -> Vec<Op> {
            let mut omega = BTreeSet::new();
            let mut out = Vec::new();
            for k in 0..picks.len() {
                omega.extend(below_closed(&sp, &picks[..=k]));
                let om = omega.clone();
                out.push(target.restrict(move |n| om.contains(n)));
            }
            out
        };
        let (ca, cb) = (grow(&ta, &ga), grow(&tb, &gb));
        let len = ca.len().max(cb.len());
        let pad = |c: Vec<Op>| { let last = c.last().unwrap().clone(); c.into_iter().chain(std::iter::repeat(last)).take(len).collect::<Vec<_>>() };
        let (ca, cb) = (pad(ca), pad(cb));
        let products: Vec<Op> = ca.iter().zip(&cb).map(|(a, b)| a.product(b).unwrap()).collect();
        let lhs = lub_chain(&products, 0.0).unwrap();
        let rhs = lub_chain(&ca, 0.0).unwrap().product(&lub_chain(&cb, 0.0).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 0.0));
        Ok(())
    })
}

pub fn guarded_composition_is_continuous_on_common_supports(cases: u32) -> Result<(), String> {
    check(cases, (op_seed(), op_seed(), prop::collection::vec(any::<u8>(), 1..4), 0usize..2), |(s0, s1, picks, coin)| {
        let sp = small_space();
        let targets = [random_op(&sp, &s0), random_op(&sp, &s1)];
        let mut omega = BTreeSet::new();
        let mut chains: [Vec<Op>; 2] = [Vec::new(), Vec::new()];
        for k in 0..picks.len() {
            omega.extend(below_closed(&sp, &picks[..=k]));
            for (i, t) in targets.iter().enumerate() {
                let om = omega.clone();
                chains[i].push(t.restrict(move |n| om.contains(n)));
            }
        }
        let guarded: Vec<Op> = (0..picks.len())
            .map(|j| FockOperator::guarded_composition(coin, &[Some(&chains[0][j]), Some(&chains[1][j])], &sp).unwrap())
            .collect();
        let lhs = lub_chain(&guarded, 0.0).unwrap();
        let lubs = [lub_chain(&chains[0], 0.0).unwrap(), lub_chain(&chains[1], 0.0).unwrap()];
        let rhs = FockOperator::guarded_composition(coin, &[Some(&lubs[0]), Some(&lubs[1])], &sp).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 0.0));
        Ok(())
    })
}

pub fn creation_functionals_commute_and_are_monotone(cases: u32) -> Result<(), String> {
    check(cases, (op_seed(), prop::collection::vec(any::<u8>(), 0..4)), |(seed, keep)| {
        let sp = small_space();
        let a = random_op(&sp, &seed);
        prop_assert_eq!(a.creation_functional(0).creation_functional(1), a.creation_functional(1).creation_functional(0));
        let both: BTreeSet<usize> = [0, 1].into_iter().collect();
        prop_assert_eq!(a.creation_functional_all(&both), a.creation_functional(0).creation_functional(1));

        // a restricted to a below-closed set sits below a; 𝕂 keeps that.
        let om = below_closed(&sp, &keep);
        let lower = a.restrict(|n| om.contains(n));
        prop_assert!(lower.flat_leq(&a, 0.0).unwrap());
        for c in 0..2 {
            prop_assert!(lower.creation_functional(c).flat_leq(&a.creation_functional(c), 0.0).unwrap());
        }
        Ok(())
    })
}

const SCHEME: &str = "\
coin d : basis {L, R};
coin e : basis {L, R};
system p : ring 1;
gate H on (d) = hadamard;
gate K on (e) = hadamard;
gate S on (p) = shift 1;
gate C on (d, e) = matrix [1, 0, 0, 0; 0, 1, 0, 0; 0, 0, 0, 1; 0, 0, 1, 0];
proc X <= H[d]; K[e];
proc Y <= S[p];
main = X;
";

pub fn scheme_engine(skip: SkipConvention) -> Engine<f64> {
    let m = fockrec::parse(SCHEME).unwrap();
    let caps = CapSpec::uniform(3).with_total(4);
    Engine::new(&m, SemanticsConfig::default().with_caps(caps).with_skip(skip)).unwrap()
}

/// Programs over the scheme's gates. Coins in `banned` are not used (they
/// guard an enclosing `qif`); `calls` allows procedure identifiers.
fn program(depth: u32, banned: Vec<&'static str>, calls: bool) -> BoxedStrategy<Program> {
    let d = CoinRef::new("d");
    let e = CoinRef::new("e");
    let mut leaves: Vec<Program> = vec![Program::Skip, Program::Abort, Program::unitary("S", &[], &["p"])];
    if !banned.contains(&"d") {
        leaves.push(Program::unitary("H", &[d.clone()], &[]));
    }
    if !banned.contains(&"e") {
        leaves.push(Program::unitary("K", &[e.clone()], &[]));
    }
    if banned.is_empty() {
        leaves.push(Program::unitary("C", &[d, e], &[]));
    }
    if calls {
        leaves.push(Program::call("X"));
        leaves.push(Program::call("Y"));
        leaves.push(Program::call("X"));
    }
    let leaf = prop::sample::select(leaves).boxed();
    if depth == 0 {
        return leaf;
    }
    let seq = (program(depth - 1, banned.clone(), calls), program(depth - 1, banned.clone(), calls)).prop_map(|(a, b)| Program::seq(a, b));
    let mut options = vec![(2, leaf), (2, seq.boxed())];
    for guard in ["d", "e"] {
        if banned.contains(&guard) {
            continue;
        }
        let mut inner = banned.clone();
        inner.push(guard);
        let qif = (program(depth - 1, inner.clone(), calls), program(depth - 1, inner, calls))
            .prop_map(move |(l, r)| Program::Qif { guard: CoinRef::new(guard), branches: vec![("L".into(), l), ("R".into(), r)] });
        options.push((2, qif.boxed()));
    }
    prop::strategy::Union::new_weighted(options).boxed()
}

pub fn substitution_identity(cases: u32) -> Result<(), String> {
    check(cases, (program(3, vec![], true), program(2, vec![], false), program(2, vec![], false), any::<bool>()), |(p, qx, qy, paper_skip)| {
        let skip = if paper_skip { SkipConvention::Paper } else { SkipConvention::FullIdentity };
        let e = scheme_engine(skip);
        let bodies: IndexMap<String, Program> = [("X".to_string(), qx.clone()), ("Y".to_string(), qy.clone())].into_iter().collect();
        let substituted = e.substitute(&p, &bodies).unwrap();
        let lhs = e.interpret_generalised_cumulative(&substituted).unwrap();
        let env = [e.interpret_generalised_cumulative(&qx).unwrap(), e.interpret_generalised_cumulative(&qy).unwrap()];
        let rhs = e.semantic_functional(&p, &env).unwrap();
        let diff = lhs.max_abs_diff(&rhs).unwrap();
        prop_assert!(diff < 1e-12, "P = {}\nQx = {}\nQy = {}\ndiff {}", p, qx, qy, diff);
        Ok(())
    })
}
