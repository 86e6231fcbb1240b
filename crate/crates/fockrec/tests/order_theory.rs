//! Randomised checks of the flat order, least upper bounds, continuity of the
//! operator constructors, the substitution identity and creation functionals.

mod props;

use fockrec::fock::{lub_chain, FockOperator};
use fockrec::lang::{CoinRef, Program};
use fockrec::linalg::Sparse;
use fockrec::semantics::{CallShift, SkipConvention};
use indexmap::IndexMap;
use props::order::{scheme_engine, space};

#[test]
fn flat_order_matches_definition_and_is_a_partial_order() {
    props::order::flat_order_matches_definition_and_is_a_partial_order(props::ORDER_CASES).unwrap();
}

#[test]
fn lub_is_least_among_all_upper_bounds() {
    props::order::lub_is_least_among_all_upper_bounds(props::ORDER_CASES).unwrap();
}

#[test]
fn product_is_continuous() {
    props::order::product_is_continuous(props::ORDER_CASES).unwrap();
}

#[test]
fn guarded_composition_is_continuous_on_common_supports() {
    props::order::guarded_composition_is_continuous_on_common_supports(props::ORDER_CASES).unwrap();
}

#[test]
fn creation_functionals_commute_and_are_monotone() {
    props::order::creation_functionals_commute_and_are_monotone(props::ORDER_CASES).unwrap();
}

#[test]
fn substitution_identity() {
    props::order::substitution_identity(props::ORDER_CASES).unwrap();
}

#[test]
fn guarded_composition_is_not_monotone_for_independent_branch_chains() {
    // Branch 0 is fixed and nonzero at {c0:1}; branch 1 grows from zero to a
    // block at the vacuum. Both branch sequences are chains, but the guarded
    // compositions are not: the new vacuum block of branch 1 lands at {c0:1},
    // inside the below-closure of the composition's support at {c0:2}.
    let sp = space(&[2], 2, None);
    let one = sp.unit(0);
    let id2 = Sparse::identity(2);
    let b0 = FockOperator::from_blocks(sp.clone(), [(one.clone(), id2.clone())]).unwrap();
    let b1_before = FockOperator::zero(sp.clone());
    let b1_after = FockOperator::from_blocks(sp.clone(), [(sp.zero_occ(), Sparse::identity(1))]).unwrap();
    assert!(b1_before.flat_leq(&b1_after, 0.0).unwrap());
    let g_before = FockOperator::guarded_composition(0, &[Some(&b0), Some(&b1_before)], &sp).unwrap();
    let g_after = FockOperator::guarded_composition(0, &[Some(&b0), Some(&b1_after)], &sp).unwrap();
    assert!(!g_before.flat_leq(&g_after, 0.0).unwrap());
    assert!(lub_chain(&[g_before, g_after], 0.0).is_err());
}

#[test]
fn substitution_identity_needs_no_extra_creation_functional() {
    // Applying 𝕂 over the scheme's coins at every call shifts the copies a
    // second time; the guarded composition has already moved them.
    let e = scheme_engine(SkipConvention::FullIdentity);
    let p = Program::Qif { guard: CoinRef::new("d"), branches: vec![("L".into(), Program::call("X")), ("R".into(), Program::Skip)] };
    let qx = Program::unitary("H", &[CoinRef::new("d")], &[]);
    let bodies: IndexMap<String, Program> = [("X".to_string(), qx.clone()), ("Y".to_string(), Program::Skip)].into_iter().collect();
    let lhs = e.interpret_generalised_cumulative(&e.substitute(&p, &bodies).unwrap()).unwrap();
    let env = [e.interpret_generalised_cumulative(&qx).unwrap(), e.interpret_generalised_cumulative(&Program::Skip).unwrap()];
    assert!(lhs.max_abs_diff(&e.semantic_functional(&p, &env).unwrap()).unwrap() < 1e-12);

    let literal = e.reconfigure(e.cfg().clone().with_call_shift(CallShift::CreationFunctional)).unwrap();
    assert!(lhs.max_abs_diff(&literal.semantic_functional(&p, &env).unwrap()).unwrap() > 0.1);
}
