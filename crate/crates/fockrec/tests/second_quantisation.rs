//! Randomised checks of creation and annihilation operators, the
//! (anti)symmetrisers and symmetric operators.

mod props;

#[test]
fn annihilating_the_vacuum_gives_zero() {
    props::quantisation::annihilating_the_vacuum_gives_zero(props::QUANTISATION_CASES).unwrap();
}

#[test]
fn creation_is_adjoint_to_annihilation() {
    props::quantisation::creation_is_adjoint_to_annihilation(props::QUANTISATION_CASES).unwrap();
}

#[test]
fn creation_preserves_statistics() {
    props::quantisation::creation_preserves_statistics(props::QUANTISATION_CASES).unwrap();
}

#[test]
fn antisymmetriser_vanishes_beyond_the_coin_dimension() {
    props::quantisation::antisymmetriser_vanishes_beyond_the_coin_dimension(props::QUANTISATION_CASES).unwrap();
}

#[test]
fn symmetrisers_are_idempotent() {
    props::quantisation::symmetrisers_are_idempotent(props::QUANTISATION_CASES).unwrap();
}

#[test]
fn one_body_observables_are_symmetric() {
    props::quantisation::one_body_observables_are_symmetric(props::QUANTISATION_CASES).unwrap();
}

#[test]
fn symmetrisation_is_idempotent_and_symmetric() {
    props::quantisation::symmetrisation_is_idempotent_and_symmetric(props::QUANTISATION_CASES).unwrap();
}

#[test]
fn permutation_operators_compose() {
    props::quantisation::permutation_operators_compose(props::QUANTISATION_CASES).unwrap();
}
