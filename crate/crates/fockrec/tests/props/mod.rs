//! Property suites shared by the dedicated test files and the acceptance run.
#![allow(dead_code)]

use std::fmt::Debug;

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub mod order;
pub mod quantisation;

pub const ORDER_CASES: u32 = 200;
pub const QUANTISATION_CASES: u32 = 100;

/// Runs `test` on `cases` generated values, shrinking on failure.
pub fn check<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub type Suite = &'static [(&'static str, fn(u32) -> Result<(), String>)];

pub const ORDER_SUITE: Suite = &[
    ("flat order", order::flat_order_matches_definition_and_is_a_partial_order),
    ("lub least-ness", order::lub_is_least_among_all_upper_bounds),
    ("product continuity", order::product_is_continuous),
    ("guarded continuity", order::guarded_composition_is_continuous_on_common_supports),
    ("substitution identity", order::substitution_identity),
    ("creation functionals", order::creation_functionals_commute_and_are_monotone),
];

pub const QUANTISATION_SUITE: Suite = &[
    ("a|vac> = 0", quantisation::annihilating_the_vacuum_gives_zero),
    ("adjointness", quantisation::creation_is_adjoint_to_annihilation),
    ("statistics preserved", quantisation::creation_preserves_statistics),
    ("S- vanishing", quantisation::antisymmetriser_vanishes_beyond_the_coin_dimension),
    ("symmetriser idempotent", quantisation::symmetrisers_are_idempotent),
    ("one-body symmetric", quantisation::one_body_observables_are_symmetric),
    ("S idempotent and symmetric", quantisation::symmetrisation_is_idempotent_and_symmetric),
    ("permutation composition", quantisation::permutation_operators_compose),
];
